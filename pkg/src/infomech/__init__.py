"""Selling action recommendations to two competing data buyers.

The seller knows a binary state; each buyer privately knows a profit margin.
The package computes the welfare- and revenue-optimal obedient recommendation
rules, their envelope payments, and brute-force oracles that certify them.
"""
from .distributions import (Exponential, NotRegularError, Tabulated, TypeDistribution, Uniform,
                            parse_distribution)
from .game import ActionProfile, GameSpec, market_share, obedience_threshold, utility
from .mechanism import (JointRecommendation, MarginalRule, Provenance, RuleKind, ThresholdRule,
                        closed_form_interim_share, interim_share, is_obedient,
                        joint_from_marginals, obedience_margin)
from .optimal import (WeightSpec, boundary_type, distorted_type_mass, first_best_revenue_rule,
                      first_best_welfare_rule, master_solve, revenue_rule, variational_solve,
                      virtual_value_weights, welfare_rule, welfare_weights, zero_virtual_type)
from .payments import (PaymentSchedule, check_individual_rationality, closed_form_welfare,
                       expected_revenue, expected_welfare, myerson_payment, optimal_revenue,
                       payment_schedule, revenue_optimal_payment)
from .verify import (DiscreteInstance, check_obedience_discrete, check_truthfulness_discrete,
                     grid_optimize, search_double_deviations)
from .estimator import ObedientMechanism

__all__ = [
    "ActionProfile", "DiscreteInstance", "Exponential", "GameSpec", "JointRecommendation",
    "MarginalRule", "NotRegularError", "ObedientMechanism", "PaymentSchedule", "Provenance",
    "RuleKind", "Tabulated", "ThresholdRule", "TypeDistribution", "Uniform", "WeightSpec",
    "boundary_type", "check_individual_rationality", "check_obedience_discrete",
    "check_truthfulness_discrete", "closed_form_interim_share", "closed_form_welfare",
    "distorted_type_mass", "expected_revenue", "expected_welfare", "first_best_revenue_rule",
    "first_best_welfare_rule", "grid_optimize", "interim_share", "is_obedient",
    "joint_from_marginals", "market_share", "master_solve", "myerson_payment",
    "obedience_margin", "obedience_threshold", "optimal_revenue", "parse_distribution",
    "payment_schedule", "revenue_optimal_payment", "revenue_rule", "search_double_deviations",
    "utility", "variational_solve", "virtual_value_weights", "welfare_rule", "welfare_weights",
    "zero_virtual_type",
]
