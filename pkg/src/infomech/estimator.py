"""scikit-learn style wrapper around the optimal mechanisms."""
from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .distributions import TypeDistribution, parse_distribution
from .game import GameSpec
from .mechanism import RuleKind, closed_form_interim_share
from .optimal import boundary_type, revenue_rule, welfare_rule, zero_virtual_type
from .payments import closed_form_welfare, optimal_revenue, payment_schedule


class ObedientMechanism(TransformerMixin, BaseEstimator):
    """Welfare- or revenue-optimal obedient recommendation mechanism.

    ``fit`` needs no data; it solves the mechanism for the configured game.
    ``predict`` takes type profiles ``(n, 2)`` and returns whether each player
    is told the state. ``transform`` maps single types ``(n,)`` or ``(n, 1)``
    to columns ``[interim share, interim payment]``.
    """

    def __init__(self, objective="revenue", alpha=0.5, prior=0.5, dist="exp:1"):
        self.objective = objective
        self.alpha = alpha
        self.prior = prior
        self.dist = dist

    def fit(self, X=None, y=None):
        kind = RuleKind(self.objective)
        dist = self.dist if isinstance(self.dist, TypeDistribution) \
            else parse_distribution(self.dist)
        g = GameSpec(float(self.alpha), float(self.prior), dist)
        self.game_ = g
        self.kind_ = kind
        self.rule_ = welfare_rule(g) if kind is RuleKind.WELFARE else revenue_rule(g)
        self.payments_ = payment_schedule(g, kind)
        self.v_star_ = g.v_star
        if dist.is_regular:
            self.v_zero_ = zero_virtual_type(dist)
            self.v_tilde_ = boundary_type(g)
            self.revenue_ = optimal_revenue(g) if kind is RuleKind.REVENUE else None
        else:
            self.v_zero_ = self.v_tilde_ = self.revenue_ = None
        self.welfare_ = closed_form_welfare(g, kind)
        return self

    def predict(self, X):
        """0/1 indicators ``[h1, h2]`` for each type profile row."""
        check_is_fitted(self, "rule_")
        X = check_array(X, ensure_min_features=2)
        if X.shape[1] != 2:
            raise ValueError(f"expected 2 columns (one type per player), got {X.shape[1]}")
        v1, v2 = X[:, 0], X[:, 1]
        return np.column_stack([self.rule_.h1(v1, v2), self.rule_.h2(v1, v2)]).astype(int)

    def transform(self, X):
        check_is_fitted(self, "rule_")
        X = np.asarray(X, dtype=float)
        if X.ndim == 1:
            X = X[:, None]
        X = check_array(X)
        if X.shape[1] != 1:
            raise ValueError("transform expects a single column of types")
        v = X[:, 0]
        share = np.asarray(closed_form_interim_share(self.kind_, self.game_, v), dtype=float)
        pay = np.asarray(self.payments_(v), dtype=float)
        return np.column_stack([share, pay])
