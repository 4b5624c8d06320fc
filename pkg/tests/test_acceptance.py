"""Acceptance criteria, each checked at its stated tolerance.

Every test records a one-line PASS/FAIL verdict that the pytest summary prints
(see conftest.py); running this file as a script prints the same lines.
"""
import math
import time

import numpy as np
import pytest

from infomech.game import GameSpec
from infomech.mechanism import (MarginalRule, RuleKind, closed_form_interim_share,
                                interim_share, joint_from_marginals, obedience_margin)
from infomech.optimal import (boundary_type, distorted_type_mass, first_best_revenue_rule,
                              first_best_welfare_rule, revenue_rule, virtual_value_weights,
                              welfare_rule, welfare_weights, zero_virtual_type)
from infomech.payments import (closed_form_welfare, expected_revenue, first_best_welfare,
                               optimal_revenue, payment_schedule)
from infomech.verify import DiscreteInstance, grid_objective, grid_optimize, search_double_deviations

RESULTS = {}
ALPHAS = (0.5, 1.0, 1.5)
PRIORS = (0.5, 0.75)
CONFIGS = [(a, p) for p in PRIORS for a in ALPHAS]
RULES = {RuleKind.WELFARE: welfare_rule, RuleKind.REVENUE: revenue_rule}


def record(number, ok, detail):
    line = f"{'PASS' if ok else 'FAIL'} criterion {number}: {detail}"
    RESULTS[number] = line
    print(line)
    assert ok, line


def test_criterion_01_thresholds():
    err = max(abs(GameSpec(0.5, 0.5).v_star - math.log(2)),
              abs(GameSpec(0.5, 0.75).v_star - math.log(4)),
              abs(zero_virtual_type(GameSpec(0.5).dist) - 1.0))
    record(1, err <= 1e-9, f"v* = ln 2, ln 4 and v0 = 1, max error {err:.2e} (tol 1e-9)")


def test_criterion_02_base_interim_share():
    err = 0.0
    for alpha, prior in CONFIGS:
        g = GameSpec(alpha, prior)
        target = g.p_max - alpha
        for kind, build in RULES.items():
            rule = build(g)
            lo = g.dist.support_lo
            err = max(err, abs(closed_form_interim_share(kind, g, lo) - target))
            for player in (1, 2):
                err = max(err, abs(interim_share(rule, g, player, lo) - target))
    record(2, err <= 1e-8, f"share at lowest type = p_max - alpha, max error {err:.2e} (tol 1e-8)")


def test_criterion_03_closed_form_vs_grid_oracle():
    cases = [(welfare_rule, welfare_weights, 2 / 3), (welfare_rule, welfare_weights, 1.5),
             (revenue_rule, virtual_value_weights, 0.5), (revenue_rule, virtual_value_weights, 2.0)]
    worst_gap, worst_time = 0.0, 0.0
    for build, weights, alpha in cases:
        g = GameSpec(alpha)
        start = time.perf_counter()
        inst = DiscreteInstance.from_game(g, 101, build(g))
        closed = grid_objective(inst, weights(g))
        _, best = grid_optimize(inst, weights(g))
        worst_time = max(worst_time, time.perf_counter() - start)
        worst_gap = max(worst_gap, abs(best - closed) / abs(closed))
    ok = worst_gap <= 1e-3 and worst_time < 5.0
    record(3, ok, f"101x101 grid optimum vs closed form, max relative gap {worst_gap:.2e} "
                  f"(tol 1e-3), slowest instance {worst_time:.3f}s (limit 5s)")


def test_criterion_04_obedience():
    worst = np.inf
    for alpha, prior in CONFIGS:
        g = GameSpec(alpha, prior)
        types = g.dist.interior_grid(1000)
        for build in RULES.values():
            rule = build(g)
            for player in (1, 2):
                worst = min(worst, min(obedience_margin(rule, g, player, v) for v in types))
    g = GameSpec(0.5, 0.5)
    fb = first_best_revenue_rule(g)
    low = np.linspace(g.dist.support_lo, g.v_star, 200, endpoint=False)
    violation = -min(obedience_margin(fb, g, 1, v) for v in low)
    ok = worst >= -1e-9 and violation >= 0.01
    record(4, ok, f"optimal rules worst margin {worst:.2e} (>= -1e-9); first-best revenue "
                  f"violation {violation:.3f} below v* (>= 0.01)")


def test_criterion_05_monotone_shares():
    worst_drop = 0.0
    for alpha, prior in CONFIGS:
        g = GameSpec(alpha, prior)
        for kind in RULES:
            share = closed_form_interim_share(kind, g, g.dist.interior_grid(1000))
            worst_drop = max(worst_drop, -float(np.min(np.diff(share))))
    record(5, worst_drop <= 0.0, f"largest decrease of interim share on 1000-point grids "
                                 f"{max(worst_drop, 0.0):.2e}")


def test_criterion_06_incentive_compatibility():
    worst = -np.inf
    for alpha, prior in CONFIGS:
        g = GameSpec(alpha, prior)
        for kind, build in RULES.items():
            inst = DiscreteInstance.from_game(g, 41, build(g), exact=True)
            worst = max(worst, search_double_deviations(inst, payment_schedule(g, kind)).max_regret)
    record(6, worst <= 1e-8, f"max double-deviation regret on 41-point grids {worst:.2e} "
                             f"(tol 1e-8)")


def test_criterion_07_revenue_identity():
    worst = 0.0
    for alpha, prior in CONFIGS:
        g = GameSpec(alpha, prior)
        report = expected_revenue(g, payment_schedule(g, RuleKind.REVENUE), rtol=np.inf)
        worst = max(worst, report.relative_gap)
    record(7, worst <= 1e-6, f"direct payments vs virtual surplus over 6 configs, max relative "
                             f"gap {worst:.2e} (tol 1e-6)")


def test_criterion_08_comparative_statics():
    alphas = np.round(np.arange(1, 16) / 10, 10)
    ok, notes = True, []
    mass_err = 0.0
    for prior in PRIORS:
        games = [GameSpec(a, prior) for a in alphas]
        second = np.array([closed_form_welfare(g, RuleKind.WELFARE) for g in games])
        first = np.array([first_best_welfare(g) for g in games])
        revenue = np.array([optimal_revenue(g) for g in games])
        ok &= bool(np.all(np.diff(second) <= 0) and np.all(np.diff(revenue) >= 0)
                   and np.all(first >= second))
        for g in games:
            mass = distorted_type_mass(g, welfare_rule(g), first_best_welfare_rule(g))
            mass_err = max(mass_err, abs(mass - 2 * g.dist.cdf(g.alpha * g.v_star)))
        notes.append(f"prior {prior}: welfare {second[0]:.4f}->{second[-1]:.4f}, "
                     f"revenue {revenue[0]:.4f}->{revenue[-1]:.4f}")
    ok &= mass_err <= 1e-6
    record(8, ok, "; ".join(notes) + f"; distorted mass error {mass_err:.2e} (tol 1e-6)")


def test_criterion_09_payment_signs():
    g = GameSpec(0.5, 0.5)
    vt = boundary_type(g)
    pay = payment_schedule(g, RuleKind.REVENUE)
    zero_part = np.linspace(0.0, g.v_star, 8)
    positive_part = np.concatenate([np.linspace(g.v_star, vt, 8)[1:-1], np.linspace(vt, 3.0, 6)])
    zero_vals = pay(zero_part)
    pos_vals = pay(positive_part)
    ok = np.all(np.abs(zero_vals) <= 1e-12) and np.all(pos_vals > 0)
    record(9, bool(ok), f"{zero_part.size} types on [0, v*] pay at most "
                        f"{np.max(np.abs(zero_vals)):.1e}; {positive_part.size} types above v* pay "
                        f"at least {np.min(pos_vals):.2e}")


def test_criterion_10_joint_realisation():
    rng = np.random.default_rng(20261019)
    g = GameSpec(0.5)
    smooth = MarginalRule(h1=lambda v1, v2: 1.0 / (1.0 + np.exp(v2 - v1)),
                          h2=lambda v1, v2: np.exp(-v1 * v2))
    rules = [smooth, revenue_rule(g), welfare_rule(g)]
    worst = 0.0
    for k in range(100):
        rule = rules[k % len(rules)]
        theta = int(rng.integers(0, 2))
        v1, v2 = rng.exponential(1.0, size=2)
        d = joint_from_marginals(rule).distribution(theta, v1, v2)
        h1 = sum(p for a, p in d.items() if a.a1 == theta)
        h2 = sum(p for a, p in d.items() if a.a2 == theta)
        worst = max(worst, abs(sum(d.values()) - 1.0), abs(h1 - float(rule.h1(v1, v2))),
                    abs(h2 - float(rule.h2(v1, v2))))
    record(10, worst <= 1e-12, f"sum-to-one and marginal consistency at 100 random points, "
                               f"max error {worst:.1e} (tol 1e-12)")


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-q"]))
