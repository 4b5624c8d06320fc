import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from infomech.distributions import Exponential, Tabulated
from infomech.game import ActionProfile, GameSpec
from infomech.mechanism import (MarginalRule, Provenance, RuleKind, closed_form_interim_share,
                                conditional_correct, interim_share, is_obedient,
                                joint_from_marginals, obedience_margin, saturating_ratio,
                                share_kinks)
from infomech.optimal import (first_best_welfare_rule, revenue_rule, welfare_rule)

LN2 = math.log(2)
F = Exponential(1.0).cdf


def test_joint_examples():
    j = joint_from_marginals(MarginalRule.constant(1.0, 0.0))
    dist = j.distribution(0, 1.3, 0.2)
    assert dist[ActionProfile(0, 1)] == 1.0
    assert sum(dist.values()) == 1.0

    j = joint_from_marginals(MarginalRule.constant(0.5))
    for p in j.distribution(1, 0.1, 2.0).values():
        assert p == pytest.approx(0.25)

    j = joint_from_marginals(MarginalRule.constant(0.9, 0.2))
    d = j.distribution(0, 1.0, 1.0)
    assert d[ActionProfile(0, 0)] == pytest.approx(0.18)
    assert d[ActionProfile(0, 1)] == pytest.approx(0.72)
    assert d[ActionProfile(1, 0)] == pytest.approx(0.02)
    assert d[ActionProfile(1, 1)] == pytest.approx(0.08)


@settings(max_examples=100)
@given(theta=st.integers(0, 1), v1=st.floats(0, 10), v2=st.floats(0, 10),
       alpha=st.floats(0.05, 2.0))
def test_joint_reproduces_marginals(theta, v1, v2, alpha):
    rule = revenue_rule(GameSpec(alpha))
    j = joint_from_marginals(rule)
    d = j.distribution(theta, v1, v2)
    assert sum(d.values()) == pytest.approx(1.0, abs=1e-12)
    h1 = sum(p for a, p in d.items() if a.a1 == theta)
    h2 = sum(p for a, p in d.items() if a.a2 == theta)
    assert h1 == pytest.approx(float(rule.h1(v1, v2)), abs=1e-12)
    assert h2 == pytest.approx(float(rule.h2(v1, v2)), abs=1e-12)


def test_obedience_margin_examples():
    g = GameSpec(2 / 3)
    rule = welfare_rule(g)
    for v in np.linspace(0.0, g.alpha * g.v_star, 5):
        assert obedience_margin(rule, g, 1, v) == pytest.approx(0.0, abs=1e-9)
    assert obedience_margin(rule, g, 1, 2.0) == pytest.approx(F(3.0) - 0.5, abs=1e-10)
    assert obedience_margin(MarginalRule.constant(g.p_max), g, 1, 1.0) == pytest.approx(0, abs=1e-15)


@pytest.mark.parametrize("alpha", [0.5, 1.0, 1.5])
def test_welfare_rule_is_obedient(alpha):
    assert is_obedient(welfare_rule(GameSpec(alpha)), GameSpec(alpha), grid=100)


def test_first_best_welfare_violates_obedience_at_low_types():
    g = GameSpec(2 / 3)
    report = is_obedient(first_best_welfare_rule(g), g, grid=100)
    assert not report
    assert report.worst_margin < -0.1
    assert report.worst_type < g.v_star


def test_always_correct_rule():
    g = GameSpec(0.4, 0.7)
    rule = MarginalRule.constant(1.0)
    assert is_obedient(rule, g, grid=20)
    assert interim_share(rule, g, 1, 1.7) == pytest.approx(0.6)


def test_interim_share_at_lowest_type():
    g = GameSpec(0.5)
    # quadrature drops the 1e-10 tail beyond the truncation point
    assert interim_share(welfare_rule(g), g, 1, 0.0) == pytest.approx(0.0, abs=1e-9)
    assert interim_share(revenue_rule(g), g, 2, 0.0) == pytest.approx(0.0, abs=1e-9)
    assert closed_form_interim_share(RuleKind.WELFARE, g, 0.0) == pytest.approx(0.0, abs=1e-15)
    assert closed_form_interim_share(RuleKind.REVENUE, g, 0.0) == pytest.approx(0.0, abs=1e-15)


def test_welfare_share_just_above_threshold():
    g = GameSpec(0.5)
    v = np.nextafter(LN2, 1.0)
    expected = F(2 * LN2) + 0.5 * F(0.5 * LN2) - 0.5
    assert expected == pytest.approx(0.3965, abs=1e-4)
    assert closed_form_interim_share(RuleKind.WELFARE, g, v) == pytest.approx(expected, abs=1e-12)
    assert interim_share(welfare_rule(g), g, 1, v) == pytest.approx(expected, abs=1e-9)


@pytest.mark.parametrize("kind", [RuleKind.WELFARE, RuleKind.REVENUE])
@pytest.mark.parametrize("alpha", [0.5, 1.0, 1.5])
def test_closed_form_matches_quadrature(kind, alpha):
    g = GameSpec(alpha)
    rule = welfare_rule(g) if kind is RuleKind.WELFARE else revenue_rule(g)
    types = g.dist.interior_grid(200)
    closed = closed_form_interim_share(kind, g, types)
    for player in (1, 2):
        quad = np.array([interim_share(rule, g, player, v) for v in types])
        assert np.max(np.abs(quad - closed)) < 1e-6


@pytest.mark.parametrize("prior", [0.5, 0.75])
@pytest.mark.parametrize("kind", [RuleKind.WELFARE, RuleKind.REVENUE])
def test_closed_form_share_is_non_decreasing(kind, prior):
    for alpha in (0.25, 0.5, 1.0, 1.5, 2.0):
        g = GameSpec(alpha, prior)
        share = closed_form_interim_share(kind, g, g.dist.interior_grid(1000))
        assert np.all(np.diff(share) >= -1e-12)


def test_revenue_share_needs_regular_distribution():
    g = GameSpec(0.5, 0.5, Tabulated([0.0, 1.0, 2.0, 3.0], [0.0, 0.45, 0.55, 1.0]))
    with pytest.raises(ValueError):
        closed_form_interim_share(RuleKind.REVENUE, g, 1.0)


def test_named_rules_are_deterministic():
    g = GameSpec(0.8)
    v1, v2 = np.meshgrid(np.linspace(0, 5, 30), np.linspace(0, 5, 30))
    for rule in (welfare_rule(g), revenue_rule(g)):
        assert rule.provenance in (Provenance.WELFARE_OPTIMAL, Provenance.REVENUE_OPTIMAL)
        for h in (rule.h1(v1, v2), rule.h2(v1, v2)):
            assert set(np.unique(h)) <= {0.0, 1.0}


def test_cutoffs_floor_at_threshold_and_increase():
    g = GameSpec(0.7, 0.6)
    v = np.linspace(0, g.dist.upper, 500)
    for rule in (welfare_rule(g), revenue_rule(g)):
        cut = rule.thresholds.cutoff(1)(v)
        assert np.all(cut >= g.v_star - 1e-15)
        assert np.all(np.diff(cut) >= 0)


def test_saturating_ratio():
    assert saturating_ratio(1.0, 0.5) == 2.0
    assert saturating_ratio(0.3, 0.0) == np.inf
    assert saturating_ratio(-0.3, 0.0) == -np.inf


def test_share_kinks_contain_boundary_types():
    g = GameSpec(0.5)
    kinks = share_kinks(RuleKind.REVENUE, g)
    assert any(abs(k - LN2) < 1e-12 for k in kinks)
    assert any(abs(k - (1 + 0.5 * (LN2 - 1))) < 1e-12 for k in kinks)


def test_conditional_correct_rejects_bad_player():
    g = GameSpec(0.5)
    with pytest.raises(ValueError):
        conditional_correct(welfare_rule(g), g, 0, 1.0)
    with pytest.raises(ValueError):
        is_obedient(welfare_rule(g), g, grid=1)
