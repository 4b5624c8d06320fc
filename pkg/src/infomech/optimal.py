"""Obedience-constrained optimisation of weighted recommendation objectives.

Objectives of the form ``E[w1(V) h1(V) + w2(V) h2(V)]`` with ``w_i``
non-increasing in the opponent's type decompose into one problem per own
type. Each is solved by a step function: recommend the state to the lowest
opponent types, at least enough of them for obedience and at least all with
non-negative weight.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .distributions import NotRegularError, TypeDistribution
from .game import GameSpec
from .mechanism import (MarginalRule, Provenance, RuleKind, ThresholdRule, saturating_ratio,
                        share_kinks)
from .quadrature import expectation

MONOTONE_TOL = 1e-9


class WeightSpecError(ValueError):
    """A weight function is not non-increasing in the opponent's type."""


def _assert_non_increasing(values: np.ndarray, what: str) -> None:
    rise = np.max(np.diff(values, axis=-1), initial=-np.inf)
    if rise > MONOTONE_TOL:
        raise WeightSpecError(f"{what} increases by {rise:.3g} on the check grid")


def _sup_nonneg(func, lo: float, hi: float, n: int = 1):
    """Vectorised ``sup{t in [lo, hi] : func(t) >= 0}`` for non-increasing ``func``.

    ``func`` maps an array of ``t`` of shape ``(n,)`` to values of shape ``(n,)``.
    Returns ``-inf`` where the set is empty and ``hi`` where ``func(hi) >= 0``.
    """
    a = np.full(n, lo, dtype=float)
    b = np.full(n, hi, dtype=float)
    at_lo = func(a) >= 0
    at_hi = func(b) >= 0
    # invariant on live entries: func(a) >= 0 > func(b)
    for _ in range(200):
        if np.all(b - a <= 1e-12 * np.maximum(1.0, np.abs(b))):
            break
        m = 0.5 * (a + b)
        ok = func(m) >= 0
        a = np.where(ok, m, a)
        b = np.where(ok, b, m)
    out = np.where(at_hi, hi, a)
    return np.where(at_lo, out, -np.inf)


def variational_solve(dist: TypeDistribution, g: Callable, c: float) -> float:
    """Threshold ``v`` such that ``1{u <= v}`` maximises ``E[h(U) g(U)]`` s.t. ``E[h(U)] >= c``."""
    if not 0.0 <= c <= 1.0:
        raise ValueError("c must lie in [0, 1]")
    lo, hi = dist.support_lo, dist.upper
    grid = np.linspace(lo, hi, 513)
    _assert_non_increasing(np.asarray(g(grid), dtype=float), "g")
    t_g = float(_sup_nonneg(lambda t: np.asarray(g(t), dtype=float), lo, hi)[0])
    return max(float(dist.quantile(c)), t_g)


@dataclass(frozen=True)
class WeightSpec:
    """Objective weights; explicit ``cutoff_*`` maps are optional shortcuts.

    ``cutoff_v2_star(v1) = sup{v2 : w1(v1, v2) >= 0}`` and symmetrically. When a
    map is omitted it is computed by bisection.
    """

    w1: Callable
    w2: Callable
    cutoff_v2_star: Optional[Callable] = None
    cutoff_v1_star: Optional[Callable] = None

    def check(self, dist: TypeDistribution, n: int = 41) -> None:
        pts = np.linspace(dist.support_lo, dist.upper, n)
        own, opp = np.meshgrid(pts, pts, indexing="ij")
        _assert_non_increasing(self.w1(own, opp), "w1(v1, .)")
        _assert_non_increasing(self.w2(opp, own), "w2(., v2)")

    def sup_cutoff(self, player: int, v_own, dist: TypeDistribution):
        explicit = self.cutoff_v2_star if player == 1 else self.cutoff_v1_star
        if explicit is not None:
            return np.asarray(explicit(v_own), dtype=float)
        v_own = np.ravel(np.asarray(v_own, dtype=float))
        if player == 1:
            func = lambda t: self.w1(v_own, t)
        else:
            func = lambda t: self.w2(t, v_own)
        return _sup_nonneg(func, dist.support_lo, dist.upper, v_own.size)


def welfare_weights(g: GameSpec) -> WeightSpec:
    a = g.alpha
    return WeightSpec(
        w1=lambda v1, v2: np.asarray(v1) - a * np.asarray(v2),
        w2=lambda v1, v2: np.asarray(v2) - a * np.asarray(v1),
    )


def virtual_value_weights(g: GameSpec) -> WeightSpec:
    _require_regular(g)
    a, phi = g.alpha, g.dist.virtual_value
    return WeightSpec(
        w1=lambda v1, v2: phi(v1) - a * phi(v2),
        w2=lambda v1, v2: phi(v2) - a * phi(v1),
    )


def master_solve(w: WeightSpec, g: GameSpec, check: bool = True):
    """Optimal obedient threshold rule for the objective given by ``w``.

    Returns ``(ThresholdRule, MarginalRule)``.
    """
    if check:
        w.check(g.dist)
    vs, top, dist = g.v_star, g.dist.upper, g.dist

    def make(player):
        def cutoff(v):
            shape = np.shape(v)
            sup = w.sup_cutoff(player, v, dist)
            return np.minimum(np.maximum(vs, sup), top).reshape(shape)
        return cutoff

    thresholds = ThresholdRule(make(1), make(2))
    return thresholds, MarginalRule.from_thresholds(thresholds)


def _clamped(cut, top):
    return lambda v: np.minimum(cut(np.asarray(v, dtype=float)), top)


def welfare_rule(g: GameSpec) -> MarginalRule:
    """Second-best welfare rule: told the state iff ``V_j <= max(v*, V_i / alpha)``."""
    vs, a = g.v_star, g.alpha
    cut = _clamped(lambda v: np.maximum(vs, saturating_ratio(v, a)), g.dist.upper)
    return MarginalRule.from_thresholds(ThresholdRule(cut, cut), Provenance.WELFARE_OPTIMAL,
                                        share_kinks(RuleKind.WELFARE, g))


def revenue_rule(g: GameSpec) -> MarginalRule:
    """Revenue-optimal rule: the welfare rule with virtual values in place of types."""
    _require_regular(g)
    vs, a, phi, inv = g.v_star, g.alpha, g.dist.virtual_value, g.dist.inverse_virtual_value
    cut = _clamped(lambda v: np.maximum(vs, inv(saturating_ratio(phi(v), a))), g.dist.upper)
    return MarginalRule.from_thresholds(ThresholdRule(cut, cut), Provenance.REVENUE_OPTIMAL,
                                        share_kinks(RuleKind.REVENUE, g))


def first_best_welfare_rule(g: GameSpec) -> MarginalRule:
    """Welfare maximiser ignoring obedience: told the state iff ``V_i >= alpha V_j``."""
    a = g.alpha
    cut = _clamped(lambda v: saturating_ratio(v, a), g.dist.upper)
    return MarginalRule.from_thresholds(ThresholdRule(cut, cut), Provenance.FIRST_BEST_WELFARE,
                                        share_kinks(RuleKind.WELFARE, g))


def first_best_revenue_rule(g: GameSpec) -> MarginalRule:
    """Virtual-surplus maximiser ignoring obedience."""
    _require_regular(g)
    a, phi, inv = g.alpha, g.dist.virtual_value, g.dist.inverse_virtual_value
    cut = _clamped(lambda v: inv(saturating_ratio(phi(v), a)), g.dist.upper)
    return MarginalRule(
        h1=lambda v1, v2: (phi(v2) <= saturating_ratio(phi(v1), a)).astype(float),
        h2=lambda v1, v2: (phi(v1) <= saturating_ratio(phi(v2), a)).astype(float),
        provenance=Provenance.FIRST_BEST_REVENUE,
        thresholds=ThresholdRule(cut, cut),
        kinks=share_kinks(RuleKind.REVENUE, g),
    )


def boundary_type(g: GameSpec) -> float:
    """Largest type whose obedience binds in the revenue-optimal rule."""
    _require_regular(g)
    return float(g.dist.inverse_virtual_value(g.alpha * g.dist.virtual_value(g.v_star)))


def zero_virtual_type(dist: TypeDistribution) -> float:
    return float(dist.inverse_virtual_value(0.0))


def distorted_type_mass(g: GameSpec, rule, reference, grid: int = 400) -> float:
    """Total probability (over both players) of own types whose recommendation
    differs from ``reference`` on a positive-measure set of opponent types."""
    dist = g.dist
    lo, hi = dist.support_lo, dist.upper
    total = 0.0
    for player in (1, 2):
        def distorted(v):
            breaks = rule.own_breaks(player, v, dist) + reference.own_breaks(player, v, dist)
            gap = expectation(
                lambda u: np.abs(rule.own(player, v, u) - reference.own(player, v, u)),
                dist, breaks)
            return gap > 1e-12

        pts = np.linspace(lo, hi, grid)
        flags = np.array([distorted(v) for v in pts])
        # each flag switch is refined by bisection on the indicator
        edges = [lo] if flags[0] else []
        for k in np.flatnonzero(flags[1:] != flags[:-1]):
            a, b, start = pts[k], pts[k + 1], flags[k]
            while b - a > 1e-13 * max(1.0, abs(b)):
                m = 0.5 * (a + b)
                if m in (a, b):
                    break
                if distorted(m) == start:
                    a = m
                else:
                    b = m
            edges.append(0.5 * (a + b))
        if flags[-1]:
            edges.append(hi)
        for a, b in zip(edges[::2], edges[1::2]):
            total += float(dist.cdf(b) - dist.cdf(a))
    return total


def _require_regular(g: GameSpec) -> None:
    if not g.dist.is_regular:
        raise NotRegularError("the type distribution is not regular")
