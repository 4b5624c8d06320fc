"""Recommendation rules represented by their marginals.

A rule is described by ``h_i(v1, v2) = P[A_i = theta | V = (v1, v2)]`` for
both players. Any pair of marginals is realised by recommending independently
to each player (:func:`joint_from_marginals`), so solvers work with the
marginals alone.
"""
from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .distributions import NotRegularError
from .game import ActionProfile, GameSpec, _check_player
from .quadrature import expectation

OBEDIENCE_TOL = 1e-9


class Provenance(enum.Enum):
    WELFARE_OPTIMAL = "welfare-optimal"
    REVENUE_OPTIMAL = "revenue-optimal"
    FIRST_BEST_WELFARE = "first-best-welfare"
    FIRST_BEST_REVENUE = "first-best-revenue"
    CUSTOM = "custom"


class RuleKind(enum.Enum):
    WELFARE = "welfare"
    REVENUE = "revenue"


@dataclass(frozen=True)
class ThresholdRule:
    """Cutoff maps: player ``i`` is told the state iff ``V_j <= cutoff_i(V_i)``.

    Both maps are vectorised and non-decreasing for the named rules.
    """

    cutoff1: Callable
    cutoff2: Callable

    def cutoff(self, player: int):
        return self.cutoff1 if player == 1 else self.cutoff2


@dataclass(frozen=True)
class MarginalRule:
    h1: Callable
    h2: Callable
    provenance: Provenance = Provenance.CUSTOM
    thresholds: Optional[ThresholdRule] = None
    #: fixed opponent-type discontinuities used by the quadrature splitter
    breakpoints: tuple = ()
    #: own types where interim quantities have jumps or kinks
    kinks: tuple = ()

    @classmethod
    def from_thresholds(cls, thresholds: ThresholdRule, provenance=Provenance.CUSTOM,
                        kinks=()):
        c1, c2 = thresholds.cutoff1, thresholds.cutoff2
        return cls(
            h1=lambda v1, v2: (np.asarray(v2) <= c1(v1)).astype(float),
            h2=lambda v1, v2: (np.asarray(v1) <= c2(v2)).astype(float),
            provenance=provenance,
            thresholds=thresholds,
            kinks=tuple(kinks),
        )

    @classmethod
    def constant(cls, p1: float, p2: Optional[float] = None):
        p2 = p1 if p2 is None else p2
        return cls(
            h1=lambda v1, v2: np.broadcast_to(float(p1), np.broadcast(v1, v2).shape).astype(float),
            h2=lambda v1, v2: np.broadcast_to(float(p2), np.broadcast(v1, v2).shape).astype(float),
        )

    def own(self, player: int, v_own, v_opp):
        """``h_player`` evaluated at own type ``v_own`` and opponent type ``v_opp``."""
        if player == 1:
            return np.asarray(self.h1(v_own, v_opp), dtype=float)
        return np.asarray(self.h2(v_opp, v_own), dtype=float)

    def other(self, player: int, v_own, v_opp):
        """The opponent's marginal, seen from ``player``'s side."""
        if player == 1:
            return np.asarray(self.h2(v_own, v_opp), dtype=float)
        return np.asarray(self.h1(v_opp, v_own), dtype=float)

    def own_breaks(self, player: int, v: float, dist) -> list:
        out = list(self.breakpoints)
        if self.thresholds is not None:
            out.append(float(self.thresholds.cutoff(player)(v)))
        return out

    def other_breaks(self, player: int, v: float, dist) -> list:
        """Opponent types ``u`` at which ``1{v <= cutoff_j(u)}`` switches."""
        out = list(self.breakpoints)
        if self.thresholds is None:
            return out
        cut = self.thresholds.cutoff(2 if player == 1 else 1)
        lo, hi = dist.support_lo, dist.upper
        if cut(lo) >= v or cut(hi) < v:
            return out
        # cutoffs may jump, so bracket the switch instead of solving cut(u) = v
        a, b = lo, hi
        while b - a > 1e-13 * max(1.0, abs(b)):
            m = 0.5 * (a + b)
            if m in (a, b):
                break
            if float(cut(m)) >= v:
                b = m
            else:
                a = m
        out.append(b)
        return out


@dataclass(frozen=True)
class JointRecommendation:
    """``sigma(a, theta, v1, v2)``: probability of action profile ``a``."""

    rule: MarginalRule

    def sigma(self, a: ActionProfile, theta: int, v1, v2):
        h1 = self.rule.h1(v1, v2)
        h2 = self.rule.h2(v1, v2)
        p1 = h1 if a[0] == theta else 1.0 - h1
        p2 = h2 if a[1] == theta else 1.0 - h2
        return p1 * p2

    def distribution(self, theta: int, v1, v2) -> dict:
        return {
            ActionProfile(a1, a2): self.sigma(ActionProfile(a1, a2), theta, v1, v2)
            for a1, a2 in itertools.product((0, 1), repeat=2)
        }


def joint_from_marginals(rule: MarginalRule) -> JointRecommendation:
    """Realise ``rule`` by recommending to each player independently given (theta, V)."""
    return JointRecommendation(rule)


def conditional_correct(rule: MarginalRule, g: GameSpec, player: int, v: float) -> float:
    """``E[h_player(V) | V_player = v]`` by quadrature over the opponent's type."""
    _check_player(player)
    return expectation(lambda u: rule.own(player, v, u), g.dist,
                       rule.own_breaks(player, v, g.dist), check=True)


def conditional_other_correct(rule: MarginalRule, g: GameSpec, player: int, v: float) -> float:
    """``E[h_opponent(V) | V_player = v]``."""
    _check_player(player)
    return expectation(lambda u: rule.other(player, v, u), g.dist,
                       rule.other_breaks(player, v, g.dist), check=True)


def obedience_margin(rule: MarginalRule, g: GameSpec, player: int, v: float) -> float:
    """Excess probability of a correct recommendation over the prior's best guess."""
    return conditional_correct(rule, g, player, v) - g.p_max


@dataclass(frozen=True)
class ObedienceReport:
    ok: bool
    worst_margin: float
    worst_player: int
    worst_type: float

    def __bool__(self):
        return self.ok


def is_obedient(rule: MarginalRule, g: GameSpec, grid: int = 200) -> ObedienceReport:
    if grid < 2:
        raise ValueError("grid must be at least 2")
    worst = (np.inf, 1, np.nan)
    for player in (1, 2):
        for v in g.dist.interior_grid(grid):
            m = obedience_margin(rule, g, player, v)
            if m < worst[0]:
                worst = (m, player, float(v))
    return ObedienceReport(worst[0] >= -OBEDIENCE_TOL, *worst)


def interim_share(rule: MarginalRule, g: GameSpec, player: int, v: float) -> float:
    """Expected market share of ``player`` with type ``v``, by quadrature."""
    own = conditional_correct(rule, g, player, v)
    other = conditional_other_correct(rule, g, player, v)
    return own - g.alpha * other


def saturating_ratio(num, alpha: float):
    """``num / alpha`` with the ``alpha -> 0+`` limit (+inf or -inf by sign)."""
    num = np.asarray(num, dtype=float)
    if alpha > 0:
        # tiny alpha overflows to the same infinite limit
        with np.errstate(over="ignore"):
            return num / alpha
    return np.where(num >= 0.0, np.inf, -np.inf)


def closed_form_interim_share(kind: RuleKind, g: GameSpec, v):
    """Interim share of the welfare- or revenue-optimal rule in closed form.

    Vectorised over ``v``.
    """
    kind = RuleKind(kind)
    F = g.dist.cdf
    v = np.asarray(v, dtype=float)
    vs, a = g.v_star, g.alpha
    if kind is RuleKind.WELFARE:
        own = np.maximum(F(vs), F(saturating_ratio(v, a)))
        rival_blocked = F(a * v)
    else:
        if not g.dist.is_regular:
            raise NotRegularError("revenue-optimal rule needs a regular distribution")
        phi = g.dist.virtual_value(v)
        inv = g.dist.inverse_virtual_value
        own = np.maximum(F(vs), F(inv(saturating_ratio(phi, a))))
        rival_blocked = F(inv(a * phi))
    out = own + a * (v > vs) * rival_blocked - a
    return float(out) if out.ndim == 0 else out


def share_kinks(kind: RuleKind, g: GameSpec) -> tuple:
    """Own types at which the closed-form interim share jumps or has a kink.

    Covers the obedience floor, the switch of the ``max`` and every point where
    a composed cutoff leaves the (truncated) support.
    """
    kind = RuleKind(kind)
    d, a, vs = g.dist, g.alpha, g.v_star
    lo, top = d.support_lo, d.upper
    pts = [vs]
    if kind is RuleKind.WELFARE:
        pts += [a * vs, a * lo, a * top]
        if a > 0:
            pts += [lo / a, top / a]
    else:
        phi, inv = d.virtual_value, d.inverse_virtual_value
        phi_lo, phi_top = float(phi(lo)), float(phi(top))
        pts += [inv(a * phi(vs)), inv(0.0), inv(a * phi_lo), inv(a * phi_top)]
        if a > 0:
            pts += [inv(phi_lo / a), inv(phi_top / a)]
    return tuple(sorted({float(p) for p in pts if np.isfinite(p) and lo <= p <= top}))
