"""Envelope payments, individual rationality, and aggregate welfare/revenue."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .game import GameSpec
from .mechanism import (MarginalRule, RuleKind, closed_form_interim_share, interim_share,
                        saturating_ratio, share_kinks)
from .quadrature import expectation, integrate, nodes_weights, panels

IR_TOL = 1e-9


class NonMonotoneShareError(ValueError):
    """The interim share decreases, so no payment makes reporting truthful."""


class RevenueConsistencyError(ArithmeticError):
    """Direct and virtual-surplus revenue disagree beyond tolerance."""


@dataclass(frozen=True)
class PaymentSchedule:
    """Interim payment ``p(v)`` together with the interim share it implements."""

    interim_payment: Callable
    base_type_payment: float
    share: Callable
    rule_kind: str = "custom"
    #: own types where the share jumps or kinks
    kinks: tuple = ()

    def __call__(self, v):
        return self.interim_payment(v)

    def shifted(self, delta: float) -> "PaymentSchedule":
        pay = self.interim_payment
        return PaymentSchedule(lambda v: pay(v) + delta, self.base_type_payment + delta,
                               self.share, self.rule_kind, self.kinks)


def _check_monotone(share, dist, kinks=()) -> None:
    pts = np.union1d(dist.interior_grid(400), np.asarray(kinks, dtype=float))
    vals = np.asarray(share(pts), dtype=float)
    drop = -np.min(np.diff(vals))
    if drop > 1e-12:
        raise NonMonotoneShareError(f"interim share decreases by {drop:.3g}")


def share_integral(share, lo: float, v, kinks=()):
    """``int_lo^v share(s) ds`` for each entry of ``v`` (vectorised, cumulative)."""
    v = np.asarray(v, dtype=float)
    flat = v.ravel()
    order = np.argsort(flat)
    out = np.empty(flat.size)
    acc, prev = 0.0, lo
    for k in order:
        x = max(flat[k], lo)
        if x > prev:
            acc += integrate(share, prev, x, kinks, max_width=1.0)
            prev = x
        out[k] = acc
    return out.reshape(v.shape) if v.ndim else float(out[0])


def myerson_payment(share, dist, base_payment: float, v, kinks=(), check: bool = True):
    """Payment making truthful reporting optimal for a non-decreasing ``share``.

    ``p(v) = v s(v) - lo s(lo) + p(lo) - int_lo^v s``.
    """
    if check:
        _check_monotone(share, dist, kinks)
    lo = dist.support_lo
    v = np.asarray(v, dtype=float)
    out = v * share(v) - lo * share(lo) + base_payment - share_integral(share, lo, v, kinks)
    return float(out) if np.ndim(out) == 0 else out


def payment_schedule(g: GameSpec, kind, base_payment: Optional[float] = None) -> PaymentSchedule:
    """Envelope payments for the welfare- or revenue-optimal rule.

    The revenue mechanism charges the lowest type its full surplus over the
    outside option; the welfare mechanism defaults to a zero base payment.
    """
    kind = RuleKind(kind)
    dist, lo = g.dist, g.dist.support_lo
    share = lambda v: closed_form_interim_share(kind, g, v)
    kinks = share_kinks(kind, g)
    if base_payment is None:
        if kind is RuleKind.REVENUE:
            base_payment = lo * (share(lo) - g.outside_option)
        else:
            base_payment = 0.0
    _check_monotone(share, dist, kinks)
    pay = lambda v: myerson_payment(share, dist, base_payment, v, kinks, check=False)
    return PaymentSchedule(pay, base_payment, share, kind.value, kinks)


def revenue_optimal_payment(g: GameSpec, v):
    """Revenue-maximising interim payment of the revenue-optimal rule."""
    share = lambda s: closed_form_interim_share(RuleKind.REVENUE, g, s)
    lo = g.dist.support_lo
    v = np.asarray(v, dtype=float)
    kinks = share_kinks(RuleKind.REVENUE, g)
    out = v * share(v) - lo * g.outside_option - share_integral(share, lo, v, kinks)
    return float(out) if np.ndim(out) == 0 else out


def _outer_nodes(dist, kinks):
    lo, hi = dist.support_lo, dist.upper
    breaks = np.concatenate([np.asarray(kinks, dtype=float),
                             np.asarray(getattr(dist, "knots", ()), dtype=float)])
    return nodes_weights(panels(lo, hi, breaks, (hi - lo) / 48.0))


@dataclass(frozen=True)
class RevenueReport:
    direct: float
    virtual_surplus: float

    @property
    def relative_gap(self) -> float:
        return abs(self.direct - self.virtual_surplus) / max(abs(self.virtual_surplus), 1e-300)


def expected_revenue(g: GameSpec, payments: PaymentSchedule, rule: Optional[MarginalRule] = None,
                     rtol: float = 1e-6, atol: float = 1e-8) -> RevenueReport:
    """Seller revenue computed twice: as expected payments and as virtual surplus.

    The virtual-surplus side uses ``rule``'s quadrature interim share when a
    rule is given, else the schedule's own share. Raises
    :class:`RevenueConsistencyError` if the two disagree beyond ``rtol``
    relative plus ``atol`` absolute; the latter covers the bias from truncating
    unbounded supports, so it matters only when revenue is near zero.
    """
    dist, lo = g.dist, g.dist.support_lo
    x, w = _outer_nodes(dist, payments.kinks)
    dens = dist.pdf(x)
    direct = 2.0 * float(np.dot(w, payments(x) * dens))
    surplus = 0.0
    for player in (1, 2):
        if rule is None:
            share = np.asarray(payments.share(x), dtype=float)
            share_lo = float(payments.share(lo))
        else:
            share = np.array([interim_share(rule, g, player, xi) for xi in x])
            share_lo = interim_share(rule, g, player, lo)
        surplus += float(np.dot(w, dist.virtual_value(x) * share * dens))
        # rent left to the lowest type, zero when its IR binds at K
        surplus -= lo * share_lo - payments.base_type_payment
    report = RevenueReport(direct, surplus)
    scale = max(abs(surplus), abs(direct))
    if abs(direct - surplus) > rtol * scale + atol:
        raise RevenueConsistencyError(f"direct {direct!r} vs virtual surplus {surplus!r}")
    return report


def expected_welfare(g: GameSpec, rule: MarginalRule) -> float:
    """``E[(V1 - a V2) h1 + (V2 - a V1) h2]`` by nested quadrature."""
    dist, a = g.dist, g.alpha
    x, w = _outer_nodes(dist, rule.kinks)
    total = 0.0
    for player in (1, 2):
        inner = np.array([
            expectation(lambda u: (xi - a * u) * rule.own(player, xi, u), dist,
                        rule.own_breaks(player, xi, dist))
            for xi in x
        ])
        total += float(np.dot(w, inner * dist.pdf(x)))
    return total


def closed_form_welfare(g: GameSpec, kind) -> float:
    """Welfare as ``sum_i E[V_i s_i(V_i)]`` using the closed-form interim share."""
    kind = RuleKind(kind)
    x, w = _outer_nodes(g.dist, share_kinks(kind, g))
    vals = x * closed_form_interim_share(kind, g, x) * g.dist.pdf(x)
    return 2.0 * float(np.dot(w, vals))


def first_best_welfare(g: GameSpec) -> float:
    """Welfare of the rule that ignores obedience, ``2 E[V (F(V/a) - a (1 - F(aV)))]``."""
    F, a = g.dist.cdf, g.alpha
    kinks = [p for p in share_kinks(RuleKind.WELFARE, g) if p != g.v_star]
    x, w = _outer_nodes(g.dist, kinks)
    share = F(saturating_ratio(x, a)) - a * (1.0 - F(a * x))
    return 2.0 * float(np.dot(w, x * share * g.dist.pdf(x)))


def optimal_revenue(g: GameSpec) -> float:
    """Revenue of the revenue-optimal mechanism via its virtual surplus."""
    x, w = _outer_nodes(g.dist, share_kinks(RuleKind.REVENUE, g))
    share = closed_form_interim_share(RuleKind.REVENUE, g, x)
    lo = g.dist.support_lo
    return 2.0 * float(np.dot(w, g.dist.virtual_value(x) * share * g.dist.pdf(x))) \
        - 2.0 * lo * g.outside_option


@dataclass(frozen=True)
class IRReport:
    ok: bool
    lowest_type_slack: float
    worst_slack: float
    worst_type: float

    def __bool__(self):
        return self.ok


def check_individual_rationality(g: GameSpec, share, payments: PaymentSchedule,
                                 grid: int = 400) -> IRReport:
    """Participation check at the lowest type and, redundantly, on a grid.

    Slack is ``v s(v) - p(v) - v K``; the outside option ``K`` is the share left
    when the rival always learns the state.
    """
    dist, K = g.dist, g.outside_option
    lo = dist.support_lo
    low_slack = lo * (float(share(lo)) - K) - float(payments(lo))
    pts = np.concatenate([[lo], dist.interior_grid(grid)])
    slack = pts * np.asarray(share(pts)) - np.asarray(payments(pts)) - pts * K
    k = int(np.argmin(slack))
    ok = low_slack >= -IR_TOL and slack[k] >= -IR_TOL
    return IRReport(bool(ok), low_slack, float(slack[k]), float(pts[k]))


def interim_truthfulness_regret(share, payments, types) -> float:
    """Largest gain ``v s(v') - p(v') - (v s(v) - p(v))`` over all pairs of ``types``."""
    types = np.asarray(types, dtype=float)
    s = np.asarray(share(types), dtype=float)
    p = np.asarray(payments(types), dtype=float)
    truthful = types * s - p
    deviate = types[:, None] * s[None, :] - p[None, :]
    return float(np.max(deviate - truthful[:, None]))
