"""Composite Gauss-Legendre quadrature split at known discontinuities.

Mechanism integrands are indicators of threshold events, so naive quadrature
loses accuracy at the jumps. Splitting the interval at every jump makes the
integrand smooth on each panel.
"""
from __future__ import annotations

import numpy as np

_ORDER = 16
_NODES, _WEIGHTS = np.polynomial.legendre.leggauss(_ORDER)
_NODES_LO, _WEIGHTS_LO = np.polynomial.legendre.leggauss(_ORDER // 2 + 1)


class QuadratureError(ArithmeticError):
    """Two quadrature orders disagreed beyond tolerance."""


def panels(lo: float, hi: float, breaks=(), max_width: float | None = None) -> np.ndarray:
    """Sorted panel edges covering ``[lo, hi]``, including every finite break inside."""
    pts = [lo, hi]
    for b in np.ravel(np.asarray(breaks, dtype=float)):
        if np.isfinite(b) and lo < b < hi:
            pts.append(float(b))
    edges = np.unique(pts)
    if max_width is None:
        return edges
    out = [edges[0]]
    for a, b in zip(edges[:-1], edges[1:]):
        k = max(1, int(np.ceil((b - a) / max_width)))
        out.extend(np.linspace(a, b, k + 1)[1:])
    return np.asarray(out)


def nodes_weights(edges: np.ndarray, low_order: bool = False):
    """Quadrature nodes and weights for the panels delimited by ``edges``."""
    x0, w0 = (_NODES_LO, _WEIGHTS_LO) if low_order else (_NODES, _WEIGHTS)
    a = edges[:-1, None]
    b = edges[1:, None]
    half = (b - a) / 2.0
    x = (a + b) / 2.0 + half * x0[None, :]
    w = half * w0[None, :]
    return x.ravel(), w.ravel()


def integrate(func, lo: float, hi: float, breaks=(), max_width=None, check: bool = False,
              atol: float = 1e-9, rtol: float = 1e-9) -> float:
    """Integrate a vectorised ``func`` over ``[lo, hi]``.

    With ``check=True`` a lower-order rule is evaluated on the same panels and a
    :class:`QuadratureError` is raised when the two disagree.
    """
    if hi <= lo:
        return 0.0
    edges = panels(lo, hi, breaks, max_width)
    x, w = nodes_weights(edges)
    val = float(np.dot(w, func(x)))
    if check:
        xl, wl = nodes_weights(edges, low_order=True)
        coarse = float(np.dot(wl, func(xl)))
        if abs(val - coarse) > atol + rtol * abs(val):
            raise QuadratureError(
                f"quadrature orders disagree on [{lo}, {hi}]: {val!r} vs {coarse!r}"
            )
    return val


def expectation(func, dist, breaks=(), check: bool = False) -> float:
    """``E[func(V)]`` for ``V ~ dist`` conditioned on the truncated support.

    Renormalising by the retained mass keeps expectations of constants exact.
    """
    lo, hi = dist.support_lo, dist.upper
    width = (hi - lo) / 24.0
    # density kinks of tabulated distributions are discontinuities too
    breaks = np.concatenate([np.ravel(np.asarray(breaks, dtype=float)),
                             np.asarray(getattr(dist, "knots", ()), dtype=float)])
    mass = float(dist.cdf(hi)) - float(dist.cdf(lo))
    return integrate(lambda v: func(v) * dist.pdf(v), lo, hi, breaks, width, check=check) / mass
