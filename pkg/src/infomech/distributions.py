"""Buyer type distributions.

Every mechanism formula consumes a CDF, a density, a quantile function and the
virtual value ``phi(v) = v - (1 - F(v)) / f(v)``. The built-in families have
closed forms; :class:`Tabulated` falls back on bracketed bisection.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy import optimize

#: Probability mass discarded above the truncation point of unbounded supports.
TAIL_MASS = 1e-10
#: Absolute tolerance of every bisection-based inverse.
BISECT_XTOL = 1e-12


class NotRegularError(ValueError):
    """Raised when an operation needs a non-decreasing virtual value."""


class TypeDistribution:
    """Common interface of a buyer type distribution on ``[support_lo, support_hi]``.

    Subclasses provide ``cdf``, ``pdf`` and (optionally) closed-form
    ``quantile`` / ``inverse_virtual_value``. All methods accept scalars or
    numpy arrays.
    """

    support_lo: float
    support_hi: float

    def cdf(self, v):
        raise NotImplementedError

    def pdf(self, v):
        raise NotImplementedError

    @property
    def upper(self) -> float:
        """Finite upper end used for quadrature and grids."""
        if math.isfinite(self.support_hi):
            return self.support_hi
        return float(self.quantile(1.0 - TAIL_MASS))

    def quantile(self, q):
        q = _check_probability(q)
        hi = self.support_hi if math.isfinite(self.support_hi) else self._bracket_hi()
        out = np.array(
            [_bisect_increasing(self.cdf, qi, self.support_lo, hi) for qi in np.ravel(q)]
        )
        return _like(q, out)

    def _bracket_hi(self) -> float:
        hi = max(1.0, abs(self.support_lo)) + self.support_lo
        while self.cdf(hi) < 1.0 - TAIL_MASS:
            hi = self.support_lo + 2.0 * (hi - self.support_lo)
        return hi

    def virtual_value(self, v):
        v = np.asarray(v, dtype=float)
        dens = self.pdf(v)
        if np.any(dens <= 0.0):
            raise ValueError("virtual value undefined where the density vanishes")
        return _like(v, v - (1.0 - self.cdf(v)) / dens)

    def interior_grid(self, n: int) -> np.ndarray:
        """``n`` points strictly inside the (truncated) support, equally spaced."""
        lo, hi = self.support_lo, self.upper
        pad = (hi - lo) * 1e-6
        return np.linspace(lo + pad, hi - pad, n)

    def check_regularity(self, grid_points: int = 1000) -> bool:
        if grid_points < 2:
            raise ValueError("grid_points must be at least 2")
        phi = self.virtual_value(self.interior_grid(grid_points))
        return bool(np.all(np.diff(phi) >= -1e-12))

    @cached_property
    def is_regular(self) -> bool:
        return self.check_regularity(1000)

    def inverse_virtual_value(self, x):
        """Smallest type whose virtual value reaches ``x``, saturating at the support ends."""
        if not self.is_regular:
            raise NotRegularError(f"{self!r} has a decreasing virtual value")
        x = np.asarray(x, dtype=float)
        lo, hi = self.support_lo, self.upper
        pad = (hi - lo) * 1e-9
        a, b = lo + pad, hi - pad
        phi_a, phi_b = float(self.virtual_value(a)), float(self.virtual_value(b))
        out = np.empty(x.size)
        for k, xi in enumerate(np.ravel(x)):
            if xi <= phi_a:
                out[k] = lo
            elif xi >= phi_b:
                out[k] = hi
            else:
                out[k] = _bisect_increasing(self.virtual_value, xi, a, b)
        return _like(x, out)


@dataclass(frozen=True)
class Exponential(TypeDistribution):
    rate: float = 1.0

    def __post_init__(self):
        if not self.rate > 0:
            raise ValueError("rate must be positive")

    support_lo = 0.0
    support_hi = math.inf

    def cdf(self, v):
        v = np.asarray(v, dtype=float)
        return _like(v, -np.expm1(-self.rate * np.maximum(v, 0.0)))

    def pdf(self, v):
        v = np.asarray(v, dtype=float)
        return _like(v, np.where(v >= 0.0, self.rate * np.exp(-self.rate * np.maximum(v, 0.0)), 0.0))

    def quantile(self, q):
        q = _check_probability(q)
        with np.errstate(divide="ignore"):
            out = -np.log1p(-q) / self.rate
        return _like(q, np.minimum(out, -math.log(TAIL_MASS) / self.rate))

    @property
    def upper(self) -> float:
        return -math.log(TAIL_MASS) / self.rate

    def virtual_value(self, v):
        v = np.asarray(v, dtype=float)
        if np.any(v < 0.0):
            raise ValueError("virtual value undefined where the density vanishes")
        return _like(v, v - 1.0 / self.rate)

    is_regular = True

    def inverse_virtual_value(self, x):
        x = np.asarray(x, dtype=float)
        return _like(x, np.clip(x + 1.0 / self.rate, 0.0, self.upper))


@dataclass(frozen=True)
class Uniform(TypeDistribution):
    lo: float = 0.0
    hi: float = 1.0

    def __post_init__(self):
        if not self.hi > self.lo:
            raise ValueError("uniform requires lo < hi")

    @property
    def support_lo(self) -> float:
        return self.lo

    @property
    def support_hi(self) -> float:
        return self.hi

    def cdf(self, v):
        v = np.asarray(v, dtype=float)
        return _like(v, np.clip((v - self.lo) / (self.hi - self.lo), 0.0, 1.0))

    def pdf(self, v):
        v = np.asarray(v, dtype=float)
        inside = (v >= self.lo) & (v <= self.hi)
        return _like(v, np.where(inside, 1.0 / (self.hi - self.lo), 0.0))

    def quantile(self, q):
        q = _check_probability(q)
        return _like(q, self.lo + q * (self.hi - self.lo))

    def virtual_value(self, v):
        v = np.asarray(v, dtype=float)
        if np.any((v < self.lo) | (v > self.hi)):
            raise ValueError("virtual value undefined where the density vanishes")
        return _like(v, 2.0 * v - self.hi)

    is_regular = True

    def inverse_virtual_value(self, x):
        x = np.asarray(x, dtype=float)
        return _like(x, np.clip((x + self.hi) / 2.0, self.lo, self.hi))


class Tabulated(TypeDistribution):
    """Distribution given by a piecewise-linear CDF through ``(knots, probs)``.

    The density is piecewise constant, so the virtual value may decrease; this
    variant exists mainly to build irregular distributions for tests.
    """

    def __init__(self, knots, probs):
        knots = np.asarray(knots, dtype=float)
        probs = np.asarray(probs, dtype=float)
        if knots.ndim != 1 or knots.shape != probs.shape or knots.size < 2:
            raise ValueError("knots and probs must be 1-D arrays of equal length >= 2")
        if np.any(np.diff(knots) <= 0) or np.any(np.diff(probs) <= 0):
            raise ValueError("knots and probs must be strictly increasing")
        if probs[0] != 0.0 or probs[-1] != 1.0:
            raise ValueError("probs must run from 0 to 1")
        self.knots = knots
        self.probs = probs
        self.support_lo = float(knots[0])
        self.support_hi = float(knots[-1])

    def __repr__(self):
        return f"Tabulated(n_knots={self.knots.size})"

    def cdf(self, v):
        v = np.asarray(v, dtype=float)
        return _like(v, np.interp(v, self.knots, self.probs))

    def pdf(self, v):
        v = np.asarray(v, dtype=float)
        slopes = np.diff(self.probs) / np.diff(self.knots)
        idx = np.clip(np.searchsorted(self.knots, v, side="right") - 1, 0, slopes.size - 1)
        inside = (v >= self.knots[0]) & (v <= self.knots[-1])
        return _like(v, np.where(inside, slopes[idx], 0.0))


_DIST_PATTERN = re.compile(r"^(exp|uniform):(.+)$")


def parse_distribution(text: str) -> TypeDistribution:
    """Parse ``exp:RATE`` or ``uniform:LO,HI``."""
    m = _DIST_PATTERN.match(text.strip())
    if not m:
        raise ValueError(f"unrecognised distribution {text!r}; use exp:RATE or uniform:LO,HI")
    kind, args = m.groups()
    try:
        params = [float(a) for a in args.split(",")]
    except ValueError:
        raise ValueError(f"bad numeric parameters in {text!r}") from None
    if kind == "exp":
        if len(params) != 1:
            raise ValueError("exp takes one parameter: exp:RATE")
        return Exponential(params[0])
    if len(params) != 2:
        raise ValueError("uniform takes two parameters: uniform:LO,HI")
    return Uniform(*params)


def _check_probability(q):
    q = np.asarray(q, dtype=float)
    if np.any((q < 0.0) | (q > 1.0)) or np.any(np.isnan(q)):
        raise ValueError("probability outside [0, 1]")
    return q


def _bisect_increasing(func, target, lo, hi):
    """Solve ``func(x) = target`` for non-decreasing ``func`` on ``[lo, hi]``."""
    f_lo = float(func(lo)) - target
    f_hi = float(func(hi)) - target
    if f_lo >= 0.0:
        return lo
    if f_hi <= 0.0:
        return hi
    return optimize.bisect(lambda x: float(func(x)) - target, lo, hi, xtol=BISECT_XTOL)


def _like(ref, values):
    """Return a Python float when ``ref`` is a scalar, else an array."""
    if np.ndim(ref) == 0:
        return float(np.asarray(values).reshape(()))
    return np.asarray(values, dtype=float)
