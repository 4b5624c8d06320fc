"""The two-buyer binary product-choice game.

Each buyer picks an action in {0, 1}; matching the binary state earns a unit
market share while a correct rival costs ``alpha`` of it.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

from .distributions import Exponential, TypeDistribution


class ActionProfile(NamedTuple):
    a1: int
    a2: int


@dataclass(frozen=True)
class GameSpec:
    """Competition intensity, state prior and the buyers' common type distribution.

    ``prior_theta1`` is P[theta = 1]. Derived quantities (``p_max``, ``v_star``)
    are recomputed on access so they can never disagree with the inputs.
    """

    alpha: float
    prior_theta1: float = 0.5
    dist: TypeDistribution = Exponential(1.0)

    def __post_init__(self):
        if not self.alpha >= 0:
            raise ValueError(f"alpha must be non-negative, got {self.alpha}")
        if not 0.0 < self.prior_theta1 < 1.0:
            raise ValueError(f"prior must lie strictly inside (0, 1), got {self.prior_theta1}")

    @property
    def p_max(self) -> float:
        """Probability of the ex-ante most likely state."""
        return max(self.prior_theta1, 1.0 - self.prior_theta1)

    def state_prob(self, theta: int) -> float:
        return self.prior_theta1 if theta == 1 else 1.0 - self.prior_theta1

    @property
    def v_star(self) -> float:
        return obedience_threshold(self)

    @property
    def outside_option(self) -> float:
        return outside_option_share(self)


def _check_player(player: int) -> None:
    if player not in (1, 2):
        raise ValueError(f"player must be 1 or 2, got {player}")


def market_share(g: GameSpec, player: int, a: ActionProfile, theta: int) -> float:
    _check_player(player)
    a_own, a_other = (a[0], a[1]) if player == 1 else (a[1], a[0])
    return float(a_own == theta) - g.alpha * float(a_other == theta)


def utility(g: GameSpec, player: int, v: float, a: ActionProfile, theta: int) -> float:
    return v * market_share(g, player, a, theta)


def obedience_threshold(g: GameSpec) -> float:
    """Type ``v*`` at which the opponent's type mass below equals ``p_max``."""
    return g.dist.quantile(g.p_max)


def outside_option_share(g: GameSpec) -> float:
    """Interim share of a non-participant whose rival always learns the state."""
    return g.p_max - g.alpha
