"""Brute-force oracles on a discretised type space.

Types are replaced by ``m`` equal-probability nodes, so every conditional
expectation becomes a plain average and the obedience-constrained problem
splits into one small knapsack per own-type node.
"""
from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from .game import GameSpec
from .mechanism import MarginalRule, conditional_correct, conditional_other_correct

OBEDIENCE_TOL = 1e-9
#: regret attributed to floating-point round-off rather than a real deviation
REGRET_TOL = 1e-8
MAX_GRID = 201

#: deviation maps applied to the recommended action
DEVIATIONS = ("identity", "swap", "constant-0", "constant-1")


@dataclass(frozen=True)
class DiscreteInstance:
    """Discretised mechanism.

    ``h1[k, l]`` and ``h2[k, l]`` are the marginals at player-1 type
    ``types[k]`` and player-2 type ``types[l]``. ``own_correct[i-1]`` and
    ``other_correct[i-1]``, when set, override the grid averages of
    ``E[h_i | V_i]`` and ``E[h_j | V_i]`` (e.g. with exact continuum values).
    """

    types: np.ndarray
    weights: np.ndarray
    prior_theta1: float
    alpha: float
    h1: np.ndarray
    h2: np.ndarray
    own_correct: Optional[np.ndarray] = None
    other_correct: Optional[np.ndarray] = None

    def __post_init__(self):
        m = self.types.size
        if abs(self.weights.sum() - 1.0) > 1e-12:
            raise ValueError("node weights must sum to one")
        for h in (self.h1, self.h2):
            if h.shape != (m, m):
                raise ValueError(f"marginal matrices must be {m}x{m}")
            if np.any((h < 0.0) | (h > 1.0)):
                raise ValueError("marginal entries must lie in [0, 1]")

    @property
    def p_max(self) -> float:
        return max(self.prior_theta1, 1.0 - self.prior_theta1)

    @property
    def size(self) -> int:
        return self.types.size

    @classmethod
    def from_game(cls, g: GameSpec, m: int, rule: Optional[MarginalRule] = None,
                  projection: str = "cell", exact: bool = False) -> "DiscreteInstance":
        """Quantile-midpoint nodes of ``g.dist`` with marginals taken from ``rule``.

        ``projection="node"`` samples the rule at the nodes. ``"cell"`` treats
        each node as its equal-probability cell and stores, for every own-type
        node, the share of the opponent's cell on which the rule recommends the
        state; threshold rules then keep their exact obedience mass on the grid.
        With ``exact=True`` the conditional probabilities at each node are
        computed by continuum quadrature instead of grid averages.
        """
        if not 2 <= m <= MAX_GRID:
            raise ValueError(f"grid size must lie in [2, {MAX_GRID}]")
        types = np.asarray(g.dist.quantile((np.arange(m) + 0.5) / m), dtype=float)
        weights = np.full(m, 1.0 / m)
        if rule is None:
            h1 = h2 = np.zeros((m, m))
        elif projection == "node":
            v1, v2 = np.meshgrid(types, types, indexing="ij")
            h1 = np.asarray(rule.h1(v1, v2), dtype=float).reshape(m, m)
            h2 = np.asarray(rule.h2(v1, v2), dtype=float).reshape(m, m)
        elif projection == "cell":
            h1 = _cell_projection(rule, g, types, 1)
            h2 = _cell_projection(rule, g, types, 2).T
        else:
            raise ValueError(f"unknown projection {projection!r}")
        inst = cls(types, weights, g.prior_theta1, g.alpha, h1, h2)
        if exact:
            if rule is None:
                raise ValueError("exact conditionals need a rule")
            own = np.array([[conditional_correct(rule, g, i, v) for v in types] for i in (1, 2)])
            other = np.array([[conditional_other_correct(rule, g, i, v) for v in types]
                              for i in (1, 2)])
            inst = replace(inst, own_correct=own, other_correct=other)
        return inst

    def conditionals(self, player: int):
        """``(E[h_i | V_i = node], E[h_j | V_i = node])`` for ``player`` i."""
        if self.own_correct is not None:
            return self.own_correct[player - 1], self.other_correct[player - 1]
        f = self.weights
        if player == 1:
            return self.h1 @ f, self.h2 @ f
        return f @ self.h2, f @ self.h1

    def interim_share(self, player: int) -> np.ndarray:
        own, other = self.conditionals(player)
        return own - self.alpha * other


def _cell_projection(rule: MarginalRule, g: GameSpec, types: np.ndarray, player: int,
                     sub: int = 32) -> np.ndarray:
    """``[own node, opponent cell]`` share of the cell where ``h_player`` is one."""
    m = types.size
    cells = np.arange(m)
    if rule.thresholds is not None:
        mass = np.asarray(g.dist.cdf(rule.thresholds.cutoff(player)(types)), dtype=float)
        return np.clip(m * mass[:, None] - cells[None, :], 0.0, 1.0)
    # generic rules: average over sub-quantiles of each opponent cell
    q = (cells[:, None] + (np.arange(sub)[None, :] + 0.5) / sub) / m
    opp = np.asarray(g.dist.quantile(q.ravel()), dtype=float)
    own = np.repeat(types, opp.size)
    vals = rule.own(player, own, np.tile(opp, m)).reshape(m, m, sub)
    return vals.mean(axis=2)


def _weight_matrices(inst: DiscreteInstance, weights):
    v1, v2 = np.meshgrid(inst.types, inst.types, indexing="ij")
    return np.asarray(weights.w1(v1, v2), dtype=float), np.asarray(weights.w2(v1, v2), dtype=float)


def grid_objective(inst: DiscreteInstance, weights) -> float:
    """``E[w1 h1 + w2 h2]`` under the product grid measure."""
    w1, w2 = _weight_matrices(inst, weights)
    f = inst.weights
    return float(f @ (w1 * inst.h1 + w2 * inst.h2) @ f)


def _solve_rows(w: np.ndarray, f: np.ndarray, mu: float) -> np.ndarray:
    """Row-wise ``max sum_l h w f`` s.t. ``sum_l h f >= mu``, ``0 <= h <= 1``.

    Take every cell with non-negative weight, then top up the mass with the
    least negative cells; at most one cell per row ends up fractional.
    """
    h = (w >= 0.0).astype(float)
    order = np.argsort(-w, axis=1, kind="stable")
    for k in range(w.shape[0]):
        need = mu - float(h[k] @ f)
        for l in order[k]:
            if need <= 1e-15:
                break
            if h[k, l] == 1.0:
                continue
            take = min(1.0, need / f[l])
            h[k, l] = take
            need -= take * f[l]
    return h


def grid_optimize(inst: DiscreteInstance, weights):
    """Optimal obedient marginals on the grid for the objective ``weights``.

    Returns ``(instance, objective)``; the instance carries the optimal matrices.
    """
    mu = inst.p_max
    if mu > 1.0:
        raise ValueError("obedience target above one is infeasible")
    w1, w2 = _weight_matrices(inst, weights)
    f = inst.weights
    h1 = _solve_rows(w1, f, mu)
    h2 = _solve_rows(w2.T, f, mu).T
    out = replace(inst, h1=h1, h2=h2, own_correct=None, other_correct=None)
    return out, grid_objective(out, weights)


@dataclass(frozen=True)
class DeviationReport:
    max_regret: float
    player: int
    true_type: float
    reported_type: float
    deviation: str

    def __bool__(self):
        return self.max_regret <= REGRET_TOL


def _regrets(inst: DiscreteInstance, payments, player: int, deviations=DEVIATIONS):
    """Array ``[t, r, d]`` of gains from reporting node ``r`` and applying map ``d``."""
    v = inst.types
    own, other = inst.conditionals(player)
    pay = np.asarray(payments(v), dtype=float)
    p0 = 1.0 - inst.prior_theta1
    correct = {
        "identity": own,
        "swap": 1.0 - own,
        "constant-0": np.full_like(own, p0),
        "constant-1": np.full_like(own, 1.0 - p0),
    }
    truthful = v * (own - inst.alpha * other) - pay
    gains = np.stack(
        [v[:, None] * (correct[d] - inst.alpha * other)[None, :] - pay[None, :]
         for d in deviations], axis=-1)
    return gains - truthful[:, None, None]


def search_double_deviations(inst: DiscreteInstance, payments,
                             deviations=DEVIATIONS) -> DeviationReport:
    """Exhaustive search over misreports combined with every action remapping."""
    best = None
    for player in (1, 2):
        r = _regrets(inst, payments, player, deviations)
        t, rep, d = np.unravel_index(int(np.argmax(r)), r.shape)
        cand = DeviationReport(float(r[t, rep, d]), player, float(inst.types[t]),
                               float(inst.types[rep]), deviations[d])
        if best is None or cand.max_regret > best.max_regret:
            best = cand
    return best


def check_truthfulness_discrete(inst: DiscreteInstance, payments, tol: float = REGRET_TOL) -> bool:
    return search_double_deviations(inst, payments, ("identity",)).max_regret <= tol


def check_obedience_discrete(inst: DiscreteInstance, tol: float = OBEDIENCE_TOL) -> bool:
    return all(np.all(inst.conditionals(i)[0] >= inst.p_max - tol) for i in (1, 2))


def is_step_shaped(row: np.ndarray) -> bool:
    """Non-increasing 0/1 row with at most one fractional entry."""
    frac = np.sum((row > 1e-12) & (row < 1.0 - 1e-12))
    return bool(frac <= 1 and np.all(np.diff(row) <= 1e-12))
