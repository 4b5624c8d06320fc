"""Command-line front end: solve, curves, sweep-alpha and verify."""
from __future__ import annotations

import argparse
import csv
import io
import sys
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .distributions import NotRegularError, parse_distribution
from .game import GameSpec
from .mechanism import RuleKind, closed_form_interim_share, is_obedient
from .optimal import (boundary_type, distorted_type_mass, first_best_revenue_rule,
                      first_best_welfare_rule, revenue_rule, virtual_value_weights, welfare_rule,
                      welfare_weights, zero_virtual_type)
from .payments import (PaymentSchedule, RevenueConsistencyError, check_individual_rationality,
                       closed_form_welfare, expected_revenue, first_best_welfare,
                       optimal_revenue, payment_schedule)
from .verify import DiscreteInstance, grid_objective, grid_optimize, search_double_deviations

MIN_GRID = 11
COMMANDS = ("solve", "curves", "sweep-alpha", "verify")


@dataclass(frozen=True)
class ExperimentConfig:
    command: str
    dist: str = "exp:1"
    prior: float = 0.5
    alphas: tuple = ("0.5",)
    objective: str = "revenue"
    grid: int = 41
    out: Optional[str] = None
    tamper: Optional[str] = None
    vmax: Optional[float] = None

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise ValueError(f"unknown command {self.command!r}")
        if not self.alphas:
            raise ValueError("alpha list must not be empty")
        if any(a < 0 for a in self.alpha_values):
            raise ValueError("alpha values must be non-negative")
        if self.grid < MIN_GRID:
            raise ValueError(f"grid must be at least {MIN_GRID}")
        if self.objective not in ("welfare", "revenue", "both"):
            raise ValueError(f"unknown objective {self.objective!r}")

    @property
    def alpha_values(self) -> list:
        return [float(a) for a in self.alphas]

    def game(self, alpha: float) -> GameSpec:
        return GameSpec(alpha, self.prior, parse_distribution(self.dist))


def _write_csv(cfg: ExperimentConfig, header, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([repr(float(x)) for x in row])
    text = buf.getvalue()
    if cfg.out:
        with open(cfg.out, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return text


def _kinds(objective: str):
    if objective == "both":
        return [RuleKind.WELFARE, RuleKind.REVENUE]
    return [RuleKind(objective)]


def cmd_solve(cfg: ExperimentConfig) -> int:
    if len(cfg.alphas) != 1:
        raise ValueError("solve takes a single alpha")
    g = cfg.game(cfg.alpha_values[0])
    dist = g.dist
    print(f"dist={cfg.dist} prior={cfg.prior} alpha={cfg.alphas[0]}")
    print(f"p_max={g.p_max!r} outside_option={g.outside_option!r}")
    print(f"v_star={g.v_star!r}")
    if dist.is_regular:
        v0 = zero_virtual_type(dist)
        print(f"v_zero={v0!r}")
        print(f"v_tilde={boundary_type(g)!r}")
        print("regime: v* >= v0" if g.v_star >= v0 else "regime: v* < v0")
    if g.alpha == 0:
        print("cutoffs saturated: every type is told the state")
    for kind in _kinds(cfg.objective):
        if kind is RuleKind.REVENUE and not dist.is_regular:
            raise NotRegularError("revenue objective needs a regular distribution")
        print(f"[{kind.value}] welfare={closed_form_welfare(g, kind)!r}")
        if kind is RuleKind.REVENUE:
            print(f"[{kind.value}] revenue={optimal_revenue(g)!r}")
        else:
            mass = distorted_type_mass(g, welfare_rule(g), first_best_welfare_rule(g))
            print(f"[{kind.value}] distorted_type_mass={mass!r}")
    return 0


def cmd_curves(cfg: ExperimentConfig) -> int:
    if cfg.objective != "revenue":
        raise ValueError("curves are drawn for the revenue objective")
    games = [cfg.game(a) for a in cfg.alpha_values]
    dist = games[0].dist
    if not dist.is_regular:
        raise NotRegularError("revenue objective needs a regular distribution")
    top = cfg.vmax if cfg.vmax is not None else float(dist.quantile(0.99))
    values = np.linspace(dist.support_lo, top, cfg.grid)
    shares = [closed_form_interim_share(RuleKind.REVENUE, g, values) for g in games]
    pays = [payment_schedule(g, RuleKind.REVENUE)(values) for g in games]
    header = (["value"] + [f"share{a}" for a in cfg.alphas] + [f"pay{a}" for a in cfg.alphas])
    rows = np.column_stack([values] + shares + pays)
    _write_csv(cfg, header, rows)
    return 0


def cmd_sweep_alpha(cfg: ExperimentConfig) -> int:
    rows = []
    for a in cfg.alpha_values:
        g = cfg.game(a)
        rows.append([a, first_best_welfare(g), closed_form_welfare(g, RuleKind.WELFARE),
                     optimal_revenue(g)])
    _write_csv(cfg, ["alpha", "firstbest", "secondbest", "revenue"], rows)
    return 0


def _verify_game(g: GameSpec, m: int, tamper: Optional[str]):
    """Yield ``(check, ok, value, detail)`` tuples for one game."""
    rules = {RuleKind.WELFARE: welfare_rule(g), RuleKind.REVENUE: revenue_rule(g)}
    weights = {RuleKind.WELFARE: welfare_weights(g), RuleKind.REVENUE: virtual_value_weights(g)}
    for kind, rule in rules.items():
        tag = kind.value
        rep = is_obedient(rule, g, grid=100)
        yield f"obedience/{tag}", rep.ok, rep.worst_margin, f"player={rep.worst_player} type={rep.worst_type!r}"

        share = closed_form_interim_share(kind, g, g.dist.interior_grid(1000))
        drop = float(max(0.0, -np.min(np.diff(share))))
        yield f"monotone/{tag}", drop <= 1e-12, drop, ""

        pay = payment_schedule(g, kind)
        if tamper == "zero-payments":
            pay = PaymentSchedule(lambda v: np.zeros_like(np.asarray(v, dtype=float)), 0.0,
                                  pay.share, pay.rule_kind, pay.kinks)
        inst = DiscreteInstance.from_game(g, m, rule, exact=True)
        dev = search_double_deviations(inst, pay)
        yield (f"incentive/{tag}", dev.max_regret <= 1e-8, dev.max_regret,
               f"player={dev.player} type={dev.true_type!r} report={dev.reported_type!r} "
               f"map={dev.deviation}")

        ir = check_individual_rationality(g, pay.share, pay)
        yield f"participation/{tag}", ir.ok, ir.worst_slack, f"type={ir.worst_type!r}"

        try:
            report = expected_revenue(g, pay)
            yield f"revenue-identity/{tag}", True, report.relative_gap, ""
        except RevenueConsistencyError as err:
            yield f"revenue-identity/{tag}", False, float("nan"), str(err)

        cell = DiscreteInstance.from_game(g, m, rule)
        closed = grid_objective(cell, weights[kind])
        _, best = grid_optimize(cell, weights[kind])
        gap = abs(best - closed) / max(abs(closed), 1e-12)
        yield f"grid-gap/{tag}", gap <= 1e-3 or m < 101, gap, f"grid={m}"
    fb = first_best_revenue_rule(g)
    margin = is_obedient(fb, g, grid=100).worst_margin
    yield "first-best-disobedient/revenue", margin < 0 or g.alpha == 0, margin, ""


def cmd_verify(cfg: ExperimentConfig) -> int:
    worst = None
    failures = 0
    for a_text, a in zip(cfg.alphas, cfg.alpha_values):
        g = cfg.game(a)
        for check, ok, value, detail in _verify_game(g, cfg.grid, cfg.tamper):
            status = "PASS" if ok else "FAIL"
            print(f"{status} alpha={a_text} prior={cfg.prior} check={check} value={value!r} {detail}".rstrip())
            if not ok:
                failures += 1
                if worst is None:
                    worst = (check, a_text, value, detail)
    print(f"summary: {failures} failed")
    if failures:
        check, a_text, value, detail = worst
        print(f"worst: check={check} alpha={a_text} value={value!r} {detail}".rstrip(),
              file=sys.stderr)
        return 1
    return 0


HANDLERS = {"solve": cmd_solve, "curves": cmd_curves, "sweep-alpha": cmd_sweep_alpha,
            "verify": cmd_verify}

DEFAULT_ALPHAS = {"solve": "0.5", "curves": "0.5,1,1.5", "verify": "0.5,1,1.5",
                  "sweep-alpha": ",".join(f"{k / 10:g}" for k in range(1, 16))}
DEFAULT_OBJECTIVE = {"solve": "revenue", "curves": "revenue", "sweep-alpha": "both",
                     "verify": "both"}
DEFAULT_GRID = {"solve": 41, "curves": 301, "sweep-alpha": 41, "verify": 41}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="infomech", description="Optimal obedient recommendation mechanisms.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--dist", default="exp:1", help="exp:RATE or uniform:LO,HI")
        p.add_argument("--prior", type=float, default=0.5, help="P[theta = 1]")
        p.add_argument("--alpha", default=None, help="comma-separated competition levels")
        p.add_argument("--objective", choices=("welfare", "revenue", "both"), default=None)
        p.add_argument("--grid", type=int, default=None, help="grid points per axis")
        p.add_argument("--out", default=None, help="CSV output path (default stdout)")
        if name == "curves":
            p.add_argument("--vmax", type=float, default=None, help="largest type plotted")
        if name == "verify":
            p.add_argument("--tamper", choices=("zero-payments",), default=None,
                           help="inject a fault (testing only)")
    return parser


def config_from_args(args) -> ExperimentConfig:
    cmd = args.command
    alpha_text = args.alpha if args.alpha is not None else DEFAULT_ALPHAS[cmd]
    alphas = tuple(a.strip() for a in alpha_text.split(",") if a.strip())
    return ExperimentConfig(
        command=cmd, dist=args.dist, prior=args.prior, alphas=alphas,
        objective=args.objective or DEFAULT_OBJECTIVE[cmd],
        grid=args.grid if args.grid is not None else DEFAULT_GRID[cmd],
        out=args.out, tamper=getattr(args, "tamper", None), vmax=getattr(args, "vmax", None))


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = config_from_args(args)
        return HANDLERS[cfg.command](cfg)
    except ValueError as err:
        # NotRegularError is a ValueError
        print(f"error: {err}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
