"""Command-line front end.

Exit codes: 0 on success (per-row infeasibility included), 2 for a bad
configuration, 3 for a numerical failure.
"""

from __future__ import annotations

import argparse
import logging
import sys

import numpy as np

from .errors import BindingRegimeError, InfeasibleRateError
from .models import p_cons
from .oracle import GRID_MAX_N, STRUCTURED_MAX_N, oracle_grid, oracle_structured
from .scenario import ScenarioError, parse_scenario
from .single_user import (
    allocate_asymptotic,
    allocate_exact,
    allocate_rush_to_sleep,
    allocate_uniform,
    r_max,
)
from .sleep_sched import allocate_successive
from .sweep import fmt, run_sweep
from .tdma import tdma_allocate_linear, tdma_uniform_benchmark

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 2, 3


def _load(path):
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ScenarioError(f"cannot read {path}: {exc.strerror}") from None
    return parse_scenario(text)


def cmd_sweep(args) -> int:
    sc = _load(args.config)
    out = run_sweep(sc)
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(out.csv)
    else:
        sys.stdout.write(out.csv)
    sys.stderr.write(out.summary)
    return EXIT_OK


def _point_lines(sc, rate):
    am, sm, smc = sc.active_model(), sc.sleep_model(), sc.constant_sleep_model()
    lp = sc.link(rate)
    t = sc.symbol_duration_s

    def line(name, p, extra=""):
        ee = rate / (t * p) / 1e3 if p > 0 else 0.0
        return f"{name:<11} p_cons = {fmt(p)} W  ee = {fmt(ee)} kbit/J{extra}"

    out = [f"R = {fmt(rate)} bits/cu, se = {fmt(rate / (1 + sc.rolloff))} bit/s/Hz"]
    for name in sc.solvers:
        try:
            if name == "exact":
                a = allocate_exact(am, smc, lp)
                out.append(line(name, p_cons(am, smc, lp, a), f"  n_active = {a.n_active}"))
            elif name == "asymptotic":
                r = allocate_asymptotic(am, smc, lp)
                out.append(line(name, r.p_cons, f"  regime = {r.report.regime.value}"
                                f"  n_active = {r.allocation.n_active}"))
            elif name == "uniform":
                out.append(line(name, allocate_uniform(am, smc, lp).p_cons))
            elif name == "rush":
                r = allocate_rush_to_sleep(am, smc, lp)
                out.append(line(name, r.p_cons, f"  asymptotic = {fmt(r.p_cons_asymptotic)} W"))
            elif name == "successive":
                r = allocate_successive(am, sm, lp)
                out.append(line(name, r.p_cons, f"  mode = {r.mode}"
                                f"  n_active = {r.allocation.n_active}"))
            elif name == "tdma":
                users = sc.tdma_users(rate)
                try:
                    r = tdma_allocate_linear(users, am, smc, lp)
                    out.append(f"tdma        p_cons = {fmt(r.p_cons)} W  slots = {list(r.n_slots)}")
                except BindingRegimeError as exc:
                    out.append(f"tdma        binding regime ({exc})")
                out.append(f"tdma_unif   p_cons = {fmt(tdma_uniform_benchmark(users, am, lp))} W")
        except InfeasibleRateError as exc:
            out.append(f"{name:<11} INFEASIBLE ({exc})")
    return out


def cmd_point(args) -> int:
    sc = _load(args.config)
    if args.rate < 0:
        raise ScenarioError("--rate must be non-negative")
    print("\n".join(_point_lines(sc, args.rate)))
    return EXIT_OK


def cmd_verify(args) -> int:
    sc = _load(args.config)
    n = sc.n_slots
    if n > STRUCTURED_MAX_N:
        raise ScenarioError(f"verify needs n_slots <= {STRUCTURED_MAX_N}, got {n}")
    am, smc = sc.active_model(), sc.constant_sleep_model()
    rm = r_max(am.p_max, sc.sigma2_w)
    rates = np.linspace(0.0, rm, args.points)

    worst, at = 0.0, 0.0
    worst_grid = None
    for rate in rates:
        lp = sc.link(float(rate))
        exact = p_cons(am, smc, lp, allocate_exact(am, smc, lp))
        best = oracle_structured(am, smc, lp).best_p_cons
        gap = (exact - best) / best
        if gap > worst:
            worst, at = gap, float(rate)
        if n <= GRID_MAX_N:
            g = oracle_grid(am, smc, lp, args.grid_points)
            d = g.best_p_cons - best
            if worst_grid is None or d > worst_grid[0]:
                worst_grid = (d, g.resolution, float(rate))
    print(f"rate points = {len(rates)} on [0, {fmt(rm)}]")
    print(f"worst exact vs structured oracle gap = {fmt(100 * worst)} % at R = {fmt(at)}")
    if worst_grid is not None:
        d, res, r = worst_grid
        print(f"worst grid - structured = {fmt(d)} W at R = {fmt(r)} "
              f"(grid resolution {fmt(res)} W, {args.grid_points} points)")
    else:
        print(f"grid oracle skipped (needs n_slots <= {GRID_MAX_N})")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="leanslot",
        description="Minimum-energy slot activation and power allocation sweeps.",
    )
    p.add_argument("-v", "--verbose", action="store_true", help="log warnings and progress")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("sweep", help="run the scenario's sweep and write CSV")
    s.add_argument("config")
    s.add_argument("--out", help="CSV file (default: stdout)")
    s.set_defaults(func=cmd_sweep)

    s = sub.add_parser("point", help="evaluate every selected solver at one rate")
    s.add_argument("config")
    s.add_argument("--rate", type=float, required=True, help="bits per channel use")
    s.set_defaults(func=cmd_point)

    s = sub.add_parser("verify", help="compare the exact solver with the oracles")
    s.add_argument("config")
    s.add_argument("--points", type=int, default=30, help="rate points (default 30)")
    s.add_argument("--grid-points", type=int, default=500, help="grid oracle points per axis")
    s.set_defaults(func=cmd_verify)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s: %(message)s",
    )
    try:
        return args.func(args)
    except ScenarioError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ArithmeticError, FloatingPointError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
