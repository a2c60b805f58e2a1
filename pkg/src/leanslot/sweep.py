"""Parameter sweeps over a scenario, emitted as CSV plus a short summary."""

from __future__ import annotations

import csv
import io
import logging
import math
import os
from concurrent.futures import ThreadPoolExecutor
from typing import NamedTuple

import numpy as np

from .errors import BindingRegimeError, InfeasibleRateError
from .models import p_cons
from .scenario import Scenario, with_warning
from .single_user import (
    allocate_asymptotic,
    allocate_exact,
    allocate_rush_to_sleep,
    allocate_uniform,
    r_max,
    regime_report,
)
from .sleep_sched import allocate_successive
from .tdma import TdmaUser, tdma_allocate_linear, tdma_uniform_benchmark, user_constants
from .tradeoff import max_ee

log = logging.getLogger(__name__)

COLUMNS = (
    "R", "se", "regime", "n_active",
    "p_cons_exact", "p_cons_asymptotic", "p_cons_uniform", "p_cons_rush",
    "p_cons_successive", "ee",
)
TDMA_COLUMNS = ("p_cons_tdma", "p_cons_tdma_uniform")
INFEASIBLE = "INFEASIBLE"
# Solver whose slot count and EE fill the shared columns, in priority order.
_PRIMARY = ("exact", "successive", "asymptotic", "rush", "uniform", "tdma")


def fmt(v: float) -> str:
    return f"{v:.6g}"


def columns(sc: Scenario) -> tuple[str, ...]:
    return COLUMNS + (TDMA_COLUMNS if "tdma" in sc.solvers else ())


def sweep_limit(sc: Scenario) -> float:
    """Largest feasible value of the sweep variable."""
    am = sc.active_model()
    if sc.sweep_var == "rate":
        return r_max(am.p_max, sc.sigma2_w)
    if sc.sweep_var == "se":
        return r_max(am.p_max, sc.sigma2_w) / (1.0 + sc.rolloff)
    # rate_pair: user k runs at x * w_k and needs a share x w_k / R_k,max.
    load = sum(w / r_max(am.p_max, s2) for s2, w in sc.users)
    return math.inf if load == 0 else 1.0 / load


def sweep_values(sc: Scenario) -> tuple[np.ndarray, Scenario]:
    """Sweep grid, clipped to feasibility; clipping is noted in ``warnings``."""
    limit = sweep_limit(sc)
    lo = sc.sweep_lo
    hi = limit if sc.sweep_hi is None else sc.sweep_hi
    if math.isinf(hi):
        raise ValueError("sweep_hi is needed when every user weight is zero")
    if hi > limit * (1.0 + 1e-12):
        sc = with_warning(sc, f"sweep_hi {hi:.6g} clipped to feasibility limit {limit:.6g}")
        hi = limit
    if lo > hi:
        sc = with_warning(sc, f"sweep_lo {lo:.6g} clipped to {hi:.6g}")
        lo = hi
    for w in sc.warnings:
        log.warning(w)
    return np.linspace(lo, hi, sc.sweep_points), sc


class _Models(NamedTuple):
    am: object
    sm: object
    sm_const: object


def _rate_of(sc: Scenario, x: float) -> float:
    return x * (1.0 + sc.rolloff) if sc.sweep_var == "se" else x


def _single_user_cells(sc, m, rate):
    """Consumption, slot count and regime for each selected single-user solver."""
    lp = sc.link(rate)
    out = {}
    solvers = {
        "exact": lambda: _exact(m, lp),
        "asymptotic": lambda: _asym(m, lp),
        "uniform": lambda: _uni(m, lp),
        "rush": lambda: _rush(m, lp),
        "successive": lambda: _succ(m, lp),
    }
    for name, fn in solvers.items():
        if name not in sc.solvers:
            continue
        try:
            out[name] = fn()
        except InfeasibleRateError:
            out[name] = None
    return out


def _exact(m, lp):
    a = allocate_exact(m.am, m.sm_const, lp)
    return p_cons(m.am, m.sm_const, lp, a), a.n_active


def _asym(m, lp):
    r = allocate_asymptotic(m.am, m.sm_const, lp)
    return r.p_cons, r.allocation.n_active


def _uni(m, lp):
    r = allocate_uniform(m.am, m.sm_const, lp)
    return r.p_cons, r.allocation.n_active


def _rush(m, lp):
    r = allocate_rush_to_sleep(m.am, m.sm_const, lp)
    return r.p_cons, r.allocation.n_active


def _succ(m, lp):
    r = allocate_successive(m.am, m.sm, lp)
    return r.p_cons, r.allocation.n_active


def _tdma_cells(sc, m, x):
    users = sc.tdma_users(x)
    lp = sc.link()
    try:
        bench = fmt(tdma_uniform_benchmark(users, m.am, lp))
    except InfeasibleRateError:
        bench = INFEASIBLE
    try:
        res = tdma_allocate_linear(users, m.am, m.sm_const, lp)
        total = sum(u.rate for u in users)
        return (res.p_cons, sum(res.n_slots), total), bench
    except (InfeasibleRateError, BindingRegimeError):
        return None, bench


def evaluate_row(sc: Scenario, m: _Models, x: float) -> dict[str, str]:
    cells = dict.fromkeys(columns(sc), "")
    t = sc.symbol_duration_s
    if sc.sweep_var == "rate_pair":
        rate = x
        results = {}
    else:
        rate = _rate_of(sc, x)
        results = _single_user_cells(sc, m, rate)
        try:
            cells["regime"] = regime_report(m.am, m.sm_const, sc.link(rate)).regime.value
        except InfeasibleRateError:
            cells["regime"] = INFEASIBLE
    cells["R"] = fmt(rate)
    cells["se"] = fmt(rate / (1.0 + sc.rolloff))
    for name, res in results.items():
        cells[f"p_cons_{name}"] = INFEASIBLE if res is None else fmt(res[0])

    primary = None
    if "tdma" in sc.solvers:
        tres, bench = _tdma_cells(sc, m, x)
        cells["p_cons_tdma"] = INFEASIBLE if tres is None else fmt(tres[0])
        cells["p_cons_tdma_uniform"] = bench
        results["tdma"] = tres
    for name in _PRIMARY:
        if name in results:
            primary = (name, results[name])
            break
    if primary and primary[1] is not None:
        p, n_act = primary[1][0], primary[1][1]
        bits = primary[1][2] if primary[0] == "tdma" else rate
        cells["n_active"] = str(n_act)
        cells["ee"] = fmt(bits / (t * p) / 1e3)
    return cells


def _threads() -> int:
    raw = os.environ.get("LEANSLOT_THREADS", "").strip()
    if not raw:
        return 1
    try:
        n = int(raw)
    except ValueError:
        log.warning("ignoring LEANSLOT_THREADS=%r (not an integer)", raw)
        return 1
    return max(1, n)


class SweepOutput(NamedTuple):
    csv: str
    summary: str
    scenario: Scenario


def run_sweep(sc: Scenario) -> SweepOutput:
    """Evaluate every sweep point; rows keep sweep order whatever the threading."""
    xs, sc = sweep_values(sc)
    m = _Models(sc.active_model(), sc.sleep_model(), sc.constant_sleep_model())
    cols = columns(sc)
    n_thr = _threads()
    if n_thr > 1 and len(xs) > 1:
        with ThreadPoolExecutor(max_workers=n_thr) as pool:
            rows = list(pool.map(lambda x: evaluate_row(sc, m, float(x)), xs))
    else:
        rows = [evaluate_row(sc, m, float(x)) for x in xs]

    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(cols)
    for r in rows:
        w.writerow([r[c] for c in cols])
    return SweepOutput(buf.getvalue(), summarize(sc, m, rows), sc)


def summarize(sc: Scenario, m: _Models, rows) -> str:
    am, s2 = m.am, sc.sigma2_w
    rep = regime_report(am, m.sm_const, sc.link())
    best = max_ee(am, m.sm_const, sc.link(), sc.rolloff)
    bad = sum(v == INFEASIBLE for r in rows for v in r.values())
    lines = [
        f"N = {sc.n_slots}, T = {fmt(sc.symbol_duration_s)} s, sigma2 = {fmt(s2)} W",
        f"P0 = {fmt(am.p0)} W, gamma = {fmt(am.gamma)}, alpha = {fmt(am.alpha)}, "
        f"P_max = {fmt(am.p_max)} W",
        f"R_max = {fmt(rep.r_max)}, R_a = {fmt(rep.r_a)}, R_tilde = {fmt(rep.r_tilde)} bits/cu",
        f"P_cons,max = {fmt(am.p_cons_max)} W",
        f"EE_max = {fmt(best.ee_max / 1e3)} kbit/J at SE = {fmt(best.se_bar)} bit/s/Hz",
    ]
    for u in sc.users:
        c = user_constants(TdmaUser(u[0], 0.0), am, m.sm_const.p_sleep)
        lines.append(f"user sigma2 = {fmt(u[0])} W: R_hat = {fmt(c.r_hat)}, P_hat = {fmt(c.p_hat)} W")
    lines.append(f"rows = {len(rows)}, infeasible cells = {bad}")
    lines.extend(f"warning: {w}" for w in sc.warnings)
    return "\n".join(lines) + "\n"
