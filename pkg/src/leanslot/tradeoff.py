"""Energy efficiency versus spectral efficiency.

With symbol duration ``T`` and roll-off ``a``, the occupied bandwidth is
``B = (1 + a) / T``, ``SE = R / (1 + a)`` and ``EE = R / (T P_cons)``.
EE is reported in bits per joule.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from .errors import InfeasibleRateError
from .models import ActiveModel, LinkParams, SleepModel, uniform_power
from .scalaropt import minimize_convex
from .single_user import asymptotic_p_cons, check_feasible, r_max, regime_report
from .sleep_sched import allocate_successive


@dataclass(frozen=True)
class EePoint:
    se: float
    ee: float
    bandwidth: float
    rolloff: float
    rate: float
    p_cons: float
    feasible: bool = True


def _check_rolloff(rolloff):
    if not 0.0 <= rolloff <= 1.0:
        raise ValueError(f"rolloff must lie in [0, 1], got {rolloff!r}")


def _point(se, rate, p, lp, rolloff) -> EePoint:
    t = lp.symbol_duration
    return EePoint(se, rate / (t * p), (1.0 + rolloff) / t, rolloff, rate, p)


def ee_for_se(
    am: ActiveModel, sm: SleepModel, lp: LinkParams, rolloff: float, se: float
) -> EePoint:
    """Best large-N EE at spectral efficiency ``se`` under constant sleep."""
    _check_rolloff(rolloff)
    if se < 0:
        raise ValueError("se must be non-negative")
    rate = se * (1.0 + rolloff)
    lp_r = lp.with_rate(rate)
    rep = regime_report(am, sm, lp_r)
    check_feasible(rate, rep.r_max)
    p = asymptotic_p_cons(am, sm.p_sleep, lp.sigma2, rate, rep)
    return _point(se, rate, p, lp, rolloff)


class MaxEe(NamedTuple):
    se_bar: float
    ee_max: float
    r_bar: float


def max_ee(am: ActiveModel, sm: SleepModel, lp: LinkParams, rolloff: float) -> MaxEe:
    """Spectral efficiency that maximises EE, and that EE.

    EE grows through the linear regime, so the optimum sits in
    ``[R_a, R_max]`` where every slot is active and the cost per bit
    ``(P0 + gamma ((2^R - 1) sigma^2)^alpha) / R`` is convex.
    """
    _check_rolloff(rolloff)
    rep = regime_report(am, sm, lp)
    s2 = lp.sigma2

    def per_bit(x):
        return (am.p0 + am.gamma * uniform_power(x, s2) ** am.alpha) / x

    if rep.r_a >= rep.r_max:
        r_bar = rep.r_max
    else:
        r_bar, _ = minimize_convex(per_bit, rep.r_a, rep.r_max, tol=1e-12)
    ee = 1.0 / (lp.symbol_duration * per_bit(r_bar))
    return MaxEe(r_bar / (1.0 + rolloff), ee, r_bar)


def default_se_grid(p_max: float, sigma2: float, rolloff: float, points: int = 200) -> np.ndarray:
    """Log-spaced SE grid from 1e-3 up to ``SE_max``."""
    se_max = r_max(p_max, sigma2) / (1.0 + rolloff)
    return np.geomspace(1e-3, se_max, points)


def ee_se_sweep_successive(
    am: ActiveModel,
    sm: SleepModel,
    lp: LinkParams,
    rolloff: float,
    se_grid: Sequence[float] | None = None,
) -> list[EePoint]:
    """EE along an SE grid using the successive sleep scheduler.

    Infeasible points come back with ``feasible=False`` and zero EE.
    """
    _check_rolloff(rolloff)
    if se_grid is None:
        se_grid = default_se_grid(am.p_max, lp.sigma2, rolloff)
    out = []
    for se in se_grid:
        se = float(se)
        rate = se * (1.0 + rolloff)
        try:
            res = allocate_successive(am, sm, lp.with_rate(rate))
        except InfeasibleRateError:
            out.append(EePoint(se, 0.0, (1.0 + rolloff) / lp.symbol_duration, rolloff,
                               rate, math.nan, feasible=False))
            continue
        out.append(_point(se, rate, res.p_cons, lp, rolloff))
    return out
