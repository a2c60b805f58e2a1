"""Single-user slot activation and power allocation under a constant sleep power.

Four allocators share the same inputs (active model, sleep model, link):

* :func:`allocate_no_pmax` ignores the per-slot power cap,
* :func:`allocate_exact` is the iterative finite-N solver,
* :func:`allocate_asymptotic` is the large-N closed form with its regime,
* :func:`allocate_uniform` and :func:`allocate_rush_to_sleep` are baselines.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace
from typing import Callable, NamedTuple

from .errors import InfeasibleRateError
from .models import (
    ActiveModel,
    Allocation,
    LinkParams,
    SleepModel,
    p_cons_blocks,
    uniform_power,
)
from .scalaropt import r_a, ra_problem

# Relative slack on the P_max and R_max comparisons.
POWER_SLACK = 1e-12


def r_max(p_max: float, sigma2: float) -> float:
    """Largest per-slot rate, reached at maximal transmit power."""
    if not (p_max > 0 and sigma2 > 0):
        raise ValueError("p_max and sigma2 must be positive")
    return math.log2(1.0 + p_max / sigma2)


def round_half_away(x: float) -> int:
    return int(math.floor(x + 0.5)) if x >= 0 else -int(math.floor(-x + 0.5))


def ceil_floor(x: float, cost: Callable[[int], float]) -> int:
    """Pick ``floor(x)`` or ``ceil(x)``, whichever has the smaller cost.

    Ties go to the smaller integer. ``cost`` may return ``inf`` for an
    infeasible candidate; both being infeasible is an error.
    """
    lo, hi = math.floor(x), math.ceil(x)
    c_lo = cost(lo)
    c_hi = c_lo if hi == lo else cost(hi)
    if math.isinf(c_lo) and math.isinf(c_hi):
        raise ValueError(f"no feasible integer next to {x!r}")
    return lo if c_lo <= c_hi else hi


def _require_constant(sm: SleepModel):
    if not sm.is_constant:
        raise ValueError(
            "this allocator needs a constant sleep model; use "
            "sleep_sched.allocate_successive for several sleep modes"
        )


def check_feasible(rate: float, rmax: float):
    if rate > rmax * (1.0 + POWER_SLACK):
        raise InfeasibleRateError(rate, rmax)


def model_r_a(am: ActiveModel, p_ref: float, sigma2: float) -> float:
    """R_a of the model against the reference sleep power ``p_ref``."""
    prob = ra_problem(am.p0, p_ref, am.gamma, sigma2, am.alpha)
    return r_a(prob, r_max_hint=r_max(am.p_max, sigma2))


class Regime(str, enum.Enum):
    LINEAR = "Linear"
    EXPONENTIAL = "Exponential"


@dataclass(frozen=True)
class RegimeReport:
    """Large-N operating constants and the regime the target rate falls in.

    ``asymptotic_gap`` is the evaluated consumption of the rounded
    allocation minus the closed-form value; it shrinks like 1/N.
    """

    regime: Regime
    r_tilde: float
    p_tilde: float
    r_max: float
    r_a: float
    p_a: float
    asymptotic_gap: float = 0.0


def regime_report(am: ActiveModel, sm: SleepModel, lp: LinkParams) -> RegimeReport:
    ra = model_r_a(am, sm.p_sleep, lp.sigma2)
    rm = r_max(am.p_max, lp.sigma2)
    pa = uniform_power(ra, lp.sigma2) if math.isfinite(ra) else math.inf
    r_t = min(ra, rm)
    regime = Regime.LINEAR if lp.rate <= r_t else Regime.EXPONENTIAL
    return RegimeReport(regime, r_t, min(pa, am.p_max), rm, ra, pa)


def _uniform_cost(am, p_sleep, n, rate, sigma2):
    """Cost of spreading ``n * rate`` bits uniformly over ``k`` of ``n`` slots."""

    def cost(k):
        if k == 0:
            return p_sleep if rate <= 0 else math.inf
        p = uniform_power(rate * n / k, sigma2)
        return k / n * (am.p0 + am.gamma * p**am.alpha) + (n - k) / n * p_sleep

    return cost


def _relaxed_count(n: int, rate: float, ra: float) -> float:
    if rate <= 0:
        return 0.0
    x = n if ra == 0 else min(n * rate / ra, n)
    # Zero active slots cannot carry a positive rate.
    return max(x, 1.0)


def _no_pmax_count(am, p_sleep, n, rate, sigma2, ra) -> int:
    if rate <= 0:
        return 0
    x = _relaxed_count(n, rate, ra)
    return ceil_floor(x, _uniform_cost(am, p_sleep, n, rate, sigma2))


def allocate_no_pmax(am: ActiveModel, sm: SleepModel, lp: LinkParams) -> Allocation:
    """Optimal allocation when the per-slot power cap is ignored.

    ``N_a`` is the better of the integers bounding ``min(N R / R_a, N)``
    and the active slots share one power.
    """
    _require_constant(sm)
    n, rate, s2 = lp.n_slots, lp.rate, lp.sigma2
    ra = model_r_a(am, sm.p_sleep, s2)
    na = _no_pmax_count(am, sm.p_sleep, n, rate, s2, ra)
    if na == 0:
        return Allocation(0, [0.0] * n)
    return Allocation.from_blocks(n, [(na, uniform_power(rate * n / na, s2))])


@dataclass(frozen=True)
class ExactTrace:
    """Block structure found by :func:`allocate_exact`."""

    n_max_slots: int
    n_uniform_slots: int
    uniform_power: float
    iterations: int


def exact_structure(am: ActiveModel, sm: SleepModel, lp: LinkParams) -> ExactTrace:
    """Run the iterative clamping algorithm and return the block structure.

    While the shared power of the uniform block exceeds ``P_max``, one more
    slot is pinned at ``P_max`` and the remaining rate is re-spread over the
    remaining slots.
    """
    _require_constant(sm)
    s2, p_max = lp.sigma2, am.p_max
    rm = r_max(p_max, s2)
    check_feasible(lp.rate, rm)
    ra = model_r_a(am, sm.p_sleep, s2)

    n, rate, n_max, it = lp.n_slots, lp.rate, 0, 0
    na = _no_pmax_count(am, sm.p_sleep, n, rate, s2, ra)
    p = uniform_power(rate * n / na, s2) if na else 0.0
    while na and p > p_max * (1.0 + POWER_SLACK):
        it += 1
        n_max += 1
        if n == 1:
            n, rate, na, p = 0, 0.0, 0, 0.0
            break
        rate = max((n * rate - rm) / (n - 1), 0.0)
        n -= 1
        na = _no_pmax_count(am, sm.p_sleep, n, rate, s2, ra)
        p = uniform_power(rate * n / na, s2) if na else 0.0
    return ExactTrace(n_max, na, min(p, p_max), it)


def allocate_exact(am: ActiveModel, sm: SleepModel, lp: LinkParams) -> Allocation:
    """Finite-N allocation: ``n_max`` slots at ``P_max`` then one uniform block.

    Raises :class:`InfeasibleRateError` if the rate exceeds ``R_max``.
    """
    tr = exact_structure(am, sm, lp)
    return Allocation.from_blocks(
        lp.n_slots, [(tr.n_max_slots, am.p_max), (tr.n_uniform_slots, tr.uniform_power)]
    )


class AsymptoticResult(NamedTuple):
    allocation: Allocation
    report: RegimeReport
    p_cons: float
    achieved_rate: float


def asymptotic_p_cons(
    am: ActiveModel, p_sleep: float, sigma2: float, rate: float, rep: RegimeReport
) -> float:
    """Closed-form large-N consumption for either regime."""
    if rep.regime is Regime.LINEAR:
        if rate == 0:
            return p_sleep
        return p_sleep + rate * (am.p0 - p_sleep + am.gamma * rep.p_tilde**am.alpha) / rep.r_tilde
    return am.p0 + am.gamma * uniform_power(rate, sigma2) ** am.alpha


def allocate_asymptotic(am: ActiveModel, sm: SleepModel, lp: LinkParams) -> AsymptoticResult:
    """Large-N allocation and its regime.

    Linear regime: ``round(N R / R_tilde)`` slots at ``P_tilde``, so the
    achieved rate can differ from the target by O(1/N). Exponential regime:
    every slot at ``(2^R - 1) sigma^2``. ``p_cons`` is the closed form.
    """
    _require_constant(sm)
    n, rate, s2 = lp.n_slots, lp.rate, lp.sigma2
    rep = regime_report(am, sm, lp)
    check_feasible(rate, rep.r_max)
    if rep.regime is Regime.LINEAR:
        na = 0 if rate == 0 else min(n, max(1, round_half_away(n * rate / rep.r_tilde)))
        blocks = [(na, rep.p_tilde)]
    else:
        blocks = [(n, uniform_power(rate, s2))]
    alloc = Allocation.from_blocks(n, blocks)
    closed = asymptotic_p_cons(am, sm.p_sleep, s2, rate, rep)
    evaluated = p_cons_blocks(am, sm, lp, blocks)
    rep = replace(rep, asymptotic_gap=evaluated - closed)
    return AsymptoticResult(alloc, rep, closed, alloc.achieved_rate(s2))


class BaselineResult(NamedTuple):
    allocation: Allocation
    p_cons: float


def allocate_uniform(am: ActiveModel, sm: SleepModel, lp: LinkParams) -> BaselineResult:
    """Every slot active at ``(2^R - 1) sigma^2``; no sleep."""
    n, s2 = lp.n_slots, lp.sigma2
    check_feasible(lp.rate, r_max(am.p_max, s2))
    p = min(uniform_power(lp.rate, s2), am.p_max)
    return BaselineResult(
        Allocation.from_blocks(n, [(n, p)]), am.p0 + am.gamma * p**am.alpha
    )


class RushResult(NamedTuple):
    allocation: Allocation
    p_cons: float
    p_cons_asymptotic: float


def rush_structure(n: int, rate: float, rmax: float) -> tuple[int, float]:
    """Full-power slot count and the leftover bits of the residual slot."""
    if rate <= 0:
        return 0, 0.0
    x = n * rate / rmax
    k = max(1, math.ceil(x - 1e-9))
    n_full = k - 1
    residual = max(n * rate - n_full * rmax, 0.0)
    return n_full, min(residual, rmax)


def allocate_rush_to_sleep(am: ActiveModel, sm: SleepModel, lp: LinkParams) -> RushResult:
    """Pack the rate into the fewest slots at ``P_max``, then sleep.

    The finite-N allocation has ``ceil(N R / R_max) - 1`` full-power slots and
    one residual slot with the leftover rate. ``p_cons_asymptotic`` is
    ``P_sleep + (R / R_max)(P0 - P_sleep + gamma P_max^alpha)``.
    """
    _require_constant(sm)
    n, rate, s2 = lp.n_slots, lp.rate, lp.sigma2
    rm = r_max(am.p_max, s2)
    check_feasible(rate, rm)
    n_full, residual = rush_structure(n, rate, rm)
    blocks = [(n_full, am.p_max)]
    if rate > 0:
        blocks.append((1, min(uniform_power(residual, s2), am.p_max)))
    alloc = Allocation.from_blocks(n, blocks)
    ps = sm.p_sleep
    asym = ps + rate / rm * (am.p0 - ps + am.gamma * am.p_max**am.alpha)
    return RushResult(alloc, p_cons_blocks(am, sm, lp, blocks), asym)
