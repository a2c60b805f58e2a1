"""Allocation under successive (piecewise-constant) sleep modes.

Each sleep mode ``s`` is tried as the deepest mode the frame reaches. Mode
``s`` is only reachable when the frame leaves at least ``T_s`` seconds of
sleep, which caps the number of active slots at ``N - ceil(T_s / T)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

from .errors import InfeasibleRateError
from .models import (
    ActiveModel,
    Allocation,
    LinkParams,
    SleepModel,
    sleep_energy,
    sleep_energy_in_mode,
    uniform_power,
)
from .single_user import check_feasible, model_r_a, r_max, round_half_away

# Absorbs rounding in T_s / T when T_s is a whole number of symbols.
_COUNT_TOL = 1e-9


def active_cap(sm: SleepModel, lp: LinkParams, s: int) -> int:
    """Largest active-slot count that still leaves room to reach mode ``s``."""
    t_s = sm.modes[s].t_start
    return lp.n_slots - math.ceil(t_s / lp.symbol_duration - _COUNT_TOL)


def _min_active(lp: LinkParams, rmax: float) -> int:
    """Fewest slots able to carry the frame at ``P_max``."""
    if lp.rate <= 0:
        return 0
    return max(1, math.ceil(lp.n_slots * lp.rate / rmax - _COUNT_TOL))


def feasible_modes(sm: SleepModel, lp: LinkParams, r_max: float) -> list[int]:
    """Indices of the sleep modes reachable at the target rate, shallowest first."""
    check_feasible(lp.rate, r_max)
    need = _min_active(lp, r_max)
    modes = [s for s in range(len(sm.modes)) if need <= active_cap(sm, lp, s)]
    if not modes:
        raise InfeasibleRateError(lp.rate, r_max, "no sleep mode is reachable at this rate")
    return modes


@dataclass(frozen=True)
class ModeCandidate:
    """Best allocation found when mode ``mode_index`` is the deepest one used.

    ``p_cons`` follows the true sleep schedule; ``p_cons_mode`` stops the
    schedule at mode ``s`` as in the per-mode accounting.
    """

    mode_index: int
    n_a_cap: int
    r_a_s: float
    r_tilde_s: float
    n_a: int
    power: float
    p_cons: float
    p_cons_mode: float


class SuccessiveResult(NamedTuple):
    allocation: Allocation
    mode: int
    p_cons: float
    candidates: tuple[ModeCandidate, ...]

    @property
    def chosen(self) -> ModeCandidate:
        return next(c for c in self.candidates if c.mode_index == self.mode)


def _candidate(am, sm, lp, s, rmax, need) -> ModeCandidate:
    n, rate, s2, t = lp.n_slots, lp.rate, lp.sigma2, lp.symbol_duration
    cap = active_cap(sm, lp, s)
    ra = model_r_a(am, sm.modes[s].power, s2)
    rt = min(ra, rmax)
    if rate <= 0:
        na, p = 0, 0.0
    else:
        na = round_half_away(min(n * rate / rt, cap))
        na = min(max(na, need), cap)
        p = min(uniform_power(n * rate / na, s2), am.p_max)
    active = na / n * (am.p0 + am.gamma * p**am.alpha)
    t_sleep = (n - na) * t
    frame = lp.frame_duration
    return ModeCandidate(
        mode_index=s,
        n_a_cap=cap,
        r_a_s=ra,
        r_tilde_s=rt,
        n_a=na,
        power=p,
        p_cons=active + sleep_energy(sm, t_sleep) / frame,
        p_cons_mode=active + sleep_energy_in_mode(sm, s, t_sleep) / frame,
    )


def allocate_successive(am: ActiveModel, sm: SleepModel, lp: LinkParams) -> SuccessiveResult:
    """Pick the sleep mode and active-slot count of least consumed power.

    For every reachable mode the active-slot count comes from that mode's
    R_a, is rounded, capped by the mode's reach, and raised if the uniform
    power would exceed ``P_max``. The powers meet the rate exactly. Ties go
    to the deeper mode.
    """
    rmax = r_max(am.p_max, lp.sigma2)
    modes = feasible_modes(sm, lp, rmax)
    need = _min_active(lp, rmax)
    cands = tuple(_candidate(am, sm, lp, s, rmax, need) for s in modes)
    best = min(cands, key=lambda c: (c.p_cons, -c.mode_index))
    alloc = Allocation.from_blocks(lp.n_slots, [(best.n_a, best.power)])
    return SuccessiveResult(alloc, best.mode_index, best.p_cons, cands)

