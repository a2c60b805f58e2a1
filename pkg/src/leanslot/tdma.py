"""Multi-user TDMA allocation when the slot budget is not binding.

Each user gets a contiguous run of slots sized from its own operating rate
``R_hat_k``, so users decouple. When ``sum R_k / R_hat_k > 1`` the budget binds
and only the fully-active uniform benchmark is offered.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

from .errors import BindingRegimeError, InfeasibleRateError
from .models import ActiveModel, LinkParams, SleepModel, sleep_energy, uniform_power
from .single_user import POWER_SLACK, model_r_a, r_max, round_half_away

_COUNT_TOL = 1e-9


@dataclass(frozen=True)
class TdmaUser:
    """One user: normalised noise ``sigma2_k`` (W) and target rate ``rate_k``."""

    sigma2: float
    rate: float

    def __post_init__(self):
        if not self.sigma2 > 0:
            raise ValueError("sigma2 must be positive")
        if not self.rate >= 0:
            raise ValueError("rate must be non-negative")


@dataclass(frozen=True)
class UserConstants:
    r_max: float
    r_a: float
    r_hat: float
    p_hat: float


def user_constants(user: TdmaUser, am: ActiveModel, p_sleep: float) -> UserConstants:
    rm = r_max(am.p_max, user.sigma2)
    ra = model_r_a(am, p_sleep, user.sigma2)
    r_hat = min(ra, rm)
    return UserConstants(rm, ra, r_hat, min(uniform_power(r_hat, user.sigma2), am.p_max))


def _min_slots(n: int, rate: float, rmax: float) -> int:
    return max(1, math.ceil(n * rate / rmax - _COUNT_TOL)) if rate > 0 else 0


def tdma_feasible(users: Sequence[TdmaUser], lp: LinkParams, p_max: float) -> bool:
    """Whether every user fits in the frame when transmitting at ``p_max``."""
    n = lp.n_slots
    return sum(_min_slots(n, u.rate, r_max(p_max, u.sigma2)) for u in users) <= n


class TdmaResult(NamedTuple):
    """Per-user slot counts and powers, laid out user after user.

    ``p_cons`` is the closed form; ``p_cons_evaluated`` is the consumption of
    the rounded, rate-exact allocation.
    """

    n_slots: tuple[int, ...]
    powers: tuple[float, ...]
    p_cons: float
    p_cons_evaluated: float

    def slot_ranges(self) -> list[range]:
        out, pos = [], 0
        for k in self.n_slots:
            out.append(range(pos, pos + k))
            pos += k
        return out


def tdma_load(users: Sequence[TdmaUser], am: ActiveModel, p_sleep: float) -> float:
    """``sum R_k / R_hat_k``; the linear regime needs this to be at most 1."""
    return sum(u.rate / user_constants(u, am, p_sleep).r_hat for u in users if u.rate > 0)


def tdma_allocate_linear(
    users: Sequence[TdmaUser], am: ActiveModel, sm: SleepModel, lp: LinkParams
) -> TdmaResult:
    """Decoupled allocation: user ``k`` gets ``round(N R_k / R_hat_k)`` slots.

    Powers are set so every user meets its rate exactly. Raises
    :class:`BindingRegimeError` when the slot budget binds and
    :class:`InfeasibleRateError` when the users cannot fit at all.
    """
    if not sm.is_constant:
        raise ValueError("TDMA allocation needs a constant sleep model")
    n, ps = lp.n_slots, sm.p_sleep
    consts = [user_constants(u, am, ps) for u in users]
    for u, c in zip(users, consts):
        if u.rate > c.r_max * (1.0 + POWER_SLACK):
            raise InfeasibleRateError(u.rate, c.r_max)
    if not tdma_feasible(users, lp, am.p_max):
        raise InfeasibleRateError(
            max(u.rate for u in users), min(c.r_max for c in consts),
            "users do not fit in the frame even at maximal power",
        )
    load = sum(u.rate / c.r_hat for u, c in zip(users, consts) if u.rate > 0)
    if load > 1.0 + 1e-12:
        raise BindingRegimeError(load, _benchmark_or_none(users, am, lp))

    need = [_min_slots(n, u.rate, c.r_max) for u, c in zip(users, consts)]
    ideal = [n * u.rate / c.r_hat for u, c in zip(users, consts)]
    counts = [max(round_half_away(x), m) if u.rate > 0 else 0
              for x, m, u in zip(ideal, need, users)]
    # Rounding up can overshoot the frame by a few slots; give them back
    # where the round-up was largest.
    while sum(counts) > n:
        k = max(
            (i for i in range(len(counts)) if counts[i] > max(need[i], 1)),
            key=lambda i: (counts[i] - ideal[i], -i),
        )
        counts[k] -= 1

    powers = tuple(
        min(uniform_power(n * u.rate / k, u.sigma2), am.p_max) if k else 0.0
        for u, k in zip(users, counts)
    )
    formula = ps + sum(
        u.rate * (am.p0 - ps + am.gamma * c.p_hat**am.alpha) / c.r_hat
        for u, c in zip(users, consts)
        if u.rate > 0
    )
    n_act = sum(counts)
    active = sum(k * (am.p0 + am.gamma * p**am.alpha) for k, p in zip(counts, powers))
    evaluated = active / n + sleep_energy(sm, (n - n_act) * lp.symbol_duration) / lp.frame_duration
    return TdmaResult(tuple(counts), powers, formula, evaluated)


def tdma_uniform_benchmark(users: Sequence[TdmaUser], am: ActiveModel, lp: LinkParams) -> float:
    """Fully-active frame with slot share ``R_k / sum R`` for user ``k``.

    Every user then carries ``sum R`` bits per active slot, at power
    ``(2^{sum R} - 1) sigma2_k``.
    """
    total = sum(u.rate for u in users)
    if total == 0:
        return am.p0
    load = 0.0
    for u in users:
        if u.rate == 0:
            continue
        p = uniform_power(total, u.sigma2)
        if p > am.p_max * (1.0 + POWER_SLACK):
            raise InfeasibleRateError(
                total, r_max(am.p_max, u.sigma2),
                f"uniform share needs {p:.6g} W > P_max for a user with sigma2 = {u.sigma2:g}",
            )
        load += u.rate / total * p**am.alpha
    return am.p0 + am.gamma * load


def _benchmark_or_none(users, am, lp):
    try:
        return tdma_uniform_benchmark(users, am, lp)
    except InfeasibleRateError:
        return None
