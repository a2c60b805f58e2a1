"""Brute-force ground truth for small single-user instances.

:func:`oracle_structured` enumerates every "some slots at ``P_max`` plus one
uniform block" allocation. :func:`oracle_grid` drops that structural
assumption and searches all per-slot rate vectors on a grid, for ``N <= 3``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InfeasibleRateError
from .models import ActiveModel, Allocation, LinkParams, SleepModel, sleep_energy
from .single_user import POWER_SLACK, r_max

STRUCTURED_MAX_N = 4096
GRID_MAX_N = 3
GRID_MAX_POINTS = 2000
_RATE_TOL = 1e-9


@dataclass(frozen=True)
class OracleResult:
    best_p_cons: float
    n_max_slots: int
    n_uniform_slots: int
    uniform_power: float
    exhaustive: bool = True

    @property
    def best_structure(self) -> tuple[int, int, float]:
        return self.n_max_slots, self.n_uniform_slots, self.uniform_power

    def allocation(self, n_slots: int, p_max: float) -> Allocation:
        return Allocation.from_blocks(
            n_slots, [(self.n_max_slots, p_max), (self.n_uniform_slots, self.uniform_power)]
        )


def _require_constant(sm: SleepModel):
    if not sm.is_constant:
        raise ValueError("the oracles assume a constant sleep model")


def _sleep_costs(sm, lp) -> np.ndarray:
    """``E_sleep((N - k) T) / (N T)`` for ``k = 0..N`` active slots."""
    n, t = lp.n_slots, lp.symbol_duration
    return np.array([sleep_energy(sm, (n - k) * t) for k in range(n + 1)]) / lp.frame_duration


def oracle_structured(am: ActiveModel, sm: SleepModel, lp: LinkParams) -> OracleResult:
    """Least consumption over all ``(n_max, n_uniform)`` block structures.

    ``n_max`` slots sit at ``P_max`` and ``n_uniform`` slots share the
    residual rate; pairs needing more than ``P_max`` are discarded. Ties keep
    the pair found first (smaller ``n_max``, then smaller ``n_uniform``).
    """
    _require_constant(sm)
    n, rate, s2 = lp.n_slots, lp.rate, lp.sigma2
    if n > STRUCTURED_MAX_N:
        raise ValueError(f"oracle_structured is limited to N <= {STRUCTURED_MAX_N}")
    rm = r_max(am.p_max, s2)
    total = n * rate
    tol = _RATE_TOL * max(1.0, total)
    sleep = _sleep_costs(sm, lp)
    p_lim = am.p_max * (1.0 + POWER_SLACK)
    a_max = am.p0 + am.gamma * am.p_max**am.alpha

    best = (math.inf, 0, 0, 0.0)
    for nm in range(n + 1):
        res = total - nm * rm
        if res < -tol:
            break
        if abs(res) <= tol:
            cost = (nm * a_max) / n + sleep[nm]
            if cost < best[0]:
                best = (float(cost), nm, 0, 0.0)
        if res <= 0:
            continue
        nu = np.arange(1, n - nm + 1)
        if nu.size == 0:
            continue
        # Huge residuals on few slots overflow to inf and are filtered out below.
        with np.errstate(over="ignore"):
            p = np.expm1(res / nu * math.log(2.0)) * s2
        ok = p <= p_lim
        if not ok.any():
            continue
        nu, p = nu[ok], np.minimum(p[ok], am.p_max)
        cost = (nm * a_max + nu * (am.p0 + am.gamma * p**am.alpha)) / n + sleep[nm + nu]
        i = int(np.argmin(cost))
        if cost[i] < best[0]:
            best = (float(cost[i]), nm, int(nu[i]), float(p[i]))
    if math.isinf(best[0]):
        raise InfeasibleRateError(rate, rm)
    return OracleResult(*best)


@dataclass(frozen=True)
class GridOracleResult:
    """Grid minimum and the resolution it was obtained at.

    ``resolution`` is the largest change in consumption between the grid
    minimiser and any feasible grid neighbour, a local bound on how far the
    grid minimum may sit above the continuous one.
    """

    best_p_cons: float
    rates: tuple[float, ...]
    step: float
    resolution: float
    grid_points: int


def _grid_cost(am, sleep, n, s2, rates):
    p = np.expm1(rates * math.log(2.0)) * s2
    active = p > 0
    k = active.sum(axis=-1)
    load = np.where(active, am.p0 + am.gamma * np.power(p, am.alpha), 0.0).sum(axis=-1)
    return load / n + sleep[k]


def oracle_grid(
    am: ActiveModel, sm: SleepModel, lp: LinkParams, grid_points: int = 500
) -> GridOracleResult:
    """Minimise consumption over per-slot rate vectors on a grid.

    The first ``N - 1`` slot rates range over ``grid_points`` values in
    ``[0, min(R_max, N R)]``; the last slot carries whatever rate remains and
    the point is kept only if that rate lies in ``[0, R_max]``.
    """
    _require_constant(sm)
    n, rate, s2 = lp.n_slots, lp.rate, lp.sigma2
    if n > GRID_MAX_N:
        raise ValueError(f"oracle_grid is limited to N <= {GRID_MAX_N}")
    if not 2 <= grid_points <= GRID_MAX_POINTS:
        raise ValueError(f"grid_points must lie in [2, {GRID_MAX_POINTS}]")
    rm = r_max(am.p_max, s2)
    total = n * rate
    if rate > rm * (1.0 + POWER_SLACK):
        raise InfeasibleRateError(rate, rm)
    sleep = _sleep_costs(sm, lp)
    hi = min(rm, total)
    axis = np.linspace(0.0, hi, grid_points)
    step = float(axis[1] - axis[0]) if hi > 0 else 0.0

    if n == 1:
        pts = np.array([min(total, rm)])
        return GridOracleResult(float(_grid_cost(am, sleep, n, s2, pts[None, :])[0]),
                                (float(pts[0]),), step, 0.0, grid_points)

    free = np.stack(np.meshgrid(*[axis] * (n - 1), indexing="ij"), axis=-1)
    last = total - free.sum(axis=-1)
    keep = (last >= -_RATE_TOL) & (last <= rm * (1.0 + POWER_SLACK))
    pts = np.concatenate([free, np.clip(last, 0.0, rm)[..., None]], axis=-1)
    cost = np.where(keep, _grid_cost(am, sleep, n, s2, pts), np.inf)
    here = np.unravel_index(int(np.argmin(cost)), cost.shape)
    best = float(cost[here])

    resolution = 0.0
    for d in range(n - 1):
        for sgn in (-1, 1):
            nb = list(here)
            nb[d] += sgn
            if 0 <= nb[d] < grid_points and np.isfinite(cost[tuple(nb)]):
                resolution = max(resolution, abs(float(cost[tuple(nb)]) - best))
    return GridOracleResult(best, tuple(float(x) for x in pts[here]), step, resolution, grid_points)
