"""Scalar kernel: Lambert W, a 1-D convex minimizer and the R_a constant."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

_INV_E = math.exp(-1.0)
_LN2 = math.log(2.0)
_INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


def lambert_w0(z: float, tol: float = 1e-13, max_iter: int = 50) -> float:
    """Principal branch of the Lambert W function for real ``z >= -1/e``.

    Halley iteration seeded by the branch-point series near ``-1/e`` and by
    ``log(1 + z)`` elsewhere. Stops once ``|w e^w - z| <= tol`` (relative
    to ``|z|`` beyond 1e3) or the step no longer changes ``w``.
    """
    if math.isnan(z):
        raise ValueError("lambert_w0 of NaN")
    if z < -_INV_E:
        # Allow rounding of -1/e itself.
        if z < -_INV_E - 1e-15:
            raise ValueError(f"lambert_w0 is real only for z >= -1/e, got {z!r}")
        z = -_INV_E
    if z == 0.0:
        return 0.0
    if z == -_INV_E:
        return -1.0
    if math.isinf(z):
        return math.inf

    q = z + _INV_E
    if q < 0.3:
        p = math.sqrt(2.0 * math.e * q)
        w = -1.0 + p - p * p / 3.0 + 11.0 / 72.0 * p**3
    elif z < 3.0:
        w = math.log1p(z) * 0.75
    else:
        lz = math.log(z)
        w = lz - math.log(lz)

    scale = max(1.0, abs(z) / 1e3)
    for _ in range(max_iter):
        ew = math.exp(w)
        f = w * ew - z
        if abs(f) <= tol * scale:
            return w
        wp1 = w + 1.0
        denom = ew * wp1 - (w + 2.0) * f / (2.0 * wp1)
        if denom == 0.0:
            break
        step = f / denom
        w_new = w - step
        if w_new == w:
            return w
        w = max(w_new, -1.0)
    if abs(w * math.exp(w) - z) <= 1e-10 * scale:
        return w
    raise ArithmeticError(f"lambert_w0 did not converge for z={z!r}")


def minimize_convex(
    f: Callable[[float], float],
    lo: float,
    hi: float,
    tol: float = 1e-10,
    max_iter: int = 500,
) -> tuple[float, float]:
    """Golden-section search for the minimum of a convex ``f`` on ``[lo, hi]``.

    Returns ``(argmin, min)``. Ties keep the left sub-interval so flat
    stretches resolve toward the smaller argument. The endpoints are also
    evaluated so a boundary minimum is returned exactly.
    """
    if not lo < hi:
        raise ValueError("need lo < hi")
    if not tol > 0:
        raise ValueError("tol must be positive")

    def ev(x):
        v = f(x)
        if not math.isfinite(v):
            raise ArithmeticError(f"objective is not finite at x={x!r}: {v!r}")
        return v

    a, b = lo, hi
    c = b - _INV_PHI * (b - a)
    d = a + _INV_PHI * (b - a)
    fc, fd = ev(c), ev(d)
    for _ in range(max_iter):
        if b - a <= tol * max(1.0, abs(c)):
            break
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - _INV_PHI * (b - a)
            fc = ev(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INV_PHI * (b - a)
            fd = ev(d)
    x, fx = (c, fc) if fc <= fd else (d, fd)
    f_lo, f_hi = ev(lo), ev(hi)
    if f_lo <= fx:
        return lo, f_lo
    if f_hi < fx:
        return hi, f_hi
    return x, fx


@dataclass(frozen=True)
class RaProblem:
    """``delta = (P0 - P_ref) / (gamma sigma^(2 alpha))`` and the PA exponent."""

    delta: float
    alpha: float

    def __post_init__(self):
        if not 0.0 < self.alpha <= 1.0:
            raise ValueError(f"alpha must lie in (0, 1], got {self.alpha!r}")
        if not self.delta >= 0:
            raise ValueError(f"delta must be non-negative, got {self.delta!r}")


def ra_objective(x: float, delta: float, alpha: float) -> float:
    """Cost per bit ``(delta + (2^x - 1)^alpha) / x``, evaluated in log space."""
    if x <= 0:
        return math.inf
    # (2^x - 1)^alpha = exp(alpha * log(expm1(x ln 2)))
    y = x * _LN2
    if y > 30.0:
        log_term = y + math.log1p(-math.exp(-y))
    else:
        log_term = math.log(math.expm1(y))
    return (delta + math.exp(alpha * log_term)) / x


def r_a_closed_form(alpha: float) -> float:
    """R_a for ``delta = 0``: ``(W(-e^{-1/alpha}/alpha) + 1/alpha) / ln 2``."""
    if not 0.0 < alpha <= 1.0:
        raise ValueError(f"alpha must lie in (0, 1], got {alpha!r}")
    inv = 1.0 / alpha
    return (lambert_w0(-inv * math.exp(-inv)) + inv) / _LN2


def r_a_numeric(prob: RaProblem, r_max_hint: float = 0.0, tol: float = 1e-12) -> float:
    """R_a by golden-section search, whatever ``delta``."""
    hi = max(200.0 / prob.alpha, 4.0 * r_max_hint)
    x, _ = minimize_convex(
        lambda x: ra_objective(x, prob.delta, prob.alpha), 1e-9, hi, tol=tol
    )
    return x


def r_a(prob: RaProblem, r_max_hint: float = 0.0) -> float:
    """Per-active-slot rate minimizing the cost per bit.

    Uses the closed form when ``delta == 0``; ``delta == inf`` (no
    load-dependent term) gives :func:`r_a_infinite_case`.
    """
    if math.isinf(prob.delta):
        return r_a_infinite_case()
    if prob.delta == 0.0:
        return r_a_closed_form(prob.alpha)
    return r_a_numeric(prob, r_max_hint)


def r_a_infinite_case() -> float:
    """R_a of a purely load-independent model: activate as few slots as possible."""
    return math.inf


def ra_problem(p0: float, p_ref: float, gamma: float, sigma2: float, alpha: float) -> RaProblem:
    """Build the R_a problem for active power ``p0`` against reference ``p_ref``."""
    if p0 < p_ref:
        raise ValueError(f"P0 = {p0!r} must be at least the sleep power {p_ref!r}")
    if gamma == 0.0:
        return RaProblem(math.inf, alpha)
    return RaProblem((p0 - p_ref) / (gamma * sigma2**alpha), alpha)
