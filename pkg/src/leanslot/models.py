"""Power consumption models: loss factors, PA classes, active and sleep models.

All powers are in watts, durations in seconds and rates in bits per channel
use. Every type is frozen after construction.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace
from typing import Iterable, Sequence

import numpy as np

# Curve-fit constant of the envelope tracking PA model.
ET_A = 0.0082


@dataclass(frozen=True)
class LossFactors:
    """DC-DC, mains supply and cooling loss fractions."""

    sigma_dc: float = 0.0
    sigma_ms: float = 0.0
    sigma_cool: float = 0.0

    def __post_init__(self):
        for name in ("sigma_dc", "sigma_ms", "sigma_cool"):
            v = getattr(self, name)
            if not 0.0 <= v < 1.0:
                raise ValueError(f"{name} must lie in [0, 1), got {v!r}")

    @property
    def eta(self) -> float:
        return efficiency(self)


TABLE_I_LOSSES = LossFactors(sigma_dc=0.075, sigma_ms=0.09, sigma_cool=0.10)
LOSSLESS = LossFactors()


def efficiency(lf: LossFactors) -> float:
    """Overall efficiency ``(1 - sigma_dc)(1 - sigma_ms)(1 - sigma_cool)``."""
    return (1.0 - lf.sigma_dc) * (1.0 - lf.sigma_ms) * (1.0 - lf.sigma_cool)


class PaVariant(str, enum.Enum):
    IDEAL = "ideal"
    CLASS_A = "classa"
    CLASS_B = "classb"
    ENVELOPE_TRACKING = "et"
    DOHERTY = "doherty"


@dataclass(frozen=True)
class PaClass:
    """A power amplifier class with its saturation power.

    ``ell`` is only used by the Doherty variant and ``eta_max`` only by
    envelope tracking, which has no default peak efficiency.
    """

    variant: PaVariant
    p_sat: float
    ell: int = 1
    eta_max: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "variant", PaVariant(self.variant))
        if not self.p_sat > 0:
            raise ValueError(f"p_sat must be positive, got {self.p_sat!r}")
        if self.variant is PaVariant.DOHERTY and (
            int(self.ell) != self.ell or self.ell < 1
        ):
            raise ValueError(f"Doherty ell must be a positive integer, got {self.ell!r}")
        if self.variant is PaVariant.ENVELOPE_TRACKING:
            if self.eta_max is None or not 0 < self.eta_max <= 1:
                raise ValueError("envelope tracking requires eta_max in (0, 1]")

    @classmethod
    def from_backoff(cls, variant, p_max: float, backoff_db: float = 8.0, **kw):
        """Build a PA whose saturation power sits ``backoff_db`` above ``p_max``."""
        return cls(variant, p_max * 10.0 ** (backoff_db / 10.0), **kw)


def pa_power(pa: PaClass, p: float) -> float:
    """Power drawn by the amplifier when delivering ``p`` watts."""
    if p < 0 or p > pa.p_sat:
        raise ValueError(f"output power {p!r} outside [0, p_sat={pa.p_sat!r}]")
    v = pa.variant
    if v is PaVariant.IDEAL:
        return p
    if v is PaVariant.CLASS_A:
        return 2.0 * pa.p_sat
    if v is PaVariant.CLASS_B:
        return 4.0 / math.pi * math.sqrt(pa.p_sat * p)
    if v is PaVariant.ENVELOPE_TRACKING:
        scale = (1.0 + ET_A) * pa.eta_max
        return (ET_A * pa.p_sat + p) / scale
    # Doherty: two branches in the normalised output xi = p / p_sat.
    ell = pa.ell
    xi = p / pa.p_sat
    root = math.sqrt(xi)
    if xi <= 1.0 / ell**2:
        shape = root
    else:
        shape = (ell + 1) * root - 1.0
    return 4.0 * pa.p_sat / (ell * math.pi) * shape


def pa_coefficients(pa: PaClass) -> tuple[float, float, float]:
    """Return ``(P_PA0, beta, alpha)`` so that P_PA(p) = P_PA0 + beta p^alpha."""
    v = pa.variant
    if v is PaVariant.IDEAL:
        return 0.0, 1.0, 1.0
    if v is PaVariant.CLASS_A:
        return 2.0 * pa.p_sat, 0.0, 1.0
    if v is PaVariant.CLASS_B or (v is PaVariant.DOHERTY and pa.ell == 1):
        return 0.0, 4.0 / math.pi * math.sqrt(pa.p_sat), 0.5
    if v is PaVariant.ENVELOPE_TRACKING:
        scale = (1.0 + ET_A) * pa.eta_max
        return ET_A * pa.p_sat / scale, 1.0 / scale, 1.0
    raise ValueError(
        f"{pa.ell}-way Doherty has no exact P0 + gamma p^alpha form; "
        "only ell = 1 is accepted"
    )


@dataclass(frozen=True)
class ActiveModel:
    """Per-slot active consumption ``p0 + gamma * p**alpha`` for ``p <= p_max``."""

    p0: float
    gamma: float
    alpha: float
    p_max: float

    def __post_init__(self):
        if not 0.0 < self.alpha <= 1.0:
            raise ValueError(f"alpha must lie in (0, 1], got {self.alpha!r}")
        if self.gamma < 0 or self.p0 < 0:
            raise ValueError("p0 and gamma must be non-negative")
        if not self.p_max > 0:
            raise ValueError(f"p_max must be positive, got {self.p_max!r}")

    def slot_power(self, p):
        """Average consumed power of one active slot at transmit power ``p``."""
        return self.p0 + self.gamma * np.power(p, self.alpha)

    @property
    def p_cons_max(self) -> float:
        """Consumption with every slot at maximal power."""
        return self.p0 + self.gamma * self.p_max**self.alpha


def active_model_from_pa(
    pa: PaClass, lf: LossFactors, p_rf_bb: float, p_max: float
) -> ActiveModel:
    """Fold a PA class and the loss factors into an :class:`ActiveModel`.

    ``p_rf_bb`` is the RF chain plus baseband consumption, before losses.
    """
    if p_rf_bb < 0:
        raise ValueError("p_rf_bb must be non-negative")
    pa0, beta, alpha = pa_coefficients(pa)
    eta = efficiency(lf)
    return ActiveModel(p0=(p_rf_bb + pa0) / eta, gamma=beta / eta, alpha=alpha, p_max=p_max)


def class_b_model(
    p0: float = 110.0,
    p_max: float = 20.0,
    backoff_db: float = 8.0,
    losses: LossFactors = TABLE_I_LOSSES,
) -> ActiveModel:
    """Class B amplifier model with a given total load-independent power ``p0``."""
    pa = PaClass.from_backoff(PaVariant.CLASS_B, p_max, backoff_db)
    return active_model_from_pa(pa, losses, p0 * efficiency(losses), p_max)


@dataclass(frozen=True)
class SleepMode:
    t_start: float
    power: float


@dataclass(frozen=True)
class SleepModel:
    """Piecewise-constant sleep power, mode ``s`` active from ``t_start``.

    A single mode is the constant sleep model.
    """

    modes: tuple[SleepMode, ...]

    def __post_init__(self):
        modes = tuple(m if isinstance(m, SleepMode) else SleepMode(*m) for m in self.modes)
        object.__setattr__(self, "modes", modes)
        if not modes:
            raise ValueError("a sleep model needs at least one mode")
        if modes[0].t_start != 0:
            raise ValueError("the first sleep mode must start at t = 0")
        for prev, cur in zip(modes, modes[1:]):
            if cur.t_start <= prev.t_start:
                raise ValueError("sleep mode start times must strictly increase")
            if cur.power > prev.power:
                raise ValueError("sleep powers must be non-increasing")
        if any(m.power < 0 for m in modes):
            raise ValueError("sleep powers must be non-negative")

    @classmethod
    def constant(cls, power: float) -> SleepModel:
        return cls((SleepMode(0.0, power),))

    @property
    def is_constant(self) -> bool:
        return len(self.modes) == 1

    @property
    def p_sleep(self) -> float:
        """Power of the first (shallowest) mode."""
        return self.modes[0].power

    def shallowest(self) -> SleepModel:
        """Constant model at the first mode's power."""
        return SleepModel.constant(self.modes[0].power)

    def energy(self, t: float) -> float:
        return sleep_energy(self, t)


TABLE_II_P0 = 110.0
TABLE_II_P_MAX = 20.0
TABLE_II_SLEEP = SleepModel(
    (
        SleepMode(0.0, 50.0),
        SleepMode(6e-3, 25.0),
        SleepMode(50e-3, 1.0),
        SleepMode(1.0, 0.1),
    )
)
TABLE_II_CONSTANT_SLEEP = TABLE_II_SLEEP.shallowest()


def sleep_energy(model: SleepModel, t: float) -> float:
    """Energy spent sleeping for ``t`` seconds following the full mode schedule."""
    if t < 0:
        raise ValueError(f"sleep duration must be non-negative, got {t!r}")
    energy = 0.0
    modes = model.modes
    for i, mode in enumerate(modes):
        end = modes[i + 1].t_start if i + 1 < len(modes) else math.inf
        if t <= end:
            return energy + (t - mode.t_start) * mode.power
        energy += (end - mode.t_start) * mode.power
    return energy  # pragma: no cover


def sleep_energy_in_mode(model: SleepModel, s: int, t: float) -> float:
    """Sleep energy when the schedule stops deepening at mode ``s``.

    Requires ``t >= t_start`` of mode ``s``.
    """
    mode = model.modes[s]
    return sleep_energy(model, mode.t_start) + (t - mode.t_start) * mode.power


@dataclass(frozen=True)
class LinkParams:
    """Frame of ``n_slots`` symbols of ``symbol_duration`` seconds."""

    n_slots: int
    symbol_duration: float
    sigma2: float
    rate: float = 0.0

    def __post_init__(self):
        if int(self.n_slots) != self.n_slots or self.n_slots < 1:
            raise ValueError(f"n_slots must be a positive integer, got {self.n_slots!r}")
        object.__setattr__(self, "n_slots", int(self.n_slots))
        if not self.symbol_duration > 0:
            raise ValueError("symbol_duration must be positive")
        if not self.sigma2 > 0:
            raise ValueError("sigma2 must be positive")
        if not self.rate >= 0:
            raise ValueError("rate must be non-negative")

    @property
    def frame_duration(self) -> float:
        return self.n_slots * self.symbol_duration

    def with_rate(self, rate: float) -> LinkParams:
        return replace(self, rate=rate)


@dataclass(frozen=True, eq=False)
class Allocation:
    """Number of active slots and the per-slot transmit powers of a frame.

    Active slots come first; ``powers[n] == 0`` for ``n >= n_active``.
    """

    n_active: int
    powers: np.ndarray = field(repr=False)

    def __post_init__(self):
        powers = np.array(self.powers, dtype=np.float64)
        powers.setflags(write=False)
        object.__setattr__(self, "powers", powers)
        if not 0 <= self.n_active <= powers.size:
            raise ValueError("n_active must lie in [0, N]")
        if np.any(powers < 0):
            raise ValueError("powers must be non-negative")
        if np.any(powers[self.n_active:] != 0):
            raise ValueError("slots past n_active must carry zero power")

    @classmethod
    def from_blocks(cls, n_slots: int, blocks: Iterable[tuple[int, float]]) -> Allocation:
        """Lay out ``(count, power)`` blocks contiguously from the frame start."""
        powers = np.zeros(n_slots)
        pos = 0
        for count, power in blocks:
            powers[pos:pos + count] = power
            pos += count
        if pos > n_slots:
            raise ValueError("blocks exceed the frame length")
        return cls(pos, powers)

    @property
    def n_slots(self) -> int:
        return self.powers.size

    def achieved_rate(self, sigma2: float) -> float:
        """Frame-average rate in bits per channel use."""
        return float(np.log2(1.0 + self.powers / sigma2).sum() / self.n_slots)

    def __repr__(self):
        return f"Allocation(n_active={self.n_active}, n_slots={self.n_slots})"


def uniform_power(rate_per_slot: float, sigma2: float) -> float:
    """Transmit power carrying ``rate_per_slot`` bits per channel use."""
    return math.expm1(rate_per_slot * math.log(2.0)) * sigma2


def per_slot_rate(power: float, sigma2: float) -> float:
    return math.log2(1.0 + power / sigma2)


def p_cons(am: ActiveModel, sm: SleepModel, lp: LinkParams, alloc: Allocation) -> float:
    """Frame-average consumed power of an allocation."""
    n = lp.n_slots
    if alloc.n_slots != n:
        raise ValueError("allocation length does not match n_slots")
    na = alloc.n_active
    load = float(np.power(alloc.powers[:na], am.alpha).sum()) if na else 0.0
    t_sleep = (n - na) * lp.symbol_duration
    return na / n * am.p0 + am.gamma / n * load + sleep_energy(sm, t_sleep) / lp.frame_duration


def p_cons_blocks(
    am: ActiveModel, sm: SleepModel, lp: LinkParams, blocks: Sequence[tuple[int, float]]
) -> float:
    """Same as :func:`p_cons` for an allocation given as ``(count, power)`` blocks."""
    n = lp.n_slots
    na = sum(c for c, _ in blocks)
    load = sum(c * p**am.alpha for c, p in blocks if c)
    t_sleep = (n - na) * lp.symbol_duration
    return na / n * am.p0 + am.gamma / n * load + sleep_energy(sm, t_sleep) / lp.frame_duration
