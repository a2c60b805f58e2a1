"""Plain-text scenario files: one ``key = value`` per line, ``#`` comments.

Required keys are ``n_slots``, ``symbol_duration_s`` and ``sigma2_w``; every
other key has a default taken from the reference power model (20 W maximal
transmit power, 110 W load-independent power, class B amplifier with 8 dB
back-off, four sleep modes).
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field, fields, replace

from .models import (
    TABLE_I_LOSSES,
    TABLE_II_P0,
    TABLE_II_P_MAX,
    TABLE_II_SLEEP,
    ActiveModel,
    LinkParams,
    LossFactors,
    PaClass,
    PaVariant,
    SleepMode,
    SleepModel,
    active_model_from_pa,
    efficiency,
    pa_coefficients,
)
from .tdma import TdmaUser

SOLVERS = ("exact", "asymptotic", "uniform", "rush", "successive", "tdma")
SWEEP_VARS = ("rate", "se", "rate_pair")
REQUIRED = ("n_slots", "symbol_duration_s", "sigma2_w")

_SLEEP_KEY = re.compile(r"sleep_mode_(\d+)_(start_s|power_w)$")


class ScenarioError(ValueError):
    """Configuration problem; ``line`` is the 1-based line number if known."""

    def __init__(self, message, line=None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line else message)


@dataclass(frozen=True)
class Scenario:
    n_slots: int
    symbol_duration_s: float
    sigma2_w: float
    p_max_w: float = TABLE_II_P_MAX
    p0_w: float = TABLE_II_P0
    pa_class: str = "classb"
    backoff_db: float = 8.0
    eta_max: float | None = None
    sigma_dc: float = TABLE_I_LOSSES.sigma_dc
    sigma_ms: float = TABLE_I_LOSSES.sigma_ms
    sigma_cool: float = TABLE_I_LOSSES.sigma_cool
    sleep_modes: tuple[SleepMode, ...] = TABLE_II_SLEEP.modes
    rolloff: float = 0.1
    sweep_var: str = "rate"
    sweep_lo: float = 0.0
    sweep_hi: float | None = None
    sweep_points: int = 50
    solvers: tuple[str, ...] = ("exact", "asymptotic", "uniform", "rush")
    users: tuple[tuple[float, float], ...] = ()
    warnings: tuple[str, ...] = field(default=(), compare=False)

    def __post_init__(self):
        try:
            self.link()
            self.sleep_model()
            self.active_model()
        except ValueError as exc:
            raise ScenarioError(str(exc)) from None
        if not 0.0 <= self.rolloff <= 1.0:
            raise ScenarioError("rolloff must lie in [0, 1]")
        if self.sweep_var not in SWEEP_VARS:
            raise ScenarioError(f"sweep_var must be one of {', '.join(SWEEP_VARS)}")
        if self.sweep_points < 0:
            raise ScenarioError("sweep_points must be non-negative")
        if self.sweep_lo < 0:
            raise ScenarioError("sweep_lo must be non-negative")
        if self.sweep_hi is not None and self.sweep_hi < self.sweep_lo:
            raise ScenarioError("sweep_hi must not be below sweep_lo")
        bad = [s for s in self.solvers if s not in SOLVERS]
        if bad:
            raise ScenarioError(f"unknown solver(s) {', '.join(bad)}")
        if not self.solvers:
            raise ScenarioError("at least one solver is needed")
        if ("tdma" in self.solvers or self.sweep_var == "rate_pair") and not self.users:
            raise ScenarioError("tdma and rate_pair sweeps need a users line")
        for s2, w in self.users:
            if not (s2 > 0 and w >= 0):
                raise ScenarioError("users need sigma2 > 0 and weight >= 0")

    # Model construction -------------------------------------------------

    def losses(self) -> LossFactors:
        return LossFactors(self.sigma_dc, self.sigma_ms, self.sigma_cool)

    def pa(self) -> PaClass:
        kw = {"eta_max": self.eta_max} if self.eta_max is not None else {}
        return PaClass.from_backoff(PaVariant(self.pa_class), self.p_max_w, self.backoff_db, **kw)

    def active_model(self) -> ActiveModel:
        """Active model whose total load-independent power is ``p0_w``."""
        pa, lf = self.pa(), self.losses()
        pa0, _, _ = pa_coefficients(pa)
        p_rf_bb = self.p0_w * efficiency(lf) - pa0
        if p_rf_bb < -1e-9 * self.p0_w:
            raise ValueError(
                f"p0_w = {self.p0_w:g} W is below the amplifier's own idle draw "
                f"{pa0 / efficiency(lf):g} W"
            )
        return active_model_from_pa(pa, lf, max(p_rf_bb, 0.0), self.p_max_w)

    def sleep_model(self) -> SleepModel:
        return SleepModel(self.sleep_modes)

    def constant_sleep_model(self) -> SleepModel:
        return self.sleep_model().shallowest()

    def link(self, rate: float = 0.0) -> LinkParams:
        return LinkParams(self.n_slots, self.symbol_duration_s, self.sigma2_w, rate)

    def tdma_users(self, x: float) -> list[TdmaUser]:
        return [TdmaUser(s2, x * w) for s2, w in self.users]


# Parsing ----------------------------------------------------------------

_FLOAT_KEYS = {
    "symbol_duration_s", "sigma2_w", "p_max_w", "p0_w", "backoff_db", "eta_max",
    "sigma_dc", "sigma_ms", "sigma_cool", "rolloff", "sweep_lo", "sweep_hi",
}
_INT_KEYS = {"n_slots", "sweep_points"}
_STR_KEYS = {"pa_class", "sweep_var"}


def _to_float(v, key, line):
    try:
        x = float(v)
    except ValueError:
        raise ScenarioError(f"{key} expects a number, got {v!r}", line) from None
    if math.isnan(x):
        raise ScenarioError(f"{key} must not be NaN", line)
    return x


def _to_int(v, key, line):
    x = _to_float(v, key, line)
    if x != int(x):
        raise ScenarioError(f"{key} expects an integer, got {v!r}", line)
    return int(x)


def _parse_users(v, line):
    users = []
    for item in filter(None, (s.strip() for s in v.split(","))):
        parts = item.split(":")
        if len(parts) != 2:
            raise ScenarioError(f"users entries look like sigma2:weight, got {item!r}", line)
        users.append((_to_float(parts[0], "users", line), _to_float(parts[1], "users", line)))
    return tuple(users)


def parse_scenario(text: str) -> Scenario:
    """Parse scenario text; errors name the offending line."""
    values: dict = {}
    sleep: dict[int, dict[str, float]] = {}
    lines: dict[str, int] = {}
    for no, raw in enumerate(text.splitlines(), start=1):
        body = raw.split("#", 1)[0].strip()
        if not body:
            continue
        if "=" not in body:
            raise ScenarioError(f"expected 'key = value', got {body!r}", no)
        key, val = (s.strip() for s in body.split("=", 1))
        if key in lines:
            raise ScenarioError(f"duplicate key {key!r} (first on line {lines[key]})", no)
        lines[key] = no
        m = _SLEEP_KEY.match(key)
        if m:
            sleep.setdefault(int(m.group(1)), {})[m.group(2)] = _to_float(val, key, no)
        elif key in _FLOAT_KEYS:
            values[key] = None if val.lower() == "none" else _to_float(val, key, no)
        elif key in _INT_KEYS:
            values[key] = _to_int(val, key, no)
        elif key in _STR_KEYS:
            values[key] = val.lower()
        elif key == "solvers":
            values[key] = tuple(s.strip().lower() for s in val.split(",") if s.strip())
        elif key == "users":
            values[key] = _parse_users(val, no)
        else:
            raise ScenarioError(f"unknown key {key!r}", no)

    missing = [k for k in REQUIRED if k not in values]
    if missing:
        raise ScenarioError(f"missing required key(s): {', '.join(missing)}")
    if sleep:
        if sorted(sleep) != list(range(len(sleep))):
            raise ScenarioError("sleep modes must be numbered 0, 1, 2, ... without gaps")
        modes = []
        for i in range(len(sleep)):
            entry = sleep[i]
            if "power_w" not in entry:
                raise ScenarioError(f"sleep_mode_{i}_power_w is missing")
            modes.append(SleepMode(entry.get("start_s", 0.0), entry["power_w"]))
        values["sleep_modes"] = tuple(modes)
    try:
        return Scenario(**values)
    except ScenarioError as exc:
        # Point at the line of the first key mentioned in the message, if any.
        hit = next((ln for k, ln in lines.items() if k in str(exc)), None)
        if hit and exc.line is None:
            raise ScenarioError(str(exc), hit) from None
        raise


def _fmt(v) -> str:
    if v is None:
        return "none"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def render_scenario(sc: Scenario) -> str:
    """Canonical text for ``sc``; ``parse_scenario`` inverts it exactly."""
    out = []
    for f in fields(Scenario):
        name, v = f.name, getattr(sc, f.name)
        if name == "warnings":
            continue
        if name == "sleep_modes":
            for i, m in enumerate(v):
                out.append(f"sleep_mode_{i}_start_s = {float(m.t_start)!r}")
                out.append(f"sleep_mode_{i}_power_w = {float(m.power)!r}")
        elif name == "solvers":
            out.append(f"solvers = {', '.join(v)}")
        elif name == "users":
            if v:
                out.append("users = " + ", ".join(f"{s!r}:{w!r}" for s, w in v))
        elif name in _FLOAT_KEYS and v is not None:
            out.append(f"{name} = {float(v)!r}")
        else:
            out.append(f"{name} = {_fmt(v)}")
    return "\n".join(out) + "\n"


def with_warning(sc: Scenario, msg: str) -> Scenario:
    return replace(sc, warnings=sc.warnings + (msg,))
