"""Minimum-energy time-slot activation and power allocation for framed transmission."""

from .errors import BindingRegimeError, InfeasibleRateError
from .models import (
    LOSSLESS,
    TABLE_I_LOSSES,
    TABLE_II_CONSTANT_SLEEP,
    TABLE_II_SLEEP,
    ActiveModel,
    Allocation,
    LinkParams,
    LossFactors,
    PaClass,
    PaVariant,
    SleepMode,
    SleepModel,
    active_model_from_pa,
    class_b_model,
    efficiency,
    p_cons,
    pa_power,
    sleep_energy,
)
from .oracle import OracleResult, oracle_grid, oracle_structured
from .scalaropt import RaProblem, lambert_w0, minimize_convex, r_a, r_a_infinite_case
from .scenario import Scenario, ScenarioError, parse_scenario, render_scenario
from .single_user import (
    Regime,
    RegimeReport,
    allocate_asymptotic,
    allocate_exact,
    allocate_no_pmax,
    allocate_rush_to_sleep,
    allocate_uniform,
    ceil_floor,
    r_max,
)
from .sleep_sched import ModeCandidate, allocate_successive, feasible_modes
from .sweep import run_sweep
from .tdma import TdmaUser, tdma_allocate_linear, tdma_feasible, tdma_uniform_benchmark
from .tradeoff import EePoint, ee_for_se, ee_se_sweep_successive, max_ee

__version__ = "0.1.0"

__all__ = [
    "ActiveModel", "Allocation", "BindingRegimeError", "EePoint", "InfeasibleRateError",
    "LOSSLESS", "LinkParams", "LossFactors", "ModeCandidate", "OracleResult", "PaClass",
    "PaVariant", "RaProblem", "Regime", "RegimeReport", "Scenario", "ScenarioError",
    "SleepMode", "SleepModel", "TABLE_II_CONSTANT_SLEEP", "TABLE_II_SLEEP",
    "TABLE_I_LOSSES", "TdmaUser", "active_model_from_pa", "allocate_asymptotic",
    "allocate_exact", "allocate_no_pmax", "allocate_rush_to_sleep", "allocate_successive",
    "allocate_uniform", "ceil_floor", "class_b_model", "ee_for_se", "ee_se_sweep_successive",
    "efficiency", "feasible_modes", "lambert_w0", "max_ee", "minimize_convex",
    "oracle_grid", "oracle_structured", "p_cons", "pa_power", "parse_scenario", "r_a",
    "r_a_infinite_case", "r_max", "render_scenario", "run_sweep", "sleep_energy",
    "tdma_allocate_linear", "tdma_feasible", "tdma_uniform_benchmark",
]
