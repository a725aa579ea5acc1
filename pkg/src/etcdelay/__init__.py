"""Event-triggered stabilization of linear time-delay systems.

Gain synthesis through a negative-definiteness certificate, exponential
decay-rate certificates for the closed loop, event-triggered closed-loop
simulation with guaranteed-positive inter-event times, and a scenario CLI.
"""

from .backend import DEFAULT as BACKEND
from .config import ScenarioConfig, load_config
from .expr import ScalarExpr, eval_expr, parse_expr
from .halanay import (BoundCertificate, HalanayParams, HalanayRate,
                      certify_bound, integrate_comparison, solve_lambda)
from .lmi import (ControllerDesign, Feasibility, SynthesisParams, SystemMatrices,
                  build_lmi, design_from_gain, spectral_norm, synthesize_gain,
                  verify_feasible)
from .pipeline import DesignReport, design_controller
from .scenarios import BUILTINS, get_scenario
from .sim import LinearDelaySystem, SimConfig, SimResult, simulate
from .trigger import (DwellReport, TriggerConfig, dwell_constants,
                      min_dwell_time, threshold, trigger_value)

__version__ = "0.1.0"

__all__ = [
    "BACKEND", "BoundCertificate", "BUILTINS", "ControllerDesign",
    "DesignReport", "DwellReport", "Feasibility", "HalanayParams",
    "HalanayRate", "LinearDelaySystem", "ScalarExpr", "ScenarioConfig",
    "SimConfig", "SimResult", "SynthesisParams", "SystemMatrices",
    "TriggerConfig", "build_lmi", "certify_bound", "design_controller",
    "design_from_gain", "dwell_constants", "eval_expr", "get_scenario",
    "integrate_comparison", "load_config", "min_dwell_time", "parse_expr",
    "simulate", "solve_lambda", "spectral_norm", "synthesize_gain",
    "threshold", "trigger_value", "verify_feasible",
]
