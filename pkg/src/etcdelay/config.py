"""Declarative scenario configuration: JSON schema, validation, building.

A scenario is one top-level JSON object:

    {
      "name": "...",
      "system":    {"A1": [[...]], "A2": [[...]], "B": [[...]],
                    "tau": "<expr in t>", "tau_bar": <float>,
                    "phi": ["<expr in s>", ...]},
      "synthesis": {"b": <float>, "h": <float>},
      "trigger":   {"alpha": <float>, "beta": <float>, "sigma": <float>,
                    "baseline_mode": "history-sup" | "initial-value"},
      "mode":      "synthesize" | "verify-given-K",
      "controller": {"K" or "R": [[...]], "P" or "Q": [[...]]},   # verify mode only
      "sim":       {"step": <float>, "horizon": <float>, "event_tol": <float>,
                    "max_events": <int>, "interp": "linear" | "cubic-hermite"},
      "output":    {"trajectory_csv": "...", "events_csv": "...", "report": "..."}
    }

Matrices are arrays of row arrays; expressions are strings.  Validation is
eager: every schema, expression and cross-field dimension problem is
reported (with its field path) before any numerics run.
"""

import json
from dataclasses import dataclass
from typing import Optional

from .errors import ConfigError, ExprSyntaxError
from .expr import parse_expr
from .lmi import SynthesisParams, SystemMatrices, design_from_gain
from .sim import LinearDelaySystem, SimConfig
from .trigger import TriggerConfig

MODES = ("synthesize", "verify-given-K")


@dataclass(frozen=True)
class ScenarioConfig:
    """Validated, JSON-round-trippable scenario description."""

    name: str
    A1: tuple
    A2: tuple
    B: tuple
    tau: str
    tau_bar: float
    phi: tuple
    b: float
    h: float
    alpha: float
    beta: float
    sigma: float
    baseline_mode: str = "history-sup"
    mode: str = "synthesize"
    K: Optional[tuple] = None
    P: Optional[tuple] = None
    Q: Optional[tuple] = None
    R: Optional[tuple] = None
    step: float = 0.01
    horizon: float = 10.0
    event_tol: float = 1e-10
    max_events: int = 10_000
    interp: str = "linear"
    trajectory_csv: Optional[str] = None
    events_csv: Optional[str] = None
    report_path: Optional[str] = None

    @property
    def n(self):
        return len(self.A1)

    @property
    def m(self):
        return len(self.B[0])

    def to_json_dict(self):
        d = {
            "name": self.name,
            "system": {
                "A1": _mat_to_lists(self.A1),
                "A2": _mat_to_lists(self.A2),
                "B": _mat_to_lists(self.B),
                "tau": self.tau,
                "tau_bar": self.tau_bar,
                "phi": list(self.phi),
            },
            "synthesis": {"b": self.b, "h": self.h},
            "trigger": {
                "alpha": self.alpha,
                "beta": self.beta,
                "sigma": self.sigma,
                "baseline_mode": self.baseline_mode,
            },
            "mode": self.mode,
            "sim": {
                "step": self.step,
                "horizon": self.horizon,
                "event_tol": self.event_tol,
                "max_events": self.max_events,
                "interp": self.interp,
            },
        }
        ctrl = {}
        for key in ("K", "P", "Q", "R"):
            v = getattr(self, key)
            if v is not None:
                ctrl[key] = _mat_to_lists(v)
        if ctrl:
            d["controller"] = ctrl
        out = {}
        if self.trajectory_csv:
            out["trajectory_csv"] = self.trajectory_csv
        if self.events_csv:
            out["events_csv"] = self.events_csv
        if self.report_path:
            out["report"] = self.report_path
        if out:
            d["output"] = out
        return d

    def to_json(self):
        return json.dumps(self.to_json_dict(), indent=2)

    def build(self):
        """Produce the typed objects the pipeline consumes:
        (system, synthesis, trigger, sim, mode, controller-or-None)."""
        sysm = SystemMatrices(A1=_tuples_to_mat(self.A1), A2=_tuples_to_mat(self.A2),
                              B=_tuples_to_mat(self.B))
        tau = parse_expr(self.tau, "t")
        phi = [parse_expr(p, "s") for p in self.phi]
        system = LinearDelaySystem(matrices=sysm, tau=tau, tau_bar=self.tau_bar, phi=phi)
        sp = SynthesisParams(b=self.b, h=self.h)
        cfg = TriggerConfig(alpha=self.alpha, beta=self.beta, sigma=self.sigma,
                            baseline_mode=self.baseline_mode)
        sim_cfg = SimConfig(step=self.step, horizon=self.horizon, event_tol=self.event_tol,
                            max_events=self.max_events, interp=self.interp)
        controller = None
        if self.mode == "verify-given-K":
            controller = design_from_gain(
                sysm, sp,
                K=_tuples_to_mat(self.K) if self.K is not None else None,
                P=_tuples_to_mat(self.P) if self.P is not None else None,
                Q=_tuples_to_mat(self.Q) if self.Q is not None else None,
                R=_tuples_to_mat(self.R) if self.R is not None else None,
            )
        return system, sp, cfg, sim_cfg, self.mode, controller


def _mat_to_lists(rows):
    return [list(r) for r in rows]


def _tuples_to_mat(rows):
    return [list(r) for r in rows]


def _require(d, key, path, types, type_name):
    if key not in d:
        raise ConfigError(f"{path}.{key}" if path else key, "missing required field")
    v = d[key]
    if not isinstance(v, types) or isinstance(v, bool):
        raise ConfigError(f"{path}.{key}" if path else key, f"must be {type_name}")
    return v


def _number(d, key, path):
    return float(_require(d, key, path, (int, float), "a number"))


def _matrix(d, key, path, rows=None, cols=None):
    v = _require(d, key, path, list, "an array of row arrays")
    fp = f"{path}.{key}" if path else key
    if not v or not all(isinstance(r, list) and r for r in v):
        raise ConfigError(fp, "must be a non-empty array of non-empty row arrays")
    width = len(v[0])
    for i, r in enumerate(v):
        if len(r) != width:
            raise ConfigError(fp, f"row {i} has {len(r)} entries, expected {width}")
        for j, x in enumerate(r):
            if isinstance(x, bool) or not isinstance(x, (int, float)):
                raise ConfigError(fp, f"entry [{i}][{j}] is not a number")
    if rows is not None and len(v) != rows:
        raise ConfigError(fp, f"must have {rows} rows, got {len(v)}")
    if cols is not None and width != cols:
        raise ConfigError(fp, f"must have {cols} columns, got {width}")
    return tuple(tuple(float(x) for x in r) for r in v)


def from_json_dict(d):
    """Validate a parsed JSON object into a ScenarioConfig."""
    if not isinstance(d, dict):
        raise ConfigError("<root>", "top level must be a JSON object")
    name = _require(d, "name", "", str, "a string")
    system = _require(d, "system", "", dict, "an object")
    A1 = _matrix(system, "A1", "system")
    n = len(A1)
    if len(A1[0]) != n:
        raise ConfigError("system.A1", f"must be square, got {n}x{len(A1[0])}")
    A2 = _matrix(system, "A2", "system", rows=n, cols=n)
    B = _matrix(system, "B", "system")
    if len(B) != n:
        raise ConfigError(
            "system.B", f"must have {n} rows to match system.A1, got {len(B)}"
        )
    m = len(B[0])
    tau = _require(system, "tau", "system", str, "an expression string")
    tau_bar = _number(system, "tau_bar", "system")
    phi_raw = _require(system, "phi", "system", list, "an array of expression strings")
    if len(phi_raw) != n:
        raise ConfigError(
            "system.phi", f"must supply {n} expressions to match system.A1, got {len(phi_raw)}"
        )
    for i, p in enumerate(phi_raw):
        if not isinstance(p, str):
            raise ConfigError(f"system.phi[{i}]", "must be an expression string")
    _parse_checked(tau, "t", "system.tau")
    for i, p in enumerate(phi_raw):
        _parse_checked(p, "s", f"system.phi[{i}]")

    synth = _require(d, "synthesis", "", dict, "an object")
    b = _number(synth, "b", "synthesis")
    h = _number(synth, "h", "synthesis")

    trig = _require(d, "trigger", "", dict, "an object")
    alpha = _number(trig, "alpha", "trigger")
    beta = _number(trig, "beta", "trigger")
    sigma = _number(trig, "sigma", "trigger")
    baseline_mode = trig.get("baseline_mode", "history-sup")
    if baseline_mode not in ("history-sup", "initial-value"):
        raise ConfigError("trigger.baseline_mode",
                          "must be 'history-sup' or 'initial-value'")

    mode = d.get("mode", "synthesize")
    if mode not in MODES:
        raise ConfigError("mode", f"must be one of {MODES}")

    K = P = Q = R = None
    ctrl = d.get("controller")
    if ctrl is not None and mode != "verify-given-K":
        raise ConfigError("controller", "only allowed in verify-given-K mode")
    if mode == "verify-given-K":
        if not isinstance(ctrl, dict):
            raise ConfigError("controller", "verify-given-K mode requires a controller object")
        if ("K" in ctrl) == ("R" in ctrl):
            raise ConfigError("controller", "supply exactly one of K or R")
        if ("P" in ctrl) == ("Q" in ctrl):
            raise ConfigError("controller", "supply exactly one of P or Q")
        if "K" in ctrl:
            K = _matrix(ctrl, "K", "controller", rows=m, cols=n)
        if "R" in ctrl:
            R = _matrix(ctrl, "R", "controller", rows=m, cols=n)
        if "P" in ctrl:
            P = _matrix(ctrl, "P", "controller", rows=n, cols=n)
        if "Q" in ctrl:
            Q = _matrix(ctrl, "Q", "controller", rows=n, cols=n)

    simd = _require(d, "sim", "", dict, "an object")
    step = _number(simd, "step", "sim")
    horizon = _number(simd, "horizon", "sim")
    event_tol = float(simd.get("event_tol", 1e-10))
    max_events = simd.get("max_events", 10_000)
    if isinstance(max_events, bool) or not isinstance(max_events, int):
        raise ConfigError("sim.max_events", "must be an integer")
    interp = simd.get("interp", "linear")
    if interp not in ("linear", "cubic-hermite"):
        raise ConfigError("sim.interp", "must be 'linear' or 'cubic-hermite'")

    out = d.get("output") or {}
    if not isinstance(out, dict):
        raise ConfigError("output", "must be an object")

    cfg = ScenarioConfig(
        name=name, A1=A1, A2=A2, B=B, tau=tau, tau_bar=tau_bar,
        phi=tuple(phi_raw), b=b, h=h, alpha=alpha, beta=beta, sigma=sigma,
        baseline_mode=baseline_mode, mode=mode, K=K, P=P, Q=Q, R=R,
        step=step, horizon=horizon, event_tol=event_tol,
        max_events=max_events, interp=interp,
        trajectory_csv=out.get("trajectory_csv"),
        events_csv=out.get("events_csv"),
        report_path=out.get("report"),
    )
    # surface parameter/value problems now, with config context
    try:
        cfg.build()
    except ConfigError:
        raise
    except Exception as err:
        raise ConfigError(name, str(err)) from err
    return cfg


def _parse_checked(src, var, path):
    try:
        parse_expr(src, var)
    except ExprSyntaxError as err:
        raise ConfigError(path, str(err)) from None


def load_config(path):
    """Read, parse and validate a scenario config file."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            data = json.load(fh)
    except OSError as err:
        raise ConfigError(str(path), f"cannot read config: {err}") from None
    except json.JSONDecodeError as err:
        raise ConfigError(str(path), f"invalid JSON: {err}") from None
    return from_json_dict(data)


def dump_config(cfg, path):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(cfg.to_json())
        fh.write("\n")
