"""Closed-loop simulation of the event-triggered delay system.

Integration is classical fixed-step RK4; the delayed state at stage times
comes from the stored-solution interpolant (linear by default, cubic
Hermite optionally) and from the initial function for arguments <= 0.
Stage lookups that land past the newest node -- possible only when the
delay nearly vanishes -- extrapolate to first order, so accuracy there
degrades to the step size; keep steps small if the delay can reach zero.

Trigger monitoring happens at every committed node: on a sign change of
C - zeta the crossing is localized by bisection on the step interpolant,
the held input is resampled there, and integration restarts from the
localized event time.  The output grid therefore carries the regular
cadence plus event-adjacent nodes.

Each run is single-threaded and deterministic: identical inputs produce
bit-identical results.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from . import backend
from .errors import DelayBoundError, DimensionError, ExprEvalError, ParameterError
from .expr import ScalarExpr
from .lmi import SystemMatrices

_INTERP_MODES = ("linear", "cubic-hermite")


@dataclass(frozen=True, eq=False)
class LinearDelaySystem:
    """Plant matrices plus the delay function tau(t) in [0, tau_bar] and the
    initial function phi on [-tau_bar, 0] (one expression per coordinate)."""

    matrices: SystemMatrices
    tau: ScalarExpr
    tau_bar: float
    phi: list

    def __post_init__(self):
        if not (math.isfinite(self.tau_bar) and self.tau_bar > 0.0):
            raise ParameterError(f"tau_bar must be positive, got {self.tau_bar}")
        if len(self.phi) != self.matrices.n:
            raise DimensionError(
                f"phi must supply {self.matrices.n} coordinate expressions, got {len(self.phi)}"
            )

    def phi_vector(self, s):
        return np.array([p(s) for p in self.phi], dtype=np.float64)


@dataclass(frozen=True)
class SimConfig:
    step: float
    horizon: float
    event_tol: float = 1e-10
    max_events: int = 10_000      # per unit-length window (Zeno guard)
    interp: str = "linear"

    def __post_init__(self):
        if not self.step > 0.0:
            raise ParameterError(f"step must be positive, got {self.step}")
        if not self.horizon > 0.0:
            raise ParameterError(f"horizon must be positive, got {self.horizon}")
        if not 0.0 < self.event_tol < self.step:
            raise ParameterError("event_tol must satisfy 0 < event_tol < step")
        if self.max_events < 1:
            raise ParameterError("max_events must be at least 1")
        if self.interp not in _INTERP_MODES:
            raise ParameterError(f"interp must be one of {_INTERP_MODES}")


@dataclass(frozen=True, eq=False)
class SimResult:
    """Sampled closed-loop trajectory with the event log.

    `events` holds the input-update times (t0 = 0 included); `inputs[k]`
    is the value held on [t_k, t_{k+1}).  `u` repeats the active held
    input at every sample.  V is the quadratic form x' P x per sample.
    """

    times: np.ndarray          # (N,)
    states: np.ndarray         # (N, n)
    V: np.ndarray              # (N,)
    u: np.ndarray              # (N, m)
    events: np.ndarray         # (E,)
    event_indices: np.ndarray  # (E,) indices into times
    inputs: np.ndarray         # (E, m)
    v0_baseline: float
    zeno_guard_hit: bool
    aborted: bool = False
    diagnostic: str = ""
    _system: object = field(default=None, repr=False)
    _interp: str = field(default="linear", repr=False)
    _dl: object = field(default=None, repr=False)
    _dr: object = field(default=None, repr=False)

    @property
    def inter_event_gaps(self):
        return np.diff(self.events)

    def history_eval(self, t_query):
        """State at an arbitrary time: the initial function for t <= 0,
        the stored-solution interpolant (matching the run's interp mode)
        for 0 < t <= times[-1]."""
        if t_query <= 0.0:
            return self._system.phi_vector(t_query)
        ts = self.times
        if t_query > ts[-1]:
            raise ParameterError(f"t_query {t_query} is beyond the stored trajectory")
        j = int(np.searchsorted(ts, t_query, side="right") - 1)
        if j >= len(ts) - 1:
            return self.states[-1].copy()
        t0, t1 = ts[j], ts[j + 1]
        w = (t_query - t0) / (t1 - t0)
        if self._interp == "cubic-hermite":
            h = t1 - t0
            w2, w3 = w * w, w * w * w
            c0 = 2.0 * w3 - 3.0 * w2 + 1.0
            c1 = (w3 - 2.0 * w2 + w) * h
            c2 = -2.0 * w3 + 3.0 * w2
            c3 = (w3 - w2) * h
            return (c0 * self.states[j] + c1 * self._dr[j]
                    + c2 * self.states[j + 1] + c3 * self._dl[j + 1])
        return self.states[j] + w * (self.states[j + 1] - self.states[j])


def rhs(t, x, x_delayed, u_held, sys):
    """Open-form right-hand side: A1 x + A2 x_delayed + B u_held."""
    x = np.asarray(x, dtype=np.float64).reshape(-1)
    x_delayed = np.asarray(x_delayed, dtype=np.float64).reshape(-1)
    u_held = np.asarray(u_held, dtype=np.float64).reshape(-1)
    if x.shape[0] != sys.n or x_delayed.shape[0] != sys.n or u_held.shape[0] != sys.m:
        raise DimensionError("rhs arguments do not match the system dimensions")
    return sys.A1 @ x + sys.A2 @ x_delayed + sys.B @ u_held


def _pack_programs(exprs):
    ops = np.concatenate([e.ops for e in exprs])
    args = np.concatenate([e.args for e in exprs])
    consts = np.concatenate([e.consts for e in exprs])
    opoff = np.zeros(len(exprs) + 1, dtype=np.int32)
    coff = np.zeros(len(exprs) + 1, dtype=np.int32)
    for i, e in enumerate(exprs):
        opoff[i + 1] = opoff[i] + len(e.ops)
        coff[i + 1] = coff[i] + len(e.consts)
    return ops, args, opoff, consts, coff


def baseline_from_phi(system, P, step, mode="history-sup"):
    """Lyapunov baseline from the initial function: max of phi(s)' P phi(s)
    over the grid of ceil(tau_bar/step)+1 points ('history-sup'), or the
    value at s = 0 ('initial-value').  Grid resolution bounds the accuracy
    of the sup."""
    if mode == "initial-value":
        x0 = system.phi_vector(0.0)
        v = float(x0 @ P @ x0)
        if v <= 0.0:
            raise ParameterError("initial-value baseline requires phi(0) != 0")
        return v
    npts = int(math.ceil(system.tau_bar / step)) + 1
    grid = np.linspace(-system.tau_bar, 0.0, npts)
    best = 0.0
    prev = None
    jumps = []
    scale = 0.0
    for s in grid:
        xs = system.phi_vector(float(s))
        if not np.all(np.isfinite(xs)):
            raise ExprEvalError("initial function not finite", f"phi({s})")
        best = max(best, float(xs @ P @ xs))
        scale = max(scale, float(np.max(np.abs(xs))))
        if prev is not None:
            jumps.append(float(np.max(np.abs(xs - prev))))
        prev = xs
    if jumps:
        mean_jump = sum(jumps) / len(jumps)
        tol = 50.0 * mean_jump + 1e-12 * (1.0 + scale)
        worst = max(jumps)
        if worst > tol:
            i = jumps.index(worst)
            raise ParameterError(
                f"phi appears discontinuous near s = {grid[i + 1]:.6g} "
                f"(grid jump {worst:.3g} vs tolerance {tol:.3g})"
            )
    if best <= 0.0:
        raise ParameterError("history-sup baseline is zero (phi vanishes identically?)")
    return best


def simulate(system, design, cfg, sim, backend_name=None):
    """Run the event-triggered closed loop; see the module docstring.

    The underlying kernel reports Zeno-guard stops through the result
    (zeno_guard_hit); a delay-bound violation raises DelayBoundError and a
    diverging state returns an aborted result carrying the partial
    trajectory.  Hypothesis checks (h > alpha + sigma etc.) are not
    enforced here -- exploring invalid parameters is allowed.
    """
    sysm = system.matrices
    n, m = sysm.n, sysm.m
    if design.P.shape != (n, n) or design.K.shape != (m, n):
        raise DimensionError("controller dimensions do not match the system")
    if cfg.is_bound:
        if not (np.array_equal(cfg.P, design.P) and np.array_equal(cfg.K, design.K)):
            raise ParameterError("trigger config is bound to a different controller")
    else:
        cfg = cfg.bound_to(design, sysm.B)

    v0 = baseline_from_phi(system, design.P, sim.step, cfg.baseline_mode)
    pbk = design.P @ sysm.B @ design.K
    phi_ops, phi_args, phi_opoff, phi_consts, phi_coff = _pack_programs(system.phi)

    kern = backend.get_kernel(backend_name)
    (status, status_time, ts, xs, dl, dr, ev_t, ev_i, zeno_hit) = kern.simulate_closed_loop(
        n, m,
        np.ascontiguousarray(sysm.A1).ravel(),
        np.ascontiguousarray(sysm.A2).ravel(),
        np.ascontiguousarray(sysm.B).ravel(),
        np.ascontiguousarray(design.K).ravel(),
        np.ascontiguousarray(design.P).ravel(),
        np.ascontiguousarray(pbk).ravel(),
        system.tau.ops, system.tau.args, system.tau.consts,
        phi_ops, phi_args, phi_opoff, phi_consts, phi_coff,
        system.tau_bar, cfg.alpha, cfg.beta, cfg.sigma, v0,
        sim.step, sim.horizon, sim.event_tol, sim.max_events,
        1 if sim.interp == "cubic-hermite" else 0,
    )

    if status == 3:
        raise DelayBoundError(
            f"delay function left [0, {system.tau_bar}] near t = {status_time:.6g}"
        )
    if status == 4 and len(ts) == 0:
        raise ExprEvalError("expression evaluation failed during setup", "tau/phi")

    times = np.asarray(ts, dtype=np.float64)
    states = np.asarray(xs, dtype=np.float64).reshape(-1, n)
    hermite = sim.interp == "cubic-hermite"
    dl = np.asarray(dl, dtype=np.float64).reshape(-1, n) if hermite else None
    dr = np.asarray(dr, dtype=np.float64).reshape(-1, n) if hermite else None
    events = np.asarray(ev_t, dtype=np.float64)
    event_indices = np.asarray(ev_i, dtype=np.int64)
    V = np.einsum("ij,jk,ik->i", states, design.P, states)
    inputs = states[event_indices] @ design.K.T
    seg = np.searchsorted(events, times, side="right") - 1
    u = inputs[seg]

    aborted = status in (2, 4)
    diagnostic = ""
    if status == 2:
        diagnostic = f"state became non-finite near t = {status_time:.6g}"
    elif status == 4:
        diagnostic = f"expression evaluation failed near t = {status_time:.6g}"

    return SimResult(
        times=times, states=states, V=V, u=u,
        events=events, event_indices=event_indices, inputs=inputs,
        v0_baseline=v0, zeno_guard_hit=bool(zeno_hit),
        aborted=aborted, diagnostic=diagnostic,
        _system=system, _interp=sim.interp, _dl=dl, _dr=dr,
    )
