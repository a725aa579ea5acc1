"""Decay-rate certificates for perturbed delay inequalities.

Covers non-negative functions v satisfying

    D+ v(t) <= -a v(t) + b sup{v(t+s) : -r <= s <= 0} + alpha ||v0||_r e^{-beta t}

with a > b + alpha.  Such functions obey v(t) <= ||v0||_r e^{-eta t} where
eta = min(lambda, beta) and lambda is the unique positive root of

    a = b e^{lambda r} + lambda + alpha.

This module solves that equation, certifies the exponential envelope on
sampled trajectories, and integrates the worst case the inequality admits
(the equality case) for validation.
"""

import math
from dataclasses import dataclass

import numpy as np

from . import backend
from .errors import NumericError, ParameterError

#: Relative slack allowed when certifying the exponential envelope.
CERTIFY_SLACK = 1e-9


@dataclass(frozen=True)
class HalanayParams:
    """Coefficients of the delay inequality; all strictly positive and
    a > b + alpha (otherwise no positive decay rate exists)."""

    a: float
    b: float
    alpha: float
    beta: float
    r: float

    def __post_init__(self):
        for name in ("a", "b", "alpha", "beta", "r"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0.0):
                raise ParameterError(f"{name} must be a positive finite real, got {v}")
        if not self.a > self.b + self.alpha:
            raise ParameterError(
                f"need a > b + alpha for a positive decay rate "
                f"(a={self.a}, b + alpha={self.b + self.alpha})"
            )


@dataclass(frozen=True)
class HalanayRate:
    lam: float   # positive root of a = b e^(lam r) + lam + alpha
    eta: float   # certified envelope rate, min(lam, beta)


def _rate_residual(p, lam):
    try:
        e = math.exp(lam * p.r)
    except OverflowError:
        return math.inf
    return p.b * e + lam + p.alpha - p.a


def solve_lambda(p):
    """Solve the decay-rate equation for its unique positive root.

    The residual f(lam) = b e^(lam r) + lam + alpha - a is strictly
    increasing with f(0) < 0, so the root is bracketed by doubling the
    upper end and pinned by bisection.  The result satisfies
    |f(lam)| <= 1e-12 * max(1, a).
    """
    tol = 1e-12 * max(1.0, p.a)
    lo = 0.0
    hi = 1.0
    doublings = 0
    while _rate_residual(p, hi) <= 0.0:
        hi *= 2.0
        doublings += 1
        if doublings > 200:  # unreachable for valid params; guards overflow
            raise NumericError("failed to bracket the decay-rate root")
    lam = hi
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        f = _rate_residual(p, mid)
        if abs(f) <= tol:
            lam = mid
            break
        if f > 0.0:
            hi = mid
        else:
            lo = mid
        lam = hi
    return HalanayRate(lam=lam, eta=min(lam, p.beta))


@dataclass(frozen=True)
class BoundCertificate:
    """Outcome of checking v(t) <= baseline * e^(-eta t) on samples."""

    passed: bool
    max_ratio: float      # max over t >= 0 of v(t) e^(eta t) / baseline
    max_ratio_time: float
    baseline: float
    eta: float


def certify_bound(times, values, p, rate, baseline_mode="history-sup"):
    """Certify the exponential envelope on a sampled trajectory.

    `times`/`values` must cover the history window [-r, 0] (the baseline is
    formed there) and the region t >= 0 being certified.  The baseline is
    the max over supplied history samples ('history-sup') or the sample at
    t = 0 ('initial-value'); no interpolation refinement is applied, so the
    history grid spacing bounds the baseline error.
    """
    times = np.asarray(times, dtype=np.float64)
    values = np.asarray(values, dtype=np.float64)
    if times.ndim != 1 or times.shape != values.shape:
        raise ParameterError("times and values must be 1-D arrays of equal length")
    if np.any(values < 0.0):
        raise ParameterError("trajectory values must be non-negative")
    cover_tol = 1e-9 * max(1.0, p.r)
    if times[0] > -p.r + cover_tol:
        raise ParameterError(
            f"samples must cover the history window [-r, 0]; first sample at {times[0]}"
        )
    hist = times <= 0.0
    if not np.any(hist):
        raise ParameterError("no samples at t <= 0")
    if baseline_mode == "history-sup":
        baseline = float(values[hist].max())
    elif baseline_mode == "initial-value":
        i0 = int(np.argmin(np.abs(times)))
        if abs(times[i0]) > cover_tol:
            raise ParameterError("initial-value baseline requires a sample at t = 0")
        baseline = float(values[i0])
    else:
        raise ParameterError(f"unknown baseline_mode {baseline_mode!r}")
    if baseline <= 0.0:
        raise ParameterError("baseline must be positive")

    fwd = times >= 0.0
    ratios = values[fwd] * np.exp(rate.eta * times[fwd]) / baseline
    i = int(np.argmax(ratios))
    max_ratio = float(ratios[i])
    return BoundCertificate(
        passed=max_ratio <= 1.0 + CERTIFY_SLACK,
        max_ratio=max_ratio,
        max_ratio_time=float(times[fwd][i]),
        baseline=baseline,
        eta=rate.eta,
    )


def integrate_comparison(p, v0=1.0, step=None, horizon=None, backend_name=None):
    """Integrate the equality case of the delay inequality with constant
    history v = v0 > 0, returning (times, values) with the history grid
    prepended on [-r, 0).  This is the worst trajectory the inequality
    permits, so it must satisfy `certify_bound`."""
    if not v0 > 0.0:
        raise ParameterError(f"v0 must be positive, got {v0}")
    if step is None:
        step = min(p.r / 20.0, 0.05)
    if horizon is None:
        horizon = max(2.0 * p.r, min(4.0 / solve_lambda(p).eta, 60.0))
    if step <= 0.0 or horizon <= 0.0:
        raise ParameterError("step and horizon must be positive")
    kern = backend.get_kernel(backend_name)
    status, status_time, ts, vs = kern.integrate_comparison(
        p.a, p.b, p.alpha, p.beta, p.r, v0, step, horizon
    )
    if status != 0:
        raise NumericError(
            f"comparison integration failed with status {status} at t={status_time}"
        )
    n_hist = int(math.ceil(p.r / step)) + 1
    hist_t = np.linspace(-p.r, 0.0, n_hist)[:-1]
    times = np.concatenate([hist_t, ts])
    values = np.concatenate([np.full(hist_t.shape, v0), vs])
    return times, values
