"""Event-triggering rule and inter-event-time machinery.

Control updates fire when

    C(x, eps) = 2 x' P B K eps - sigma x' P x   reaches   zeta(t) = alpha * V0 * e^{-beta t},

where eps is the held-sample error and V0 is the Lyapunov baseline (history
sup or initial value).  When beta <= lambda (the certificate decay root),
all inter-event gaps admit the uniform lower bound T~, the unique positive
root of

    g2(T) = alpha e^{-eta T/2} - delta1 (1 - e^{-eta T/2}) - delta2 T.

For beta > lambda no uniform bound is available (event accumulation is
still excluded); reports then carry regime 'zeno-excluded-only'.
"""

import math
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from .errors import DimensionError, ParameterError
from .lmi import _as_matrix, lambda_min, spectral_norm

REGIME_UNIFORM = "uniform-bound"
REGIME_ZENO_ONLY = "zeno-excluded-only"


@dataclass(frozen=True, eq=False)
class TriggerConfig:
    """Trigger parameters, optionally bound to controller matrices.

    P, K, B stay None until `bound_to` attaches a controller; evaluating
    the rule requires a bound config.
    """

    alpha: float
    beta: float
    sigma: float = 0.0
    baseline_mode: str = "history-sup"
    P: Optional[np.ndarray] = None
    K: Optional[np.ndarray] = None
    B: Optional[np.ndarray] = None

    def __post_init__(self):
        if not (math.isfinite(self.alpha) and self.alpha > 0.0):
            raise ParameterError(f"alpha must be positive, got {self.alpha}")
        if not (math.isfinite(self.beta) and self.beta > 0.0):
            raise ParameterError(f"beta must be positive, got {self.beta}")
        if not (math.isfinite(self.sigma) and self.sigma >= 0.0):
            raise ParameterError(f"sigma must be non-negative, got {self.sigma}")
        if self.baseline_mode not in ("history-sup", "initial-value"):
            raise ParameterError(f"unknown baseline_mode {self.baseline_mode!r}")
        if self.P is not None:
            P = _as_matrix("P", self.P)
            n = P.shape[0]
            object.__setattr__(self, "P", _as_matrix("P", P, n, n))
            object.__setattr__(self, "B", _as_matrix("B", self.B, n, None))
            m = self.B.shape[1]
            object.__setattr__(self, "K", _as_matrix("K", self.K, m, n))

    @property
    def is_bound(self):
        return self.P is not None

    def bound_to(self, design, B):
        """Return a copy carrying the controller's P, K and the plant's B."""
        return replace(self, P=design.P, K=design.K, B=B)

    def _require_bound(self):
        if not self.is_bound:
            raise ParameterError("trigger config is not bound to a controller (P, K, B unset)")


def trigger_value(x, eps, cfg):
    """C(x, eps) = 2 x' P B K eps - sigma x' P x."""
    cfg._require_bound()
    n = cfg.P.shape[0]
    x = np.asarray(x, dtype=np.float64).reshape(-1)
    eps = np.asarray(eps, dtype=np.float64).reshape(-1)
    if x.shape[0] != n or eps.shape[0] != n:
        raise DimensionError(f"x and eps must have length {n}")
    return float(2.0 * x @ cfg.P @ cfg.B @ cfg.K @ eps - cfg.sigma * (x @ cfg.P @ x))


def threshold(t, v0_baseline, cfg):
    """zeta(t) = alpha * v0_baseline * e^(-beta t)."""
    if t < 0.0:
        raise ParameterError(f"t must be non-negative, got {t}")
    if not v0_baseline > 0.0:
        raise ParameterError(f"v0_baseline must be positive, got {v0_baseline}")
    return cfg.alpha * v0_baseline * math.exp(-cfg.beta * t)


def dwell_constants(sys, cfg, eta, tau_bar):
    """Growth constants bounding the triggering quantity between events:

        delta1 = (|PBK| / lam_min(P)) * (4 / eta) * (|A1| + |A2| e^{eta tau_bar / 2})
        delta2 = 2 |PBK| |BK| / lam_min(P)

    with |.| the spectral norm.
    """
    cfg._require_bound()
    if not eta > 0.0:
        raise ParameterError(f"eta must be positive, got {eta}")
    if tau_bar < 0.0:
        raise ParameterError(f"tau_bar must be non-negative, got {tau_bar}")
    pbk = spectral_norm(cfg.P @ cfg.B @ cfg.K)
    bk = spectral_norm(cfg.B @ cfg.K)
    pmin = lambda_min(cfg.P)
    if pmin <= 0.0:
        raise ParameterError("P must be positive definite")
    delta1 = (pbk / pmin) * (4.0 / eta) * (
        spectral_norm(sys.A1) + spectral_norm(sys.A2) * math.exp(eta * tau_bar / 2.0)
    )
    delta2 = 2.0 * pbk * bk / pmin
    return delta1, delta2


def _g2(T, alpha, delta1, delta2, eta):
    e = math.exp(-eta * T / 2.0)
    return alpha * e - delta1 * (1.0 - e) - delta2 * T


def min_dwell_time(delta1, delta2, cfg, eta):
    """Unique positive root of g2, the guaranteed minimum inter-event time.

    Only meaningful in the uniform-bound regime beta <= lambda (so
    eta = beta); called outside it, returns None.  Also returns None in the
    degenerate no-dynamics case delta1 = delta2 = 0 where g2 never crosses
    zero (dwell time unbounded).
    """
    if delta1 < 0.0 or delta2 < 0.0:
        raise ParameterError("delta1 and delta2 must be non-negative")
    if not eta > 0.0:
        raise ParameterError(f"eta must be positive, got {eta}")
    if cfg.beta > eta:
        # eta = min(lambda, beta) < beta means beta > lambda: no uniform bound
        return None
    lo = 0.0
    hi = 1.0
    doublings = 0
    while _g2(hi, cfg.alpha, delta1, delta2, eta) >= 0.0:
        hi *= 2.0
        doublings += 1
        if doublings > 60:
            return None  # g2 stays positive: unbounded dwell time
    tol = 1e-12 * cfg.alpha
    root = hi
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        g = _g2(mid, cfg.alpha, delta1, delta2, eta)
        if abs(g) <= tol:
            root = mid
            break
        if g < 0.0:
            hi = mid
        else:
            lo = mid
        root = hi
    return root


@dataclass(frozen=True)
class DwellReport:
    """Decay rates, growth constants and the dwell bound for one design."""

    lam: float
    eta: float
    delta1: float
    delta2: float
    regime: str                          # REGIME_UNIFORM or REGIME_ZENO_ONLY
    t_tilde: Optional[float] = None      # present iff regime is uniform-bound
    observed_min_gap: Optional[float] = None


def dwell_report(sys, cfg, rate, tau_bar, observed_min_gap=None):
    """Assemble the DwellReport for a solved decay rate."""
    delta1, delta2 = dwell_constants(sys, cfg, rate.eta, tau_bar)
    if cfg.beta <= rate.lam:
        regime = REGIME_UNIFORM
        t_tilde = min_dwell_time(delta1, delta2, cfg, rate.eta)
    else:
        regime = REGIME_ZENO_ONLY
        t_tilde = None
    return DwellReport(lam=rate.lam, eta=rate.eta, delta1=delta1, delta2=delta2,
                       regime=regime, t_tilde=t_tilde,
                       observed_min_gap=observed_min_gap)
