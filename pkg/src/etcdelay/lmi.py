"""Stabilizing-gain synthesis via a negative-definiteness condition.

The closed loop is certified by a 2n x 2n block matrix, affine in a
positive definite Q and a rectangular R,

    M(Q, R) = [[Q A1' + A1 Q + R' B' + B R + (b+h) Q ,  A2 Q],
               [Q A2'                                ,  -b Q]]

being negative definite; the controller is then P = Q^-1, K = R P.
Synthesis minimizes the largest eigenvalue of M over (Q, R) by subgradient
descent: the objective is convex (max eigenvalue of an affine matrix
family), so descent with restarts finds the global optimum up to
stall tolerance.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, ParameterError, SynthesisError

#: Default required gap: M is accepted when lam_max(M) < -FEASIBILITY_MARGIN.
FEASIBILITY_MARGIN = 1e-6

#: Smallest admissible eigenvalue of Q during synthesis.
Q_MIN_EIG = 1e-6

_ASYMMETRY_TOL = 1e-9


def _as_matrix(name, a, rows=None, cols=None):
    a = np.atleast_2d(np.asarray(a, dtype=np.float64))
    if a.ndim != 2:
        raise DimensionError(f"{name} must be a matrix, got ndim={a.ndim}")
    if rows is not None and a.shape[0] != rows:
        raise DimensionError(f"{name} must have {rows} rows, got {a.shape[0]}")
    if cols is not None and a.shape[1] != cols:
        raise DimensionError(f"{name} must have {cols} columns, got {a.shape[1]}")
    if not np.all(np.isfinite(a)):
        raise ParameterError(f"{name} contains non-finite entries")
    return a


@dataclass(frozen=True, eq=False)
class SystemMatrices:
    """State, delayed-state and input matrices of the plant."""

    A1: np.ndarray
    A2: np.ndarray
    B: np.ndarray

    def __post_init__(self):
        A1 = _as_matrix("A1", self.A1)
        n = A1.shape[0]
        object.__setattr__(self, "A1", _as_matrix("A1", A1, n, n))
        object.__setattr__(self, "A2", _as_matrix("A2", self.A2, n, n))
        object.__setattr__(self, "B", _as_matrix("B", self.B, n, None))

    @property
    def n(self):
        return self.A1.shape[0]

    @property
    def m(self):
        return self.B.shape[1]


@dataclass(frozen=True)
class SynthesisParams:
    """Free positive scalars weighting the certificate blocks."""

    b: float
    h: float

    def __post_init__(self):
        for name in ("b", "h"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0.0):
                raise ParameterError(f"{name} must be a positive finite real, got {v}")


@dataclass(frozen=True, eq=False)
class ControllerDesign:
    """Synthesized or user-supplied controller with its certificate data.

    For synthesized designs `lmi_max_eig < 0` is guaranteed; designs built
    from user-supplied gains report whatever the certificate yields.
    """

    Q: np.ndarray
    R: np.ndarray
    P: np.ndarray
    K: np.ndarray
    lmi_max_eig: float


@dataclass(frozen=True)
class Feasibility:
    feasible: bool
    max_eig: float


def sym_eigh(M):
    """Eigenvalues/vectors of a symmetric matrix (ascending)."""
    return np.linalg.eigh(M)


def lambda_max(M):
    return float(np.linalg.eigvalsh(M)[-1])


def lambda_min(M):
    return float(np.linalg.eigvalsh(M)[0])


def spectral_norm(M):
    """Largest singular value, computed as sqrt(lam_max(M'M))."""
    M = np.atleast_2d(np.asarray(M, dtype=np.float64))
    w = np.linalg.eigvalsh(M.T @ M)
    return float(math.sqrt(max(w[-1], 0.0)))


def pd_inverse(Q):
    """Inverse of a symmetric positive definite matrix via its Cholesky
    factor (which doubles as the definiteness check)."""
    Q = np.asarray(Q, dtype=np.float64)
    try:
        L = np.linalg.cholesky(Q)
    except np.linalg.LinAlgError:
        raise ParameterError("matrix is not positive definite") from None
    Linv = np.linalg.solve(L, np.eye(Q.shape[0]))
    P = Linv.T @ Linv
    return 0.5 * (P + P.T)


def build_lmi(sys, sp, Q, R):
    """Assemble the 2n x 2n certificate matrix M(Q, R), symmetrized."""
    n, m = sys.n, sys.m
    Q = _as_matrix("Q", Q, n, n)
    R = _as_matrix("R", R, m, n)
    M11 = Q @ sys.A1.T + sys.A1 @ Q + R.T @ sys.B.T + sys.B @ R + (sp.b + sp.h) * Q
    M12 = sys.A2 @ Q
    M = np.block([[M11, M12], [M12.T, -sp.b * Q]])
    return 0.5 * (M + M.T)


def verify_feasible(M, margin=0.0):
    """Check negative definiteness with a quantitative gap.

    Feasible iff lam_max(M) < -margin.  Inputs asymmetric beyond the
    documented tolerance are rejected rather than silently symmetrized.
    """
    M = np.asarray(M, dtype=np.float64)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise DimensionError(f"M must be square, got shape {M.shape}")
    if margin < 0.0:
        raise ParameterError(f"margin must be non-negative, got {margin}")
    asym = float(np.max(np.abs(M - M.T))) if M.size else 0.0
    if asym > _ASYMMETRY_TOL * max(1.0, float(np.max(np.abs(M))) if M.size else 1.0):
        raise ParameterError(f"matrix is not symmetric (max asymmetry {asym:.3g})")
    max_eig = lambda_max(0.5 * (M + M.T))
    return Feasibility(feasible=max_eig < -margin, max_eig=max_eig)


def design_from_gain(sys, sp, K=None, P=None, Q=None, R=None):
    """Build a ControllerDesign from user-supplied data and score it
    against the certificate (verification mode; no feasibility demanded).

    Exactly one of P/Q must be given.  Give K (then R := K Q) or R
    (then K := R P).
    """
    if (P is None) == (Q is None):
        raise ParameterError("supply exactly one of P or Q")
    n, m = sys.n, sys.m
    if P is not None:
        P = _as_matrix("P", P, n, n)
        Q = pd_inverse(P)
    else:
        Q = _as_matrix("Q", Q, n, n)
        P = pd_inverse(Q)
    if (K is None) == (R is None):
        raise ParameterError("supply exactly one of K or R")
    if K is not None:
        K = _as_matrix("K", K, m, n)
        R = K @ Q
    else:
        R = _as_matrix("R", R, m, n)
        K = R @ P
    M = build_lmi(sys, sp, Q, R)
    return ControllerDesign(Q=Q, R=R, P=P, K=K, lmi_max_eig=lambda_max(M))


def _lam_max_vec(sys, sp, Q, R):
    w, V = np.linalg.eigh(build_lmi(sys, sp, Q, R))
    return float(w[-1]), V[:, -1]


def _project_q(Q, n, q_min):
    # nearest symmetric matrix with eigenvalues >= q_min, then renormalize
    # trace(Q) = n to pin the scale freedom of the certificate
    w, U = np.linalg.eigh(0.5 * (Q + Q.T))
    w = np.maximum(w, q_min)
    Q = (U * w) @ U.T
    return 0.5 * (Q + Q.T)


def synthesize_gain(sys, sp, margin=FEASIBILITY_MARGIN, q_min=Q_MIN_EIG,
                    restarts=20, max_iters=300, seed=0):
    """Find (Q, R) making the certificate negative definite; return the
    full controller design.

    Subgradient descent on lam_max(M(Q, R)) with Armijo-style step halving
    and random restarts; Q is kept >= q_min I and trace-normalized (the
    certificate is homogeneous in (Q, R), so normalization is free).  The
    descent runs to a stall rather than stopping at the first feasible
    point -- stopping early returns nearly singular Q and wild gains.

    Raises SynthesisError (with the best eigenvalue reached) if no restart
    certifies feasibility; that is not a proof of infeasibility.
    """
    n, m = sys.n, sys.m
    rng = np.random.default_rng(seed)
    best_lam = math.inf
    best = None
    for trial in range(restarts):
        if trial == 0:
            Q = np.eye(n)
            R = -sys.B.T.copy()
        else:
            G = rng.standard_normal((n, n))
            Q = _project_q(G @ G.T + n * np.eye(n), n, q_min)
            Q *= n / np.trace(Q)
            R = rng.standard_normal((m, n))
        lam, v = _lam_max_vec(sys, sp, Q, R)
        step = 1.0
        for _ in range(max_iters):
            v1, v2 = v[:n], v[n:]
            GQ = (2.0 * np.outer(sys.A1.T @ v1, v1)
                  + (sp.b + sp.h) * np.outer(v1, v1)
                  + 2.0 * np.outer(sys.A2.T @ v1, v2)
                  - sp.b * np.outer(v2, v2))
            GQ = 0.5 * (GQ + GQ.T)
            GR = 2.0 * np.outer(sys.B.T @ v1, v1)
            improved = False
            s = step
            for _ in range(60):
                Qn = _project_q(Q - s * GQ, n, q_min)
                c = n / np.trace(Qn)
                Qn = c * Qn
                Rn = c * (R - s * GR)
                lam_n, v_n = _lam_max_vec(sys, sp, Qn, Rn)
                if lam_n < lam - 1e-14:
                    Q, R, lam, v = Qn, Rn, lam_n, v_n
                    step = min(s * 1.5, 1e3)
                    improved = True
                    break
                s *= 0.5
            if not improved:
                break
        if lam < best_lam:
            best_lam, best = lam, (Q, R)
        if lam < -max(margin, 1e-3):
            break  # comfortably feasible; skip remaining restarts
    if best is None or best_lam >= -margin:
        raise SynthesisError(
            f"no feasible (Q, R) found within budget; best max eigenvalue {best_lam:.6g}",
            best_max_eig=best_lam,
        )
    Q, R = best
    P = pd_inverse(Q)
    K = R @ P
    return ControllerDesign(Q=Q, R=R, P=P, K=K, lmi_max_eig=best_lam)
