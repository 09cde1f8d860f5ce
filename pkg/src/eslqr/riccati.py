"""Continuous-time algebraic Riccati equation and LQR gain synthesis.

The primary solver takes the ordered real Schur form of the Hamiltonian

    H = [[A, -B R^-1 B^T], [-Q, -A^T]]

and reads ``P = U21 U11^-1`` off the stable invariant subspace. A
Newton-Kleinman iteration is provided as an independent cross-check.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

DEFAULT_EPSILON = 1e-6
RESIDUAL_TOL = 1e-8


class CareError(RuntimeError):
    """The Riccati solve failed; carries the last residual and iteration count."""

    def __init__(self, message, residual=float("nan"), iterations=0):
        super().__init__(f"{message} (residual={residual:.3g}, iterations={iterations})")
        self.residual = residual
        self.iterations = iterations


@dataclass(frozen=True, eq=False)
class LqrWeights:
    Q: np.ndarray
    Rw: np.ndarray

    def __post_init__(self):
        for name in ("Q", "Rw"):
            M = np.atleast_2d(np.asarray(getattr(self, name), dtype=float))
            if M.shape[0] != M.shape[1]:
                raise ValueError(f"{name} must be square, got {M.shape}")
            if np.max(np.abs(M - M.T)) > 1e-12:
                raise ValueError(f"{name} must be symmetric")
            if np.min(np.linalg.eigvalsh(M)) <= 0:
                raise ValueError(f"{name} must be positive definite")
            object.__setattr__(self, name, M)

    @classmethod
    def from_diagonals(cls, q_diag, r_diag):
        return cls(np.diag(np.asarray(q_diag, float)), np.diag(np.asarray(r_diag, float)))

    @classmethod
    def default(cls):
        return cls.from_diagonals([10, 10, 10, 5, 5, 5, 1, 1, 1], [0.5, 1, 1, 1])


@dataclass(eq=False)
class CareSolution:
    P: np.ndarray
    K: np.ndarray
    residual: float
    spectral_abscissa_A: float
    closed_loop_abscissa: float
    asymmetry: float = 0.0


def spectral_abscissa(M):
    return float(np.max(np.linalg.eigvals(M).real))


def care_residual(A, B, Q, Rw, P):
    """Relative Frobenius residual of the CARE at ``P``.

    Normalized by ``|Q|_F``; reported absolute when ``Q == 0``.
    """
    res = A.T @ P + P @ A - P @ B @ np.linalg.solve(Rw, B.T @ P) + Q
    scale = np.linalg.norm(Q, "fro")
    return float(np.linalg.norm(res, "fro") / (scale if scale > 0 else 1.0))


def regularize_a(A, epsilon=DEFAULT_EPSILON):
    """Shift ``A`` by ``-epsilon I``; every eigenvalue moves left by ``epsilon``."""
    if epsilon < 0:
        raise ValueError(f"epsilon must be >= 0, got {epsilon}")
    A = np.asarray(A, dtype=float)
    return A - epsilon * np.eye(A.shape[0])


def _validate(A, B, Q, Rw):
    A = np.atleast_2d(np.asarray(A, dtype=float))
    B = np.asarray(B, dtype=float).reshape(A.shape[0], -1)
    Q = np.atleast_2d(np.asarray(Q, dtype=float))
    Rw = np.atleast_2d(np.asarray(Rw, dtype=float))
    n, m = B.shape
    if A.shape != (n, n) or Q.shape != (n, n) or Rw.shape != (m, m):
        raise ValueError(f"inconsistent shapes A{A.shape} B{B.shape} Q{Q.shape} R{Rw.shape}")
    if np.max(np.abs(Q - Q.T)) > 1e-12 or np.min(np.linalg.eigvalsh(Q)) < -1e-12:
        raise ValueError("Q must be symmetric positive semidefinite")
    if np.max(np.abs(Rw - Rw.T)) > 1e-12 or np.min(np.linalg.eigvalsh(Rw)) <= 0:
        raise ValueError("R must be symmetric positive definite")
    return A, B, Q, Rw


def solve_care(A, B, Q, Rw=None) -> CareSolution:
    """Stabilizing solution of ``A^T P + P A - P B Rw^-1 B^T P + Q = 0``.

    ``Q`` may be an :class:`LqrWeights`, in which case ``Rw`` is taken from it.

    Raises
    ------
    CareError
        When the Hamiltonian has no n-dimensional stable subspace (the pair is
        not stabilizable or there are eigenvalues on the imaginary axis), or
        the resulting solution fails the residual or stability checks.
    """
    if isinstance(Q, LqrWeights):
        Q, Rw = Q.Q, Q.Rw
    A, B, Q, Rw = _validate(A, B, Q, Rw)
    n = A.shape[0]
    S = B @ np.linalg.solve(Rw, B.T)
    H = np.block([[A, -S], [-Q, -A.T]])

    T, Z, sdim = sla.schur(H, output="real", sort="lhp")
    if sdim != n:
        raise CareError(f"Hamiltonian has {sdim} stable eigenvalues, expected {n}",
                        iterations=1)
    U11, U21 = Z[:n, :n], Z[n:, :n]
    if np.linalg.cond(U11) > 1e12:
        raise CareError("stable subspace is not a graph (U11 singular)", iterations=1)
    P = np.linalg.solve(U11.T, U21.T).T
    asym = float(np.max(np.abs(P - P.T)))
    P = 0.5 * (P + P.T)

    residual = care_residual(A, B, Q, Rw, P)
    if residual > RESIDUAL_TOL:
        # One Newton step from a stabilizing iterate is usually enough to
        # recover the digits lost to a poorly conditioned U11.
        P, residual = _newton_refine(A, B, Q, Rw, P, residual)
    if residual > RESIDUAL_TOL:
        raise CareError("CARE residual above tolerance", residual, iterations=1)

    K = np.linalg.solve(Rw, B.T @ P)
    cl = spectral_abscissa(A - B @ K)
    if not cl < 0:
        raise CareError(f"closed loop not Hurwitz (abscissa {cl:.3g})", residual, iterations=1)
    return CareSolution(P=P, K=K, residual=residual, spectral_abscissa_A=spectral_abscissa(A),
                        closed_loop_abscissa=cl, asymmetry=asym)


def _newton_refine(A, B, Q, Rw, P, residual, steps=3):
    for _ in range(steps):
        K = np.linalg.solve(Rw, B.T @ P)
        Ak = A - B @ K
        if spectral_abscissa(Ak) >= 0:
            break
        P_new = sla.solve_continuous_lyapunov(Ak.T, -(Q + K.T @ Rw @ K))
        P_new = 0.5 * (P_new + P_new.T)
        r = care_residual(A, B, Q, Rw, P_new)
        if r >= residual:
            break
        P, residual = P_new, r
    return P, residual


def newton_kleinman(A, B, Q, Rw, K0, tol=1e-12, max_iter=100):
    """Newton-Kleinman iteration from a stabilizing gain ``K0``.

    Each step solves the Lyapunov equation
    ``(A - B K)^T P + P (A - B K) + Q + K^T Rw K = 0`` and sets
    ``K = Rw^-1 B^T P``. Returns ``(P, K, iterations)``.
    """
    A, B, Q, Rw = _validate(A, B, Q, Rw)
    K = np.asarray(K0, dtype=float).reshape(B.shape[1], A.shape[0])
    if spectral_abscissa(A - B @ K) >= 0:
        raise CareError("initial gain is not stabilizing")
    P_prev = None
    for it in range(1, max_iter + 1):
        Ak = A - B @ K
        P = sla.solve_continuous_lyapunov(Ak.T, -(Q + K.T @ Rw @ K))
        P = 0.5 * (P + P.T)
        K = np.linalg.solve(Rw, B.T @ P)
        if P_prev is not None and np.linalg.norm(P - P_prev) <= tol * max(1.0, np.linalg.norm(P)):
            return P, K, it
        P_prev = P
    raise CareError("Newton-Kleinman did not converge",
                    care_residual(A, B, Q, Rw, P), iterations=max_iter)


def lqr_gain(sys, weights: LqrWeights, epsilon=DEFAULT_EPSILON) -> CareSolution:
    """Regularize the linearized ``A`` and solve for the LQR gain."""
    return solve_care(regularize_a(sys.A, epsilon), sys.B, weights.Q, weights.Rw)
