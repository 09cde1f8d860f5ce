"""Error-state compositions, error dynamics and their Jacobians.

The error state is stacked as ``(dp, dtheta, dv)`` in R^9 and the error
control as ``(dc, domega)`` in R^4. Attitude error lives in exponential
coordinates on the right of the nominal attitude: ``R_t = R exp([dtheta]x)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .rotations import cross, exp_so3, hat, log_so3, quat_from_rotvec, quat_mul, quat_to_rot
from .vehicle import Control, NominalState, TrueState, VehicleParams

E3 = np.array([0.0, 0.0, 1.0])

# index slices into the stacked error state / control
P, TH, V = slice(0, 3), slice(3, 6), slice(6, 9)
C, W = slice(0, 1), slice(1, 4)


@dataclass
class ErrorState:
    dp: np.ndarray = field(default_factory=lambda: np.zeros(3))
    dtheta: np.ndarray = field(default_factory=lambda: np.zeros(3))
    dv: np.ndarray = field(default_factory=lambda: np.zeros(3))

    def as_vector(self):
        return np.concatenate((self.dp, self.dtheta, self.dv))

    @classmethod
    def from_vector(cls, x):
        x = np.asarray(x, dtype=float)
        if x.shape != (9,):
            raise ValueError(f"error state must have 9 entries, got {x.shape}")
        return cls(x[P].copy(), x[TH].copy(), x[V].copy())


@dataclass
class ErrorControl:
    dc: float = 0.0
    domega: np.ndarray = field(default_factory=lambda: np.zeros(3))

    def as_vector(self):
        return np.concatenate(([self.dc], self.domega))

    @classmethod
    def from_vector(cls, u):
        u = np.asarray(u, dtype=float)
        if u.shape != (4,):
            raise ValueError(f"error control must have 4 entries, got {u.shape}")
        return cls(float(u[0]), u[W].copy())


@dataclass
class LinearizedSystem:
    A: np.ndarray
    B: np.ndarray
    dx_bar: np.ndarray
    du_bar: np.ndarray
    R: np.ndarray
    c: float


def compose_state(nominal: NominalState, err: ErrorState) -> NominalState:
    """``x (+) dx``: the (p, q, v) triple obtained by applying ``err`` to ``nominal``."""
    q_t = quat_mul(nominal.q, quat_from_rotvec(err.dtheta))
    return NominalState(nominal.p + err.dp, q_t, nominal.v + err.dv)


def compute_error(true_s, nominal: NominalState) -> ErrorState:
    """``x_t (-) x``. ``true_s`` is anything with ``p``, ``q``, ``v`` attributes."""
    R = quat_to_rot(nominal.q)
    R_t = quat_to_rot(true_s.q)
    dtheta = log_so3(R.T @ R_t)
    return ErrorState(np.asarray(true_s.p - nominal.p, float), dtheta,
                      np.asarray(true_s.v - nominal.v, float))


def compose_control(nominal_u: Control, err_u: ErrorControl, dtheta) -> Control:
    """``u (+) du``; the returned rate is expressed in the true body frame."""
    dR = exp_so3(dtheta)
    return Control(nominal_u.c + err_u.dc, dR.T @ np.asarray(nominal_u.omega, float) + err_u.domega)


def error_dynamics(dx, du, nominal_R, nominal_c, params: VehicleParams):
    """First-order error dynamics ``d(dx)/dt = f(dx, du)`` as a 9-vector.

    ``dx`` and ``du`` may be :class:`ErrorState`/:class:`ErrorControl` or
    stacked arrays.
    """
    x = _as9(dx)
    u = _as4(du)
    dth, dv = x[TH], x[V]
    dc, dw = u[0], u[W]
    out = np.empty(9)
    out[P] = dv
    out[TH] = dw + 0.5 * cross(dth, dw)
    out[V] = (nominal_R @ (dc * E3 + cross(dth, (nominal_c + dc) * E3))) / params.mass
    return out


def jacobian_a(dx, du, nominal_R, nominal_c, params: VehicleParams):
    x = _as9(dx)
    u = _as4(du)
    A = np.zeros((9, 9))
    A[P, V] = np.eye(3)
    A[TH, TH] = -0.5 * hat(u[W])
    A[V, TH] = -(nominal_R @ hat((nominal_c + u[0]) * E3)) / params.mass
    return A


def jacobian_b(dx, nominal_R, params: VehicleParams):
    x = _as9(dx)
    K = hat(x[TH])
    B = np.zeros((9, 4))
    B[TH, W] = np.eye(3) + 0.5 * K
    B[V, 0] = nominal_R @ (np.eye(3) + K) @ E3 / params.mass
    return B


def linearize(dx, du, nominal_R, nominal_c, params: VehicleParams) -> LinearizedSystem:
    """A and B at the linearization point ``(dx, du)``."""
    x, u = _as9(dx), _as4(du)
    return LinearizedSystem(
        A=jacobian_a(x, u, nominal_R, nominal_c, params),
        B=jacobian_b(x, nominal_R, params),
        dx_bar=x, du_bar=u, R=np.asarray(nominal_R, float), c=float(nominal_c),
    )


def _as9(dx):
    if isinstance(dx, ErrorState):
        return dx.as_vector()
    return np.asarray(dx, dtype=float)


def _as4(du):
    if isinstance(du, ErrorControl):
        return du.as_vector()
    return np.asarray(du, dtype=float)
