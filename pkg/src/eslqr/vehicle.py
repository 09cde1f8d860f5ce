"""Vehicle parameters and continuous-time quadrotor dynamics.

The translational/attitude kinematics are shared between the plant
("true" state) and the reference ("nominal" state). The plant additionally
carries the body rate and integrates Euler's rotational equation so that
a torque-level inner loop can be closed around it.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .rotations import cross, quat_mul_raw, quat_to_rot

log = logging.getLogger(__name__)

GRAVITY = np.array([0.0, 0.0, -9.81])


def _vec(x, n=3):
    a = np.asarray(x, dtype=float).reshape(-1)
    if a.shape != (n,):
        raise ValueError(f"expected a vector of length {n}, got shape {a.shape}")
    return a


@dataclass(frozen=True, eq=False)
class VehicleParams:
    """Rigid-body parameters of the quadrotor.

    ``thrust_max`` defaults to four times the hover thrust.
    """

    mass: float = 1.0
    inertia: np.ndarray = field(default_factory=lambda: np.diag([0.01, 0.01, 0.02]))
    gravity: np.ndarray = field(default_factory=lambda: GRAVITY.copy())
    thrust_min: float = 0.0
    thrust_max: float | None = None

    def __post_init__(self):
        if not (np.isfinite(self.mass) and self.mass > 0):
            raise ValueError(f"mass must be positive, got {self.mass}")
        J = np.asarray(self.inertia, dtype=float)
        if J.shape == (3,):
            J = np.diag(J)
        if J.shape != (3, 3):
            raise ValueError(f"inertia must be 3x3, got shape {J.shape}")
        if np.max(np.abs(J - J.T)) > 1e-12:
            raise ValueError("inertia must be symmetric")
        if np.min(np.linalg.eigvalsh(J)) <= 0:
            raise ValueError("inertia must be positive definite")
        object.__setattr__(self, "inertia", J)
        object.__setattr__(self, "gravity", _vec(self.gravity))
        if self.thrust_max is None:
            object.__setattr__(self, "thrust_max",
                               4.0 * self.mass * float(np.linalg.norm(self.gravity)))
        if not self.thrust_min >= 0:
            raise ValueError(f"thrust_min must be >= 0, got {self.thrust_min}")
        if not self.thrust_max > self.thrust_min:
            raise ValueError("thrust_max must exceed thrust_min")

    @cached_property
    def inertia_inv(self):
        return np.linalg.inv(self.inertia)

    @property
    def hover_thrust(self):
        return self.mass * float(np.linalg.norm(self.gravity))

    def clamp_thrust(self, c):
        return float(min(max(c, self.thrust_min), self.thrust_max))


@dataclass
class TrueState:
    p: np.ndarray
    q: np.ndarray
    v: np.ndarray
    omega: np.ndarray = field(default_factory=lambda: np.zeros(3))

    def as_vector(self):
        return np.concatenate((self.p, self.q, self.v, self.omega))

    @classmethod
    def from_vector(cls, x):
        x = np.asarray(x, dtype=float)
        return cls(x[0:3].copy(), x[3:7].copy(), x[7:10].copy(), x[10:13].copy())


@dataclass
class NominalState:
    p: np.ndarray
    q: np.ndarray
    v: np.ndarray


@dataclass
class Control:
    """Collective thrust [N] and body-rate command [rad/s]."""

    c: float
    omega: np.ndarray


@dataclass
class Wrench:
    """Collective thrust [N] and body torque [N m]."""

    c: float
    tau: np.ndarray


def _translational(v, q, c, params):
    R = quat_to_rot(q)
    return v, params.gravity + (c / params.mass) * R[:, 2]


def _quat_rate(q, omega):
    return 0.5 * quat_mul_raw(q, np.concatenate(([0.0], omega)))


def true_rhs(x, c, tau, params):
    """Right-hand side on the stacked 13-vector ``(p, q, v, omega)``.

    ``c`` is assumed already clamped.
    """
    q = x[3:7]
    omega = x[10:13]
    J = params.inertia
    p_dot, v_dot = _translational(x[7:10], q, c, params)
    omega_dot = params.inertia_inv @ (tau - cross(omega, J @ omega))
    return np.concatenate((p_dot, _quat_rate(q, omega), v_dot, omega_dot))


def true_derivative(s: TrueState, w: Wrench, params: VehicleParams) -> TrueState:
    """Time derivative of the plant state under wrench ``w``.

    Thrust is clamped to ``[thrust_min, thrust_max]`` here.
    """
    c = params.clamp_thrust(w.c)
    if c != w.c:
        log.debug("plant thrust clamped from %g to %g", w.c, c)
    return TrueState.from_vector(true_rhs(s.as_vector(), c, np.asarray(w.tau, float), params))


def nominal_derivative(s: NominalState, u: Control, params: VehicleParams) -> NominalState:
    """Time derivative of the reference state; the body rate is an input."""
    p_dot, v_dot = _translational(s.v, s.q, u.c, params)
    return NominalState(np.array(p_dot, dtype=float), _quat_rate(s.q, np.asarray(u.omega, float)), v_dot)
