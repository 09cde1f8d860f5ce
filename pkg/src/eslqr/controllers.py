"""Outer error-state LQR loop and inner bodyrate loop.

The outer loop only sees position, attitude and velocity and produces a
thrust and body-rate command; the inner loop only sees body rates and
produces torque.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .error_state import ErrorControl, ErrorState, compose_control, compute_error, linearize
from .riccati import DEFAULT_EPSILON, CareSolution, LqrWeights, lqr_gain
from .rotations import cross, quat_to_rot
from .vehicle import Control, VehicleParams

log = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class BodyrateGains:
    kp: np.ndarray = field(default_factory=lambda: np.array([20.0, 20.0, 8.0]))

    def __post_init__(self):
        kp = np.asarray(self.kp, dtype=float).reshape(-1)
        if kp.shape != (3,) or not np.all(kp > 0):
            raise ValueError(f"bodyrate gains must be 3 positive numbers, got {self.kp}")
        object.__setattr__(self, "kp", kp)


@dataclass
class OuterLoopOutput:
    command: Control
    error: ErrorState
    delta_u: ErrorControl
    gain_used: CareSolution
    saturated: bool = False


def lqr_step(true_s, sample, weights: LqrWeights, params: VehicleParams,
             prev_du: ErrorControl | None = None, epsilon=DEFAULT_EPSILON) -> OuterLoopOutput:
    """One outer-loop update.

    Re-linearizes the error dynamics at the current error and the previous
    error control, solves for the gain and composes ``du = -K dx`` onto the
    nominal control. Thrust saturation is applied after composition.

    Raises
    ------
    riccati.CareError
        If the gain synthesis fails.
    """
    prev_du = prev_du if prev_du is not None else ErrorControl()
    nominal = sample.nominal
    u_nom = sample.u_nominal
    dx = compute_error(true_s, nominal)
    R = quat_to_rot(nominal.q)
    sys = linearize(dx, prev_du, R, u_nom.c, params)
    sol = lqr_gain(sys, weights, epsilon)
    du = ErrorControl.from_vector(-sol.K @ dx.as_vector())
    command = compose_control(u_nom, du, dx.dtheta)

    c_sat = params.clamp_thrust(command.c)
    saturated = c_sat != command.c
    if saturated:
        log.info("thrust command %.4g N saturated to %.4g N", command.c, c_sat)
        command = Control(c_sat, command.omega)
    return OuterLoopOutput(command, dx, du, sol, saturated)


def bodyrate_torque(omega_cmd, omega_true, params: VehicleParams, gains: BodyrateGains):
    """Proportional rate control with gyroscopic feedback linearization."""
    omega_cmd = np.asarray(omega_cmd, dtype=float)
    omega_true = np.asarray(omega_true, dtype=float)
    J = params.inertia
    return J @ (gains.kp * (omega_cmd - omega_true)) + cross(omega_true, J @ omega_true)
