"""Nominal trajectories from flat outputs (position, yaw and derivatives)."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .rotations import cross, quat_about_z, rot_to_quat
from .vehicle import Control, NominalState, VehicleParams

MIN_THRUST = 0.1
MIN_HEADING_NORM = 1e-6

YAW_MODES = ("fixed", "tangent", "spinning")


@dataclass
class TrajectorySample:
    t: float
    nominal: NominalState
    u_nominal: Control
    pos: np.ndarray
    vel: np.ndarray
    acc: np.ndarray
    jerk: np.ndarray
    yaw: float
    yaw_rate: float


Sampler = Callable[[float], TrajectorySample]


@dataclass(frozen=True)
class LemniscateParams:
    """Gerono lemniscate ``x = ax sin(wt)``, ``y = ay sin(wt) cos(wt)`` at constant altitude.

    ``yaw_mode`` is one of ``fixed`` (hold ``yaw0``), ``tangent`` (face the
    direction of travel) or ``spinning`` (``yaw0 + yaw_rate * t``).
    """

    amplitude_x: float = 2.0
    amplitude_y: float = 1.0
    omega_traj: float = 0.8
    altitude: float = 1.5
    yaw_mode: str = "tangent"
    yaw0: float = 0.0
    yaw_rate: float = 0.0

    def __post_init__(self):
        if self.amplitude_x < 0 or self.amplitude_y < 0:
            raise ValueError("amplitudes must be non-negative")
        if not self.omega_traj > 0:
            raise ValueError("omega_traj must be positive")
        if self.yaw_mode not in YAW_MODES:
            raise ValueError(f"yaw_mode must be one of {YAW_MODES}, got {self.yaw_mode!r}")
        if self.yaw_mode == "tangent" and self.amplitude_x == 0:
            raise ValueError("tangent yaw needs amplitude_x > 0")


def flatness_map(pos, vel, acc, jerk, yaw, yaw_rate, params: VehicleParams):
    """Nominal state and control from flat outputs.

    The quaternion sign is chosen to stay in the hemisphere of the pure-yaw
    quaternion at ``yaw``, so a continuous yaw signal yields a continuous
    quaternion (the scalar part may then be negative).

    Raises
    ------
    ValueError
        Near free fall (thrust below 0.1 N) or when the body z-axis is
        parallel to the heading direction.
    """
    pos, vel, acc, jerk = (np.asarray(a, dtype=float) for a in (pos, vel, acc, jerk))
    f = params.mass * (acc - params.gravity)
    c = float(np.linalg.norm(f))
    if c < MIN_THRUST:
        raise ValueError(f"thrust {c:.3g} N too small (free fall)")
    z_b = f / c
    x_c = np.array([np.cos(yaw), np.sin(yaw), 0.0])
    y_c = np.array([-np.sin(yaw), np.cos(yaw), 0.0])
    y_b = cross(z_b, x_c)
    s = np.linalg.norm(y_b)
    if s < MIN_HEADING_NORM:
        raise ValueError("body z-axis parallel to heading direction")
    y_b /= s
    x_b = cross(y_b, z_b)
    R = np.column_stack((x_b, y_b, z_b))

    q = rot_to_quat(R)
    if q @ quat_about_z(yaw) < 0:
        q = -q

    f_dot = params.mass * jerk
    omega_x = -(y_b @ f_dot) / c
    omega_y = (x_b @ f_dot) / c
    # from d/dt (y_b . x_c) = 0
    omega_z = (omega_x * (z_b @ x_c) + yaw_rate * (y_b @ y_c)) / (x_b @ x_c)
    nominal = NominalState(pos.copy(), q, vel.copy())
    return nominal, Control(c, np.array([omega_x, omega_y, omega_z]))


def hover_trajectory(p0, yaw=0.0, params: VehicleParams | None = None) -> Sampler:
    """Constant hover at ``p0`` with heading ``yaw``."""
    params = params or VehicleParams()
    p0 = np.asarray(p0, dtype=float)
    zero = np.zeros(3)
    nominal, u = flatness_map(p0, zero, zero, zero, yaw, 0.0, params)

    def sample(t):
        return TrajectorySample(float(t), NominalState(nominal.p.copy(), nominal.q.copy(), nominal.v.copy()),
                                Control(u.c, u.omega.copy()), p0.copy(), zero.copy(), zero.copy(),
                                zero.copy(), float(yaw), 0.0)

    return sample


def _tangent_yaw(phase, vx, vy, ax, ay):
    # atan2 wraps where the heading crosses pi on the left lobe (cos(phase) < 0);
    # shifting by 2 pi there keeps the heading continuous and periodic.
    yaw = np.arctan2(vy, vx)
    if np.cos(phase) < 0 and yaw > 0:
        yaw -= 2.0 * np.pi
    yaw_rate = (vx * ay - vy * ax) / (vx * vx + vy * vy)
    return yaw, yaw_rate


def lemniscate_sample(params: LemniscateParams, vehicle: VehicleParams, t) -> TrajectorySample:
    """Sample the lemniscate at time ``t``."""
    a, b, w = params.amplitude_x, params.amplitude_y, params.omega_traj
    s = w * t
    # y = (b/2) sin(2s)
    pos = np.array([a * np.sin(s), 0.5 * b * np.sin(2 * s), params.altitude])
    vel = np.array([a * w * np.cos(s), b * w * np.cos(2 * s), 0.0])
    acc = np.array([-a * w**2 * np.sin(s), -2 * b * w**2 * np.sin(2 * s), 0.0])
    jerk = np.array([-a * w**3 * np.cos(s), -4 * b * w**3 * np.cos(2 * s), 0.0])

    if params.yaw_mode == "fixed":
        yaw, yaw_rate = params.yaw0, 0.0
    elif params.yaw_mode == "spinning":
        yaw, yaw_rate = params.yaw0 + params.yaw_rate * t, params.yaw_rate
    else:
        yaw, yaw_rate = _tangent_yaw(s, vel[0], vel[1], acc[0], acc[1])

    nominal, u = flatness_map(pos, vel, acc, jerk, yaw, yaw_rate, vehicle)
    return TrajectorySample(float(t), nominal, u, pos, vel, acc, jerk, float(yaw), float(yaw_rate))


def lemniscate_trajectory(params: LemniscateParams, vehicle: VehicleParams) -> Sampler:
    def sample(t):
        return lemniscate_sample(params, vehicle, t)
    return sample
