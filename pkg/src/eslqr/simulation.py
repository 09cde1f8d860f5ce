"""Closed-loop simulation: RK4 plant, bodyrate loop and re-linearized LQR."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .controllers import BodyrateGains, bodyrate_torque, lqr_step
from .error_state import ErrorControl, compute_error
from .riccati import DEFAULT_EPSILON, CareError, LqrWeights
from .rotations import quat_to_rot, wrap_angle, yaw_of
from .trajectory import Sampler
from .vehicle import TrueState, VehicleParams, Wrench, true_rhs

log = logging.getLogger(__name__)


def _names(prefix, parts):
    return [f"{prefix}_{s}" for s in parts]


XYZ = ("x", "y", "z")
WXYZ = ("w", "x", "y", "z")

COLUMNS = (
    ["t"]
    + _names("p", XYZ) + _names("q", WXYZ) + _names("v", XYZ) + _names("omega", XYZ)
    + _names("p_nom", XYZ) + _names("q_nom", WXYZ) + _names("v_nom", XYZ)
    + _names("dp", XYZ) + _names("dtheta", XYZ) + _names("dv", XYZ)
    + ["c_cmd"] + _names("omega_cmd", XYZ) + _names("tau", XYZ)
    + ["dp_norm", "care_residual", "saturated"]
)
COL = {name: i for i, name in enumerate(COLUMNS)}


class SimulationError(RuntimeError):
    pass


@dataclass
class SimConfig:
    """Integration settings. The outer loop runs every ``outer_divisor`` inner steps."""

    duration: float
    initial: TrueState
    dt_inner: float = 1e-3
    outer_divisor: int = 10
    epsilon: float = DEFAULT_EPSILON

    def __post_init__(self):
        if not self.dt_inner > 0:
            raise ValueError("dt_inner must be positive")
        if int(self.outer_divisor) != self.outer_divisor or self.outer_divisor < 1:
            raise ValueError("outer_divisor must be an integer >= 1")
        if not self.duration >= self.dt_inner:
            raise ValueError("duration must be at least dt_inner")

    @property
    def n_steps(self):
        # guard against 20.0 / 1e-3 evaluating to 19999.999...
        return int(math.floor(self.duration / self.dt_inner + 1e-9))


@dataclass
class SimLog:
    data: np.ndarray
    failure: str | None = None
    care_solutions: list = field(default_factory=list, repr=False)

    def __len__(self):
        return self.data.shape[0]

    def col(self, name):
        return self.data[:, COL[name]]

    def cols(self, prefix, parts=XYZ):
        return self.data[:, [COL[f"{prefix}_{s}"] for s in parts]]

    @property
    def t(self):
        return self.col("t")

    @property
    def ok(self):
        return self.failure is None


@dataclass
class TrackingMetrics:
    rmse_position: float
    max_position_error: float
    settling_time: float | None
    final_attitude_error: float
    max_yaw_error: float


def rk4_step(s: TrueState, w: Wrench, params: VehicleParams, dt) -> TrueState:
    """Classical RK4 step with the wrench held constant; quaternion renormalized once.

    Raises
    ------
    SimulationError
        If the propagated state is not finite.
    """
    return TrueState.from_vector(_rk4(s.as_vector(), params.clamp_thrust(w.c),
                                      np.asarray(w.tau, float), params, dt))


def _rk4(x, c, tau, params, dt):
    try:
        with np.errstate(invalid="ignore", over="ignore"):
            k1 = true_rhs(x, c, tau, params)
            k2 = true_rhs(x + 0.5 * dt * k1, c, tau, params)
            k3 = true_rhs(x + 0.5 * dt * k2, c, tau, params)
            k4 = true_rhs(x + dt * k3, c, tau, params)
            x_new = x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    except ValueError as exc:
        # an intermediate quaternion that cannot be normalized
        raise SimulationError(f"non-finite state during RK4 step ({exc})") from exc
    qn = np.linalg.norm(x_new[3:7])
    if not np.all(np.isfinite(x_new)) or not np.isfinite(qn) or qn == 0.0:
        raise SimulationError("non-finite state after RK4 step")
    x_new[3:7] /= qn
    return x_new


def run_closed_loop(cfg: SimConfig, traj: Sampler, weights: LqrWeights,
                    gains: BodyrateGains, params: VehicleParams) -> SimLog:
    """Simulate the cascaded controller tracking ``traj``.

    Failures (Riccati or non-finite state) stop the run; the log holds the
    rows written so far and ``failure`` describes what happened.
    """
    n = cfg.n_steps
    data = np.full((n + 1, len(COLUMNS)), np.nan)
    x = cfg.initial.as_vector().astype(float)
    x[3:7] /= np.linalg.norm(x[3:7])
    prev_du = ErrorControl()
    out = None
    solutions = []
    failure = None
    rows = 0

    for k in range(n + 1):
        t = k * cfg.dt_inner
        state = TrueState.from_vector(x)
        sample = traj(t)
        if k % cfg.outer_divisor == 0:
            try:
                out = lqr_step(state, sample, weights, params, prev_du, cfg.epsilon)
            except CareError as exc:
                failure = f"t={t:.6g}: Riccati failure: {exc}"
                break
            prev_du = out.delta_u
            solutions.append(out.gain_used)
        # error is logged at every inner step; the command is held between outer ticks
        nom = sample.nominal
        err = compute_error(state, nom) if k % cfg.outer_divisor else out.error
        tau = bodyrate_torque(out.command.omega, state.omega, params, gains)

        row = data[k]
        row[0] = t
        row[1:14] = x
        row[14:17], row[17:21], row[21:24] = nom.p, nom.q, nom.v
        row[24:27], row[27:30], row[30:33] = err.dp, err.dtheta, err.dv
        row[33] = out.command.c
        row[34:37] = out.command.omega
        row[37:40] = tau
        row[40] = np.linalg.norm(err.dp)
        row[41] = out.gain_used.residual
        row[42] = float(out.saturated)
        rows = k + 1

        if k == n:
            break
        try:
            x = _rk4(x, params.clamp_thrust(out.command.c), tau, params, cfg.dt_inner)
        except SimulationError as exc:
            failure = f"t={t:.6g}: {exc}"
            break

    if failure:
        log.error("simulation aborted: %s", failure)
    return SimLog(data[:rows], failure, solutions)


def compute_metrics(log_: SimLog, settle_threshold=0.01, window_start=0.0) -> TrackingMetrics:
    """Tracking metrics; RMSE and max yaw error use samples with ``t >= window_start``.

    Raises
    ------
    ValueError
        For an empty log or a window starting after the last sample.
    """
    if len(log_) == 0:
        raise ValueError("empty log")
    t = log_.t
    if window_start > t[-1]:
        raise ValueError(f"window start {window_start} beyond log end {t[-1]}")
    e = log_.col("dp_norm")
    win = t >= window_start
    rmse = float(np.sqrt(np.mean(e[win] ** 2)))

    above = np.nonzero(e >= settle_threshold)[0]
    if above.size == 0:
        settling = float(t[0])
    elif above[-1] == len(e) - 1:
        settling = None
    else:
        settling = float(t[above[-1] + 1])

    dtheta = log_.cols("dtheta")
    yaw_err = yaw_errors(log_)
    return TrackingMetrics(
        rmse_position=rmse,
        max_position_error=float(np.max(e)),
        settling_time=settling,
        final_attitude_error=float(np.linalg.norm(dtheta[-1])),
        max_yaw_error=float(np.max(np.abs(yaw_err[win]))),
    )


def yaw_errors(log_: SimLog):
    """Wrapped heading difference between the true and nominal body x-axes."""
    q = log_.cols("q", WXYZ)
    q_nom = log_.cols("q_nom", WXYZ)
    out = np.empty(len(log_))
    for i in range(len(log_)):
        out[i] = wrap_angle(yaw_of(quat_to_rot(q[i])) - yaw_of(quat_to_rot(q_nom[i])))
    return out


def run_rate_loop(omega_cmd, gains: BodyrateGains, params: VehicleParams,
                  duration, dt=1e-3, omega0=None):
    """Close only the bodyrate loop around the plant at hover thrust.

    Returns ``(t, omega)`` histories.
    """
    n = int(math.floor(duration / dt + 1e-9))
    x = TrueState(np.zeros(3), np.array([1.0, 0, 0, 0]), np.zeros(3),
                  np.zeros(3) if omega0 is None else np.asarray(omega0, float)).as_vector()
    ts = np.arange(n + 1) * dt
    omegas = np.empty((n + 1, 3))
    for k in range(n + 1):
        omegas[k] = x[10:13]
        if k == n:
            break
        tau = bodyrate_torque(omega_cmd, x[10:13], params, gains)
        x = _rk4(x, params.hover_thrust, tau, params, dt)
    return ts, omegas
