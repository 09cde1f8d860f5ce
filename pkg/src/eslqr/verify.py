"""Self-check suites run by ``eslqr verify``.

Each suite compares an implementation against an independent numerical
route (finite differences, the Newton-Kleinman iteration, quaternion
algebra) and reports the worst error seen.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.signal import place_poles

from .error_state import error_dynamics, jacobian_a, jacobian_b, linearize
from .riccati import LqrWeights, lqr_gain, newton_kleinman
from .rotations import exp_so3, jr_inv, log_so3, quat_from_rotvec, quat_to_rot
from .trajectory import LemniscateParams, lemniscate_sample
from .vehicle import VehicleParams


@dataclass
class SuiteResult:
    """Passes when ``value < bound``."""

    name: str
    value: float
    bound: float

    @property
    def passed(self):
        return bool(self.value < self.bound)

    def line(self):
        status = "PASS" if self.passed else "FAIL"
        return f"[{status}] {self.name}: {self.value:.3e} (must be < {self.bound:.0e})"


def random_rotvec(rng, max_angle):
    axis = rng.normal(size=3)
    axis /= np.linalg.norm(axis)
    return axis * rng.uniform(0.0, max_angle)


def random_rotation(rng):
    return exp_so3(random_rotvec(rng, np.pi - 0.01))


def fd_jacobian(f, x, h=1e-6):
    """Central-difference Jacobian of ``f`` at ``x``."""
    x = np.asarray(x, dtype=float)
    cols = []
    for i in range(x.size):
        e = np.zeros_like(x)
        e[i] = h
        cols.append((f(x + e) - f(x - e)) / (2 * h))
    return np.column_stack(cols)


def fd_right_jacobian(theta, h=1e-6):
    """Right Jacobian from ``log(exp(theta)^T exp(theta + h e_i)) / h`` (central)."""
    R0 = exp_so3(theta)
    return fd_jacobian(lambda th: log_so3(R0.T @ exp_so3(th)), theta, h)


def relative_error(a, b):
    return float(np.max(np.abs(a - b)) / max(1.0, np.max(np.abs(b))))


def random_error_point(rng, params):
    dx = np.concatenate((rng.normal(size=3), random_rotvec(rng, 0.3), rng.normal(size=3)))
    du = np.concatenate(([rng.normal()], random_rotvec(rng, 1.0)))
    R = random_rotation(rng)
    c = params.hover_thrust * rng.uniform(0.5, 1.5)
    return dx, du, R, c


def jacobian_suite(n=100, seed=0, params=None):
    params = params or VehicleParams()
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(n):
        dx, du, R, c = random_error_point(rng, params)
        A_fd = fd_jacobian(lambda x: error_dynamics(x, du, R, c, params), dx)
        B_fd = fd_jacobian(lambda u: error_dynamics(dx, u, R, c, params), du)
        worst = max(worst, relative_error(jacobian_a(dx, du, R, c, params), A_fd),
                    relative_error(jacobian_b(dx, R, params), B_fd))
    return SuiteResult("error-state Jacobians vs central differences", worst, 1e-5)


def linearization_suite(n=20, seed=1, params=None):
    """Smallest ratio of the remainder between scales 1e-2 and 1e-3 (expected ~100)."""
    params = params or VehicleParams()
    rng = np.random.default_rng(seed)
    ratios = []
    for _ in range(n):
        dx = rng.normal(size=9)
        du = rng.normal(size=4)
        R = random_rotation(rng)
        c = params.hover_thrust
        sys = linearize(np.zeros(9), np.zeros(4), R, c, params)

        def remainder(s):
            return np.linalg.norm(error_dynamics(s * dx, s * du, R, c, params)
                                  - s * (sys.A @ dx + sys.B @ du))
        ratios.append(remainder(1e-2) / remainder(1e-3))
    return min(ratios)


def care_suite(params=None, weights=None, epsilon=1e-6):
    params = params or VehicleParams()
    weights = weights or LqrWeights.default()
    sys = linearize(np.zeros(9), np.zeros(4), np.eye(3), params.hover_thrust, params)
    sol = lqr_gain(sys, weights, epsilon)
    A = sys.A - epsilon * np.eye(9)
    K0 = place_poles(A, sys.B, -np.arange(1.0, 10.0)).gain_matrix
    P_nk, _, _ = newton_kleinman(A, sys.B, weights.Q, weights.Rw, K0)
    return [
        SuiteResult("CARE residual (hover, default weights)", sol.residual, 1e-8),
        SuiteResult("closed-loop spectral abscissa", sol.closed_loop_abscissa, 0.0),
        SuiteResult("Schur vs Newton-Kleinman P", relative_error(sol.P, P_nk), 1e-8),
    ]


def lie_suite(n=1000, seed=2):
    rng = np.random.default_rng(seed)
    worst_log = 0.0
    worst_quat = 0.0
    for _ in range(n):
        th = random_rotvec(rng, np.pi - 0.01)
        R = exp_so3(th)
        worst_log = max(worst_log, float(np.linalg.norm(log_so3(R) - th)))
        worst_quat = max(worst_quat, float(np.max(np.abs(R - quat_to_rot(quat_from_rotvec(th))))))
    worst_jr = 0.0
    for _ in range(50):
        th = random_rotvec(rng, 2.5)
        worst_jr = max(worst_jr, float(np.max(np.abs(jr_inv(th) @ fd_right_jacobian(th) - np.eye(3)))))
    return [
        SuiteResult("exp/log round trip", worst_log, 1e-9),
        SuiteResult("exp vs quaternion path", worst_quat, 1e-12),
        SuiteResult("jr_inv * finite-difference J_r = I", worst_jr, 1e-5),
    ]


def flatness_suite(params=None, lem=None, n=200):
    params = params or VehicleParams()
    lem = lem or LemniscateParams()
    period = 2 * np.pi / lem.omega_traj
    worst = 0.0
    worst_rate = 0.0
    h = 1e-5
    for t in np.linspace(0.0, period, n, endpoint=False):
        s = lemniscate_sample(lem, params, t)
        R = quat_to_rot(s.nominal.q)
        acc = params.gravity + R[:, 2] * s.u_nominal.c / params.mass
        worst = max(worst, float(np.max(np.abs(acc - s.acc))))
        # body rate from finite-differenced attitude
        Rp = quat_to_rot(lemniscate_sample(lem, params, t + h).nominal.q)
        Rm = quat_to_rot(lemniscate_sample(lem, params, t - h).nominal.q)
        w_fd = (log_so3(R.T @ Rp) - log_so3(R.T @ Rm)) / (2 * h)
        worst_rate = max(worst_rate, float(np.max(np.abs(w_fd - s.u_nominal.omega))))
    return [
        SuiteResult("flatness: thrust reproduces acceleration", worst, 1e-8),
        SuiteResult("flatness: body rate vs finite-differenced attitude", worst_rate, 1e-4),
    ]


def run_all():
    results = [jacobian_suite()]
    ratio = linearization_suite()
    # a quadratic remainder shrinks 100x per decade; require at least 50x
    results.append(SuiteResult("linearization remainder decay (1/ratio)", 1.0 / ratio, 1.0 / 50))
    results += care_suite()
    results += lie_suite()
    results += flatness_suite()
    return results
