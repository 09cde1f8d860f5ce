"""SO(3) and unit-quaternion primitives.

Conventions
-----------
Quaternions are Hamilton, scalar-first ``(w, x, y, z)`` and map body
coordinates to inertial coordinates, so ``quat_to_rot(q) @ v_body`` is the
inertial vector. Rotation vectors are axis * angle in radians.

All functions take and return plain ``numpy`` arrays.
"""

from __future__ import annotations

import numpy as np

# Below this angle the closed-form expressions switch to Taylor series.
SMALL_ANGLE = 1e-4
# Above this angle the logarithm extracts the axis from the diagonal.
NEAR_PI = np.pi - 1e-3

_SKEW_TOL = 1e-9
_ORTHO_TOL = 1e-9


def hat(v):
    """Skew-symmetric matrix such that ``hat(v) @ w == np.cross(v, w)``."""
    x, y, z = np.asarray(v, dtype=float)
    return np.array([[0.0, -z, y], [z, 0.0, -x], [-y, x, 0.0]])


def cross(a, b):
    """3-vector cross product (much cheaper than ``np.cross`` for single vectors)."""
    return np.array([a[1] * b[2] - a[2] * b[1],
                     a[2] * b[0] - a[0] * b[2],
                     a[0] * b[1] - a[1] * b[0]])


def vee(M):
    """Inverse of :func:`hat`.

    Raises
    ------
    ValueError
        If ``M`` is not skew-symmetric within 1e-9.
    """
    M = np.asarray(M, dtype=float)
    if M.shape != (3, 3):
        raise ValueError(f"expected a 3x3 matrix, got shape {M.shape}")
    if np.linalg.norm(M + M.T) > _SKEW_TOL:
        raise ValueError("matrix is not skew-symmetric")
    return np.array([M[2, 1], M[0, 2], M[1, 0]])


def exp_so3(theta):
    """Rodrigues' formula: rotation matrix for the rotation vector ``theta``."""
    theta = np.asarray(theta, dtype=float)
    angle = np.linalg.norm(theta)
    K = hat(theta)
    K2 = K @ K
    if angle < SMALL_ANGLE:
        return np.eye(3) + K + 0.5 * K2
    return (np.eye(3) + (np.sin(angle) / angle) * K
            + ((1.0 - np.cos(angle)) / angle**2) * K2)


def _check_rotation(R):
    R = np.asarray(R, dtype=float)
    if R.shape != (3, 3):
        raise ValueError(f"expected a 3x3 matrix, got shape {R.shape}")
    if not np.all(np.isfinite(R)):
        raise ValueError("rotation matrix has non-finite entries")
    if np.max(np.abs(R.T @ R - np.eye(3))) > _ORTHO_TOL:
        raise ValueError("matrix is not orthonormal")
    if abs(np.linalg.det(R) - 1.0) > _ORTHO_TOL:
        raise ValueError("matrix is not a proper rotation (det != 1)")
    return R


def log_so3(R):
    """Rotation vector of ``R`` on the canonical branch ``|theta| <= pi``.

    Raises
    ------
    ValueError
        If ``R`` is not a rotation matrix within 1e-9.
    """
    R = _check_rotation(R)
    cos_angle = np.clip(0.5 * (np.trace(R) - 1.0), -1.0, 1.0)
    angle = np.arccos(cos_angle)
    skew = 0.5 * (R - R.T)
    w = np.array([skew[2, 1], skew[0, 2], skew[1, 0]])

    if angle < SMALL_ANGLE:
        return w
    if angle < NEAR_PI:
        return (angle / np.sin(angle)) * w

    # R + R^T = 2 cos(a) I + 2 (1 - cos(a)) n n^T
    nnT = (0.5 * (R + R.T) - cos_angle * np.eye(3)) / (1.0 - cos_angle)
    i = int(np.argmax(np.diag(nnT)))
    axis = nnT[:, i] / np.sqrt(nnT[i, i])
    # w = sin(a) n fixes the sign away from exactly pi
    if axis @ w < 0.0:
        axis = -axis
    return angle * axis


def jr_inv(theta):
    """Inverse right Jacobian of SO(3).

    ``d theta/dt = jr_inv(theta) @ omega`` for body angular rate ``omega``.

    Raises
    ------
    ValueError
        If ``|theta| >= 2 pi - 0.1``, where the inverse blows up.
    """
    theta = np.asarray(theta, dtype=float)
    angle = np.linalg.norm(theta)
    if angle >= 2.0 * np.pi - 0.1:
        raise ValueError(f"|theta| = {angle:.6g} too close to 2*pi")
    K = hat(theta)
    if angle < SMALL_ANGLE:
        coef = 1.0 / 12.0
    else:
        # (1 + cos a) / sin a == cot(a / 2); finite through a == pi
        coef = 1.0 / angle**2 - 1.0 / (2.0 * angle * np.tan(0.5 * angle))
    return np.eye(3) + 0.5 * K + coef * (K @ K)


def jr(theta):
    """Right Jacobian of SO(3) (closed form)."""
    theta = np.asarray(theta, dtype=float)
    angle = np.linalg.norm(theta)
    K = hat(theta)
    if angle < SMALL_ANGLE:
        return np.eye(3) - 0.5 * K + (K @ K) / 6.0
    return (np.eye(3) - ((1.0 - np.cos(angle)) / angle**2) * K
            + ((angle - np.sin(angle)) / angle**3) * (K @ K))


# -- quaternions ---------------------------------------------------------------

def quat_identity():
    return np.array([1.0, 0.0, 0.0, 0.0])


def quat_normalize(q):
    q = np.asarray(q, dtype=float)
    n = np.linalg.norm(q)
    if not np.isfinite(n) or n == 0.0:
        raise ValueError("cannot normalize a zero or non-finite quaternion")
    return q / n


def quat_canonical(q):
    """Unit quaternion with non-negative scalar part."""
    q = quat_normalize(q)
    return -q if q[0] < 0.0 else q


def quat_conj(q):
    q = np.asarray(q, dtype=float)
    return np.array([q[0], -q[1], -q[2], -q[3]])


def quat_mul_raw(a, b):
    """Hamilton product without renormalization (used for derivatives)."""
    aw, ax, ay, az = a
    bw, bx, by, bz = b
    return np.array([
        aw * bw - ax * bx - ay * by - az * bz,
        aw * bx + ax * bw + ay * bz - az * by,
        aw * by - ax * bz + ay * bw + az * bx,
        aw * bz + ax * by - ay * bx + az * bw,
    ])


def quat_mul(a, b):
    """Hamilton product ``a (x) b``, renormalized."""
    return quat_normalize(quat_mul_raw(a, b))


def quat_exp(v):
    """Quaternion exponential of the pure quaternion ``(0, v)``.

    ``quat_exp(theta / 2)`` is the unit quaternion of rotation vector ``theta``.
    """
    v = np.asarray(v, dtype=float)
    a = np.linalg.norm(v)
    if a < SMALL_ANGLE:
        # sin(a)/a = 1 - a^2/6 + O(a^4)
        return quat_normalize(np.concatenate(([1.0 - 0.5 * a * a], (1.0 - a * a / 6.0) * v)))
    return np.concatenate(([np.cos(a)], (np.sin(a) / a) * v))


def quat_from_rotvec(theta):
    return quat_exp(0.5 * np.asarray(theta, dtype=float))


def quat_to_rot(q):
    """Rotation matrix of a unit quaternion (body to inertial)."""
    w, x, y, z = quat_normalize(q)
    return np.array([
        [1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)],
        [2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)],
        [2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)],
    ])


def rot_to_quat(R):
    """Canonical (w >= 0) unit quaternion of a rotation matrix.

    Uses the largest of the four squared components for stability.
    """
    R = np.asarray(R, dtype=float)
    tr = np.trace(R)
    d = np.array([tr, R[0, 0], R[1, 1], R[2, 2]])
    i = int(np.argmax(d))
    if i == 0:
        s = 2.0 * np.sqrt(1.0 + tr)
        q = [0.25 * s, (R[2, 1] - R[1, 2]) / s, (R[0, 2] - R[2, 0]) / s, (R[1, 0] - R[0, 1]) / s]
    elif i == 1:
        s = 2.0 * np.sqrt(1.0 + R[0, 0] - R[1, 1] - R[2, 2])
        q = [(R[2, 1] - R[1, 2]) / s, 0.25 * s, (R[0, 1] + R[1, 0]) / s, (R[0, 2] + R[2, 0]) / s]
    elif i == 2:
        s = 2.0 * np.sqrt(1.0 + R[1, 1] - R[0, 0] - R[2, 2])
        q = [(R[0, 2] - R[2, 0]) / s, (R[0, 1] + R[1, 0]) / s, 0.25 * s, (R[1, 2] + R[2, 1]) / s]
    else:
        s = 2.0 * np.sqrt(1.0 + R[2, 2] - R[0, 0] - R[1, 1])
        q = [(R[1, 0] - R[0, 1]) / s, (R[0, 2] + R[2, 0]) / s, (R[1, 2] + R[2, 1]) / s, 0.25 * s]
    return quat_canonical(q)


def quat_about_z(yaw):
    return np.array([np.cos(0.5 * yaw), 0.0, 0.0, np.sin(0.5 * yaw)])


def yaw_of(R):
    """Heading of the body x-axis projected on the inertial xy-plane."""
    return float(np.arctan2(R[1, 0], R[0, 0]))


def wrap_angle(a):
    return (a + np.pi) % (2.0 * np.pi) - np.pi
