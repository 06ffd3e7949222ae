"""Rigid-body math shared by all modules: vectors, rotations, poses, twists.

Conventions (used everywhere angles cross an interface):
  * Euler angles are extrinsic X-Y-Z fixed angles: alpha about world X,
    then beta about world Y, then gamma about world Z, i.e.
    R = Rz(gamma) @ Ry(beta) @ Rx(alpha).
  * Internal units are meters, radians, seconds, newtons. Files and wire
    messages use mm / degrees and convert at the boundary.
  * At gimbal lock (|beta| = pi/2) the decomposition returns the canonical
    branch with gamma = 0 and sets the gimbal_lock flag.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

Vec3 = np.ndarray  # shape (3,), float64
Mat3 = np.ndarray  # shape (3, 3), float64

ORTHONORMAL_TOL = 1e-9
GIMBAL_LOCK_TOL = 1e-9


def vec3(x: float, y: float, z: float) -> Vec3:
    return np.array([float(x), float(y), float(z)])


def unit(v: Vec3) -> Vec3:
    n = float(np.linalg.norm(v))
    if n == 0.0:
        raise ValueError("cannot normalize zero vector")
    return v / n


def rotation_x(angle: float) -> Mat3:
    c, s = math.cos(angle), math.sin(angle)
    return np.array([[1.0, 0.0, 0.0], [0.0, c, -s], [0.0, s, c]])


def rotation_y(angle: float) -> Mat3:
    c, s = math.cos(angle), math.sin(angle)
    return np.array([[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]])


def rotation_z(angle: float) -> Mat3:
    c, s = math.cos(angle), math.sin(angle)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


def identity_rotation() -> Mat3:
    return np.eye(3)


@dataclass(frozen=True, eq=False)
class EulerAngles:
    """Extrinsic X-Y-Z angles in radians, each in (-pi, pi]."""

    alpha: float
    beta: float
    gamma: float
    gimbal_lock: bool = False

    def as_array(self) -> np.ndarray:
        return np.array([self.alpha, self.beta, self.gamma])


def euler_to_rotation(e: EulerAngles) -> Mat3:
    return rotation_z(e.gamma) @ rotation_y(e.beta) @ rotation_x(e.alpha)


def rotation_to_euler(r: Mat3) -> EulerAngles:
    """Inverse of euler_to_rotation; gamma = 0 branch at gimbal lock.

    beta comes from atan2(-r20, hypot(r00, r10)) rather than asin(-r20):
    near the lock the asin form loses half the working precision, the
    atan2 form none.
    """
    sb = -float(r[2, 0])
    cb = math.hypot(float(r[0, 0]), float(r[1, 0]))
    beta = math.atan2(sb, cb)
    if cb > GIMBAL_LOCK_TOL:
        alpha = math.atan2(r[2, 1], r[2, 2])
        gamma = math.atan2(r[1, 0], r[0, 0])
        return EulerAngles(alpha, beta, gamma)
    # |beta| = pi/2: only alpha -/+ gamma is determined; pick gamma = 0.
    beta = math.copysign(math.pi / 2.0, sb)
    if sb > 0.0:
        alpha = math.atan2(r[0, 1], r[1, 1])
    else:
        alpha = math.atan2(-r[0, 1], r[1, 1])
    return EulerAngles(alpha, beta, 0.0, gimbal_lock=True)


def axis_angle_to_rotation(axis: Vec3, angle: float) -> Mat3:
    """Rodrigues formula for a unit axis."""
    x, y, z = unit(axis)
    c, s = math.cos(angle), math.sin(angle)
    cc = 1.0 - c
    return np.array(
        [
            [c + x * x * cc, x * y * cc - z * s, x * z * cc + y * s],
            [y * x * cc + z * s, c + y * y * cc, y * z * cc - x * s],
            [z * x * cc - y * s, z * y * cc + x * s, c + z * z * cc],
        ]
    )


def rotation_log(r: Mat3) -> Vec3:
    """Rotation vector (axis * angle) of r, angle in [0, pi]."""
    tr = float(r[0, 0]) + float(r[1, 1]) + float(r[2, 2])
    c = min(1.0, max(-1.0, 0.5 * (tr - 1.0)))
    angle = math.acos(c)
    sx = float(r[2, 1]) - float(r[1, 2])
    sy = float(r[0, 2]) - float(r[2, 0])
    sz = float(r[1, 0]) - float(r[0, 1])
    if angle < 1e-10:
        # First-order: skew part already is the rotation vector.
        return np.array([0.5 * sx, 0.5 * sy, 0.5 * sz])
    if math.pi - angle < 1e-6:
        # Near pi the skew part degenerates; recover axis from R + I.
        m = r + np.eye(3)
        k = int(np.argmax(np.diag(m)))
        axis = m[:, k]
        axis = axis / np.linalg.norm(axis)
        # Fix sign using the (still tiny) skew part.
        if sx * float(axis[0]) + sy * float(axis[1]) + sz * float(axis[2]) < 0.0:
            axis = -axis
        return axis * angle
    scale = angle / (2.0 * math.sin(angle))
    return np.array([scale * sx, scale * sy, scale * sz])


def rotation_angle(r: Mat3) -> float:
    """Geodesic angle of r in [0, pi]."""
    tr = float(np.trace(r))
    return math.acos(min(1.0, max(-1.0, 0.5 * (tr - 1.0))))


def rotation_between(a: Mat3, b: Mat3) -> float:
    """Geodesic angle between two rotations."""
    return rotation_angle(a.T @ b)


def rotation_error(a: Mat3, b: Mat3) -> float:
    """Geodesic angle via the log map; resolves angles far below the
    ~1.5e-8 rad floor of the acos form."""
    return float(np.linalg.norm(rotation_log(a.T @ b)))


def renormalized(r: Mat3) -> Mat3:
    """Nearest-ish orthonormal matrix via Gram-Schmidt on the columns."""
    a0, a1, a2 = float(r[0, 0]), float(r[1, 0]), float(r[2, 0])
    b0, b1, b2 = float(r[0, 1]), float(r[1, 1]), float(r[2, 1])
    inv = 1.0 / math.sqrt(a0 * a0 + a1 * a1 + a2 * a2)
    a0 *= inv
    a1 *= inv
    a2 *= inv
    d = b0 * a0 + b1 * a1 + b2 * a2
    b0 -= d * a0
    b1 -= d * a1
    b2 -= d * a2
    inv = 1.0 / math.sqrt(b0 * b0 + b1 * b1 + b2 * b2)
    b0 *= inv
    b1 *= inv
    b2 *= inv
    c0 = a1 * b2 - a2 * b1
    c1 = a2 * b0 - a0 * b2
    c2 = a0 * b1 - a1 * b0
    return np.array([[a0, b0, c0], [a1, b1, c1], [a2, b2, c2]])


def is_rotation(r: Mat3, tol: float = ORTHONORMAL_TOL) -> bool:
    if r.shape != (3, 3):
        return False
    if not np.all(np.isfinite(r)):
        return False
    if np.max(np.abs(r.T @ r - np.eye(3))) > tol:
        return False
    return float(np.linalg.det(r)) > 0.0


def random_rotation(rng: np.random.Generator) -> Mat3:
    """Uniform random rotation via normalized quaternion."""
    q = rng.normal(size=4)
    q = q / np.linalg.norm(q)
    w, x, y, z = q
    return np.array(
        [
            [1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)],
            [2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)],
            [2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)],
        ]
    )


def scaled_rotation_increment(r_prev: Mat3, r_now: Mat3, s: float) -> Mat3:
    """Fraction s of the relative rotation r_prev^-1 @ r_now, in axis-angle.

    s = 0 gives identity, s = 1 gives the relative rotation exactly.
    Scaling happens on the geodesic, which stays well defined across the
    +/-pi wrap where componentwise Euler differences break down.
    """
    if s < 0.0:
        raise ValueError("scale must be >= 0")
    rel = r_prev.T @ r_now
    if s == 0.0:
        return np.eye(3)
    if s == 1.0:
        return rel
    w = rotation_log(rel)
    angle = float(np.linalg.norm(w))
    if angle == 0.0:
        return np.eye(3)
    return axis_angle_to_rotation(w / angle, angle * s)


@dataclass(frozen=True, eq=False)
class Pose:
    """Rigid transform: world position (m) and orientation."""

    position: Vec3
    rotation: Mat3

    @staticmethod
    def identity() -> "Pose":
        return Pose(np.zeros(3), np.eye(3))


@dataclass(frozen=True, eq=False)
class Twist:
    """Linear (m/s) and angular (rad/s) velocity."""

    linear: Vec3
    angular: Vec3

    @staticmethod
    def zero() -> "Twist":
        return Twist(np.zeros(3), np.zeros(3))

    def linear_speed(self) -> float:
        v = self.linear
        return math.sqrt(float(v[0]) ** 2 + float(v[1]) ** 2 + float(v[2]) ** 2)

    def angular_speed(self) -> float:
        w = self.angular
        return math.sqrt(float(w[0]) ** 2 + float(w[1]) ** 2 + float(w[2]) ** 2)


def pose_compose(a: Pose, b: Pose) -> Pose:
    return Pose(a.position + a.rotation @ b.position, a.rotation @ b.rotation)


def pose_inverse(a: Pose) -> Pose:
    rt = a.rotation.T
    return Pose(-(rt @ a.position), rt)


def transform_point(pose: Pose, p: Vec3) -> Vec3:
    return pose.rotation @ p + pose.position


def pose_error(a: Pose, b: Pose) -> tuple[float, float]:
    """(translation distance m, geodesic rotation angle rad) between poses."""
    dt = float(np.linalg.norm(a.position - b.position))
    dr = rotation_between(a.rotation, b.rotation)
    return dt, dr
