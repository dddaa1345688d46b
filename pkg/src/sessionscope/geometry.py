"""Small math kernel: quaternion hygiene, lerp/slerp, rotation helpers.

Conventions: y is up, the x/z plane is the ground, and "forward" is the +z
axis rotated by an object's orientation. Quaternions are stored as
(x, y, z, w) tuples.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import InvalidOrientationError

Vec3 = tuple[float, float, float]
Quat = tuple[float, float, float, float]

# Norm tolerance accepted for "already unit" inputs.
UNIT_NORM_TOL = 1e-6
# Below this angle (radians) slerp degrades to normalized lerp.
SLERP_LERP_THRESHOLD = 1e-5


def canonicalize_quaternion(q: Quat) -> Quat:
    """Scale q to unit norm and flip its sign so that w >= 0.

    The sign flip picks a deterministic representative of the two
    quaternions describing the same rotation, so serialized logs
    round-trip byte-identically. Idempotent: a canonical quaternion
    passes through unchanged.
    """
    x, y, z, w = (float(q[0]), float(q[1]), float(q[2]), float(q[3]))
    n = math.sqrt(x * x + y * y + z * z + w * w)
    if not math.isfinite(n) or n <= 0.0:
        raise InvalidOrientationError(f"cannot normalize quaternion {q!r}")
    # Skip the division when already unit so repeated calls are exact no-ops.
    if abs(n - 1.0) > 1e-12:
        x, y, z, w = x / n, y / n, z / n, w / n
    if w < 0.0:
        x, y, z, w = -x, -y, -z, -w
    return (x, y, z, w)


def quat_norm(q: Quat) -> float:
    return math.sqrt(q[0] ** 2 + q[1] ** 2 + q[2] ** 2 + q[3] ** 2)


def _require_unit(q: Quat) -> None:
    n = quat_norm(q)
    if not math.isfinite(n) or abs(n - 1.0) > UNIT_NORM_TOL:
        raise InvalidOrientationError(f"quaternion {q!r} is not unit length (norm={n})")


def lerp_position(p0: Vec3, p1: Vec3, u: float) -> Vec3:
    """Componentwise (1-u)*p0 + u*p1. Exact at u=0 and u=1."""
    return (
        (1.0 - u) * p0[0] + u * p1[0],
        (1.0 - u) * p0[1] + u * p1[1],
        (1.0 - u) * p0[2] + u * p1[2],
    )


def slerp_orientation(q0: Quat, q1: Quat, u: float) -> Quat:
    """Shortest-arc spherical interpolation between unit quaternions.

    Falls back to normalized linear interpolation when the angle between
    the inputs is below SLERP_LERP_THRESHOLD. Exact at the endpoints:
    u=0 returns q0 bit-for-bit, u=1 returns q1 up to sign.
    """
    _require_unit(q0)
    _require_unit(q1)
    dot = q0[0] * q1[0] + q0[1] * q1[1] + q0[2] * q1[2] + q0[3] * q1[3]
    if dot < 0.0:
        q1 = (-q1[0], -q1[1], -q1[2], -q1[3])
        dot = -dot
    if q0 == q1:
        return q0
    dot = min(dot, 1.0)
    angle = math.acos(dot)
    if angle < SLERP_LERP_THRESHOLD:
        mixed = tuple((1.0 - u) * a + u * b for a, b in zip(q0, q1))
        n = math.sqrt(sum(c * c for c in mixed))
        return (mixed[0] / n, mixed[1] / n, mixed[2] / n, mixed[3] / n)
    sin_angle = math.sin(angle)
    w0 = math.sin((1.0 - u) * angle) / sin_angle
    w1 = math.sin(u * angle) / sin_angle
    return (
        w0 * q0[0] + w1 * q1[0],
        w0 * q0[1] + w1 * q1[1],
        w0 * q0[2] + w1 * q1[2],
        w0 * q0[3] + w1 * q1[3],
    )


def quat_multiply(a: Quat, b: Quat) -> Quat:
    """Hamilton product a*b, both in (x, y, z, w) order."""
    ax, ay, az, aw = a
    bx, by, bz, bw = b
    return (
        aw * bx + ax * bw + ay * bz - az * by,
        aw * by - ax * bz + ay * bw + az * bx,
        aw * bz + ax * by - ay * bx + az * bw,
        aw * bw - ax * bx - ay * by - az * bz,
    )


def quat_from_axis_angle(axis: Vec3, angle: float) -> Quat:
    ax, ay, az = axis
    n = math.sqrt(ax * ax + ay * ay + az * az)
    if n <= 0.0:
        raise InvalidOrientationError("rotation axis must be non-zero")
    s = math.sin(angle / 2.0) / n
    return canonicalize_quaternion((ax * s, ay * s, az * s, math.cos(angle / 2.0)))


def quat_from_yaw(yaw: float) -> Quat:
    """Rotation about the up axis; yaw=0 faces +z."""
    return quat_from_axis_angle((0.0, 1.0, 0.0), yaw)


def quat_to_matrix(q: Quat) -> np.ndarray:
    """3x3 rotation matrix R with v_world = R @ v_local."""
    x, y, z, w = q
    return np.array(
        [
            [1 - 2 * (y * y + z * z), 2 * (x * y - z * w), 2 * (x * z + y * w)],
            [2 * (x * y + z * w), 1 - 2 * (x * x + z * z), 2 * (y * z - x * w)],
            [2 * (x * z - y * w), 2 * (y * z + x * w), 1 - 2 * (x * x + y * y)],
        ],
        dtype=np.float64,
    )


def rotate_vector(q: Quat, v: Vec3) -> Vec3:
    m = quat_to_matrix(q) @ np.asarray(v, dtype=np.float64)
    return (float(m[0]), float(m[1]), float(m[2]))


def quat_forward(q: Quat) -> Vec3:
    """World-space forward direction: +z rotated by q."""
    return rotate_vector(q, (0.0, 0.0, 1.0))


def vec_add(a: Vec3, b: Vec3) -> Vec3:
    return (a[0] + b[0], a[1] + b[1], a[2] + b[2])


def vec_sub(a: Vec3, b: Vec3) -> Vec3:
    return (a[0] - b[0], a[1] - b[1], a[2] - b[2])


def vec_scale(a: Vec3, s: float) -> Vec3:
    return (a[0] * s, a[1] * s, a[2] * s)


def vec_length(a: Vec3) -> float:
    return math.sqrt(a[0] * a[0] + a[1] * a[1] + a[2] * a[2])
