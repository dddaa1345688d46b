"""Shared fixtures-in-code: hand-built session factories and the
independent oracles the acceptance suite compares against."""

from __future__ import annotations

import math

import numpy as np

from sessionscope.heatmap import GridSpec
from sessionscope.model import (
    CameraParams,
    Category,
    ObjectDescriptor,
    Pose,
    PoseSample,
    SessionLog,
)

IDENTITY = (0.0, 0.0, 0.0, 1.0)


def pose_at(x: float, y: float, z: float, q=IDENTITY) -> Pose:
    return Pose((x, y, z), q)


def simple_session(
    points: list[tuple[float, tuple[float, float, float]]],
    session_id: str = "test",
    hz: float = 10.0,
    duration: float | None = None,
    orientations: list | None = None,
) -> SessionLog:
    """One-player session with an explicit sample list."""
    samples = tuple(
        PoseSample(
            t=t,
            object_id="p1",
            pose=Pose(p, orientations[i] if orientations else IDENTITY),
        )
        for i, (t, p) in enumerate(points)
    )
    return SessionLog(
        session_id=session_id,
        game_name="Test Game",
        started_at="2024-01-01T00:00:00Z",
        sample_hz=hz,
        objects=(ObjectDescriptor("p1", "Player 1", Category.PLAYER),),
        camera_params={},
        statics=(),
        samples={"p1": samples},
        hands={},
        inputs=(),
        audio=(),
        duration=duration if duration is not None else (points[-1][0] if points else 0.0),
    )


# ---------------------------------------------------------------------------
# Replay oracle: linear scan + its own interpolation formulas.


def naive_resolve_position(stream, t: float):
    """Brute-force bracket scan; position via p0 + u*(p1 - p0)."""
    if t <= stream[0].t:
        return stream[0].pose.position
    if t >= stream[-1].t:
        return stream[-1].pose.position
    for i in range(len(stream) - 1):
        s0, s1 = stream[i], stream[i + 1]
        if s0.t <= t <= s1.t:
            if t == s0.t:
                return s0.pose.position
            if t == s1.t:
                return s1.pose.position
            u = (t - s0.t) / (s1.t - s0.t)
            p0, p1 = s0.pose.position, s1.pose.position
            return tuple(p0[k] + u * (p1[k] - p0[k]) for k in range(3))
    raise AssertionError("unreachable: t inside stream bounds")


# ---------------------------------------------------------------------------
# Heatmap oracle: per-sample floor-division binning into a dict.


def oracle_bin(positions, spec: GridSpec) -> dict[tuple[int, int], int]:
    counts: dict[tuple[int, int], int] = {}
    for x, z in positions:
        qx = (x - spec.origin[0]) / spec.cell_size
        qz = (z - spec.origin[1]) / spec.cell_size
        col, row = math.floor(qx), math.floor(qz)
        if col == spec.cols and qx == float(spec.cols):
            col -= 1
        if row == spec.rows and qz == float(spec.rows):
            row -= 1
        if 0 <= col < spec.cols and 0 <= row < spec.rows:
            counts[(col, row)] = counts.get((col, row), 0) + 1
    return counts


# ---------------------------------------------------------------------------
# Frustum oracle: transform the point into camera coordinates and compare
# against the pyramid bounds directly.


def quat_matrix(q) -> np.ndarray:
    x, y, z, w = q
    return np.array(
        [
            [1 - 2 * (y * y + z * z), 2 * (x * y - z * w), 2 * (x * z + y * w)],
            [2 * (x * y + z * w), 1 - 2 * (x * x + z * z), 2 * (y * z - x * w)],
            [2 * (x * z - y * w), 2 * (y * z + x * w), 1 - 2 * (x * x + y * y)],
        ]
    )


def camera_space_contains(pose: Pose, params: CameraParams, point) -> bool:
    rot = quat_matrix(pose.orientation)
    local = rot.T @ (np.asarray(point, dtype=float) - np.asarray(pose.position, dtype=float))
    x, y, z = float(local[0]), float(local[1]), float(local[2])
    tv = math.tan(params.vfov / 2.0)
    th = params.aspect * tv
    return params.near <= z <= params.far and abs(y) <= z * tv and abs(x) <= z * th


def camera_space_margin(pose: Pose, params: CameraParams, point) -> float:
    """Distance-like margin to the nearest frustum boundary (camera space)."""
    rot = quat_matrix(pose.orientation)
    local = rot.T @ (np.asarray(point, dtype=float) - np.asarray(pose.position, dtype=float))
    x, y, z = float(local[0]), float(local[1]), float(local[2])
    tv = math.tan(params.vfov / 2.0)
    th = params.aspect * tv
    sv = math.sqrt(1 + tv * tv)
    sh = math.sqrt(1 + th * th)
    return min(
        abs(z - params.near),
        abs(params.far - z),
        abs(z * tv - y) / sv,
        abs(z * tv + y) / sv,
        abs(z * th - x) / sh,
        abs(z * th + x) / sh,
    )


def random_unit_quat(rng: np.random.Generator):
    v = rng.normal(size=4)
    v = v / np.linalg.norm(v)
    if v[3] < 0:
        v = -v
    return tuple(float(c) for c in v)
