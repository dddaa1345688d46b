"""Camera-visibility analytics and usage metrics.

The view frustum is rebuilt from each camera pose plus its recorded
projection parameters as six inward-facing planes. Containment drives
two derived products: exploration coverage (which ground cells ever fell
in view) and per-object visibility intervals. Usage metrics count
analyst interactions (transport presses, heatmap toggles, notes).
"""

from __future__ import annotations

import json
import math
import threading
from dataclasses import dataclass
from enum import Enum
from typing import Sequence

import numpy as np

from .errors import EmptyDataError
from .geometry import Vec3, quat_to_matrix
from .heatmap import GridSpec
from .model import CameraParams, Pose, PoseSample

DEFAULT_PROBE_HEIGHT = 1.0


@dataclass(frozen=True)
class Frustum:
    """Six oriented planes (near, far, left, right, top, bottom); a point
    is inside when dot(normal, p) + offset >= 0 for all of them."""

    normals: tuple[Vec3, ...]
    offsets: tuple[float, ...]


def build_frustum(pose: Pose, params: CameraParams) -> Frustum:
    """Planes of the camera's visible volume.

    Apex at the camera position, view axis = +z rotated by the camera
    orientation, vertical half-angle vfov/2, horizontal half-angle
    atan(aspect * tan(vfov/2)), truncated at near and far.
    """
    rot = quat_to_matrix(pose.orientation)
    right = tuple(float(rot[i, 0]) for i in range(3))
    up = tuple(float(rot[i, 1]) for i in range(3))
    fwd = tuple(float(rot[i, 2]) for i in range(3))
    c = pose.position

    tv = math.tan(params.vfov / 2.0)
    th = params.aspect * tv

    def plane_through(normal: Vec3, point: Vec3) -> tuple[Vec3, float]:
        return normal, -(normal[0] * point[0] + normal[1] * point[1] + normal[2] * point[2])

    def side_plane(axis: Vec3, sign: float, slope: float) -> tuple[Vec3, float]:
        # Camera-space normal (-sign*axis + slope*fwd), normalized; the
        # plane passes through the apex.
        n_len = math.sqrt(1.0 + slope * slope)
        normal = tuple(
            (-sign * axis[i] + slope * fwd[i]) / n_len for i in range(3)
        )
        return plane_through(normal, c)  # type: ignore[arg-type]

    near_pt = tuple(c[i] + params.near * fwd[i] for i in range(3))
    far_pt = tuple(c[i] + params.far * fwd[i] for i in range(3))
    planes = [
        plane_through(fwd, near_pt),  # near: in front of it
        plane_through(tuple(-f for f in fwd), far_pt),  # far: behind it
        side_plane(right, 1.0, th),  # right:  x <= z*th
        side_plane(tuple(-r for r in right), 1.0, th),  # left: x >= -z*th
        side_plane(up, 1.0, tv),  # top:    y <= z*tv
        side_plane(tuple(-u for u in up), 1.0, tv),  # bottom: y >= -z*tv
    ]
    return Frustum(
        normals=tuple(p[0] for p in planes),
        offsets=tuple(p[1] for p in planes),
    )


def frustum_contains(f: Frustum, p: Vec3) -> bool:
    """True iff p is on the contained side of all six planes; boundary
    points count as inside."""
    for n, d in zip(f.normals, f.offsets):
        if n[0] * p[0] + n[1] * p[1] + n[2] * p[2] + d < 0.0:
            return False
    return True


def frustum_contains_many(f: Frustum, points: np.ndarray) -> np.ndarray:
    """Vectorized containment for an (N, 3) float array."""
    normals = np.asarray(f.normals)  # (6, 3)
    offsets = np.asarray(f.offsets)  # (6,)
    return np.all(points @ normals.T + offsets >= 0.0, axis=1)


# ---------------------------------------------------------------------------
# Coverage


@dataclass(frozen=True)
class CoverageGrid:
    """Which ground-plane cells ever fell inside the camera frustum."""

    spec: GridSpec
    seen: tuple[tuple[bool, ...], ...]
    first_seen_t: tuple[tuple[float | None, ...], ...]

    @property
    def covered_fraction(self) -> float:
        total = self.spec.cols * self.spec.rows
        hit = sum(sum(1 for v in row if v) for row in self.seen)
        return hit / total

    def unseen_cells(self) -> list[tuple[int, int]]:
        """(col, row) pairs never seen, scanned row-major."""
        return [
            (col, row)
            for row in range(self.spec.rows)
            for col in range(self.spec.cols)
            if not self.seen[row][col]
        ]


def compute_coverage(
    camera_stream: Sequence[PoseSample],
    params: CameraParams,
    spec: GridSpec,
    probe_height: float = DEFAULT_PROBE_HEIGHT,
) -> CoverageGrid:
    """Mark every cell whose center (at the probe height) the frustum
    contained at any sample; first_seen_t is the earliest such time."""
    if len(camera_stream) == 0:
        raise EmptyDataError("coverage needs a non-empty camera stream")
    cols, rows = spec.cols, spec.rows
    centers = np.empty((rows * cols, 3), dtype=np.float64)
    for row in range(rows):
        for col in range(cols):
            cx, cz = spec.cell_center(col, row)
            centers[row * cols + col] = (cx, probe_height, cz)
    seen = np.zeros(rows * cols, dtype=bool)
    first_seen = np.full(rows * cols, np.nan)
    for s in camera_stream:
        inside = frustum_contains_many(build_frustum(s.pose, params), centers)
        newly = inside & ~seen
        if newly.any():
            first_seen[newly] = s.t
            seen |= newly
        if seen.all():
            break
    return CoverageGrid(
        spec=spec,
        seen=tuple(tuple(bool(v) for v in seen[r * cols : (r + 1) * cols]) for r in range(rows)),
        first_seen_t=tuple(
            tuple(None if math.isnan(v) else float(v) for v in first_seen[r * cols : (r + 1) * cols])
            for r in range(rows)
        ),
    )


def merge_coverage(grids: Sequence[CoverageGrid]) -> CoverageGrid:
    """Union coverage of several runs over one shared spec."""
    if not grids:
        raise EmptyDataError("nothing to merge")
    spec = grids[0].spec
    if any(g.spec != spec for g in grids):
        raise ValueError("coverage grids must share one spec")
    rows, cols = spec.rows, spec.cols
    seen = [[False] * cols for _ in range(rows)]
    first = [[None] * cols for _ in range(rows)]
    for g in grids:
        for r in range(rows):
            for c in range(cols):
                t = g.first_seen_t[r][c]
                if t is None:
                    continue
                if first[r][c] is None or t < first[r][c]:  # type: ignore[operator]
                    first[r][c] = t  # type: ignore[assignment]
                    seen[r][c] = True
    return CoverageGrid(
        spec=spec,
        seen=tuple(tuple(row) for row in seen),
        first_seen_t=tuple(tuple(row) for row in first),
    )


def coverage_report(grid: CoverageGrid) -> dict:
    """JSON-ready coverage summary."""
    return {
        "spec": {
            "origin": [grid.spec.origin[0], grid.spec.origin[1]],
            "cell_size": grid.spec.cell_size,
            "cols": grid.spec.cols,
            "rows": grid.spec.rows,
        },
        "covered_fraction": grid.covered_fraction,
        "unseen_cells": [[c, r] for c, r in grid.unseen_cells()],
    }


# ---------------------------------------------------------------------------
# Visibility intervals


def visibility_intervals(
    camera_stream: Sequence[PoseSample],
    params: CameraParams,
    object_stream: Sequence[PoseSample],
) -> list[tuple[float, float]]:
    """Closed [t_enter, t_exit] intervals during which the object's
    sampled position sat inside the camera frustum, evaluated at the
    sampler instants shared by both streams."""
    if len(camera_stream) == 0 or len(object_stream) == 0:
        raise EmptyDataError("visibility needs non-empty streams")
    positions = {s.t: s.pose.position for s in object_stream}
    intervals: list[tuple[float, float]] = []
    current_start: float | None = None
    last_inside_t = 0.0
    for cam in camera_stream:
        p = positions.get(cam.t)
        if p is None:
            continue
        inside = frustum_contains(build_frustum(cam.pose, params), p)
        if inside:
            if current_start is None:
                current_start = cam.t
            last_inside_t = cam.t
        elif current_start is not None:
            intervals.append((current_start, last_inside_t))
            current_start = None
    if current_start is not None:
        intervals.append((current_start, last_inside_t))
    return intervals


# ---------------------------------------------------------------------------
# Usage metrics


class MetricKind(Enum):
    PLAY = "NumTimesPlayed"
    PLAY_REVERSE = "NumTimesPlayedReverse"
    PLAY_FORWARD = "NumTimesPlayedForward"
    PAUSE = "NumTimesPaused"
    HEATMAP_TOGGLE = "NumTimesHeatmapToggled"
    NOTE = "NumTimesNoteGenerated"


METRIC_NAMES = tuple(kind.value for kind in MetricKind)


@dataclass(frozen=True)
class UsageMetrics:
    NumTimesPlayed: int = 0
    NumTimesPlayedReverse: int = 0
    NumTimesPlayedForward: int = 0
    NumTimesPaused: int = 0
    NumTimesHeatmapToggled: int = 0
    NumTimesNoteGenerated: int = 0

    @property
    def total(self) -> int:
        return sum(getattr(self, name) for name in METRIC_NAMES)


class MetricsRecorder:
    """Monotone interaction counters; increments are atomic."""

    def __init__(self) -> None:
        self._lock = threading.RLock()
        self._counts = {kind: 0 for kind in MetricKind}

    def record(self, kind: MetricKind) -> None:
        with self._lock:
            self._counts[kind] += 1

    def snapshot(self) -> UsageMetrics:
        with self._lock:
            return UsageMetrics(**{kind.value: n for kind, n in self._counts.items()})

    def to_json(self) -> str:
        snap = self.snapshot()
        return json.dumps({name: getattr(snap, name) for name in METRIC_NAMES})

    def reset(self) -> None:
        with self._lock:
            for kind in self._counts:
                self._counts[kind] = 0
