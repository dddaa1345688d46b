"""Seekable replay over loaded sessions.

Owns the transport clock state machine (play, pause, resume, rewind,
fast-forward, stop, seek), resolves interpolated frames at any replay
time, builds progressive trails, and applies visibility filters. Loaded
logs are immutable; every frame is an independent snapshot.
"""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Mapping, Sequence

from .errors import CapacityError, UnknownIdError
from .geometry import Vec3, lerp_position, slerp_orientation
from .model import (
    CameraParams,
    Category,
    HandFrame,
    Pose,
    PoseSample,
    SessionLog,
    StaticObject,
)

DEFAULT_LOAD_LIMIT = 3
EVENT_WINDOW = 0.25
PLAY_RATE = 1.0
FAST_FORWARD_RATE = 2.0

# 8 high-contrast colors, assigned to sessions by load order.
PALETTE: tuple[tuple[int, int, int], ...] = (
    (230, 57, 70),
    (38, 132, 255),
    (46, 196, 94),
    (255, 183, 3),
    (155, 93, 229),
    (0, 187, 212),
    (255, 111, 0),
    (240, 98, 146),
)

TRANSPORT_COMMANDS = ("play", "pause", "resume", "rewind", "fast_forward", "stop", "seek")

# Category toggles beyond object categories: statics, event markers, trails.
FILTER_GROUPS = (
    "Player",
    "Camera",
    "Hand",
    "AudioSource",
    "Custom",
    "Statics",
    "Inputs",
    "Audio",
    "Trails",
)

_CATEGORY_GROUP = {
    Category.PLAYER: "Player",
    Category.CAMERA: "Camera",
    Category.HAND: "Hand",
    Category.AUDIO_SOURCE: "AudioSource",
    Category.CUSTOM: "Custom",
}


class Mode(str, Enum):
    STOPPED = "Stopped"
    PLAYING = "Playing"
    PAUSED = "Paused"


class Direction(str, Enum):
    FORWARD = "Forward"
    BACKWARD = "Backward"


@dataclass(frozen=True)
class TransportState:
    mode: Mode = Mode.STOPPED
    direction: Direction = Direction.FORWARD
    rate: float = PLAY_RATE
    t: float = 0.0


@dataclass(frozen=True)
class LoadedSet:
    sessions: tuple[SessionLog, ...]
    colors: tuple[tuple[int, int, int], ...]
    duration_max: float


def load_sessions(logs: Sequence[SessionLog], limit: int = DEFAULT_LOAD_LIMIT) -> LoadedSet:
    """Admit up to ``limit`` sessions and assign palette colors by order."""
    if len(logs) == 0:
        raise ValueError("at least one session required")
    if len(logs) > limit:
        raise CapacityError(f"cannot load {len(logs)} sessions: limit is {limit}")
    return LoadedSet(
        sessions=tuple(logs),
        colors=tuple(PALETTE[i % len(PALETTE)] for i in range(len(logs))),
        duration_max=max(s.duration for s in logs),
    )


@dataclass(frozen=True)
class FilterSet:
    """Visibility switches; nothing here mutates the underlying logs."""

    categories: frozenset[str] = frozenset(FILTER_GROUPS)
    objects: Mapping[str, bool] = field(default_factory=dict)
    sessions: tuple[bool, ...] | None = None  # None = all on

    def session_on(self, index: int) -> bool:
        if self.sessions is None or index >= len(self.sessions):
            return True
        return self.sessions[index]

    def object_on(self, object_id: str, category: Category) -> bool:
        override = self.objects.get(object_id)
        if override is not None:
            return override
        return _CATEGORY_GROUP[category] in self.categories

    def group_on(self, group: str) -> bool:
        return group in self.categories


@dataclass(frozen=True)
class ResolvedObject:
    session_index: int
    object_id: str
    display_name: str
    category: Category
    color: tuple[int, int, int]
    pose: Pose
    joints: tuple[Vec3, ...] | None = None
    hand_side: str | None = None
    camera_params: CameraParams | None = None


@dataclass(frozen=True)
class StaticMarker:
    session_index: int
    static: StaticObject
    color: tuple[int, int, int]


@dataclass(frozen=True)
class Trail:
    session_index: int
    object_id: str
    color: tuple[int, int, int]
    points: tuple[tuple[float, Vec3], ...]


@dataclass(frozen=True)
class EventMarker:
    session_index: int
    kind: str  # "input" | "audio"
    t: float
    position: Vec3
    label: str
    detail: str


@dataclass(frozen=True)
class ReplayFrame:
    t: float
    transport: TransportState
    objects: tuple[ResolvedObject, ...]
    statics: tuple[StaticMarker, ...]
    trails: tuple[Trail, ...]
    events: tuple[EventMarker, ...]


class _Stream:
    """One object's sample stream with a bisectable time index."""

    def __init__(self, samples: Sequence[PoseSample] | Sequence[HandFrame]):
        self.samples = samples
        self.times = [s.t for s in samples]

    def bracket(self, t: float) -> tuple[int, int, float]:
        """Indices (i0, i1) and fraction u such that the pose at t is
        interp(samples[i0], samples[i1], u); clamps outside the stream."""
        times = self.times
        if t <= times[0]:
            return 0, 0, 0.0
        if t >= times[-1]:
            n = len(times) - 1
            return n, n, 0.0
        i = bisect.bisect_right(times, t)
        t0, t1 = times[i - 1], times[i]
        if t == t0:
            return i - 1, i - 1, 0.0
        return i - 1, i, (t - t0) / (t1 - t0)


def _resolve_pose(stream: _Stream, t: float) -> Pose:
    i0, i1, u = stream.bracket(t)
    s0: PoseSample = stream.samples[i0]  # type: ignore[assignment]
    if i0 == i1:
        return s0.pose
    s1: PoseSample = stream.samples[i1]  # type: ignore[assignment]
    return Pose(
        lerp_position(s0.pose.position, s1.pose.position, u),
        slerp_orientation(s0.pose.orientation, s1.pose.orientation, u),
    )


def _resolve_hand(stream: _Stream, t: float) -> tuple[Pose, tuple[Vec3, ...]]:
    i0, i1, u = stream.bracket(t)
    h0: HandFrame = stream.samples[i0]  # type: ignore[assignment]
    if i0 == i1:
        return h0.wrist, h0.joints
    h1: HandFrame = stream.samples[i1]  # type: ignore[assignment]
    wrist = Pose(
        lerp_position(h0.wrist.position, h1.wrist.position, u),
        slerp_orientation(h0.wrist.orientation, h1.wrist.orientation, u),
    )
    joints = tuple(lerp_position(a, b, u) for a, b in zip(h0.joints, h1.joints))
    return wrist, joints


class _SessionIndex:
    def __init__(self, log: SessionLog):
        self.log = log
        self.pose_streams = {oid: _Stream(s) for oid, s in log.samples.items()}
        self.hand_streams = {oid: _Stream(h) for oid, h in log.hands.items()}
        self.input_times = [e.t for e in log.inputs]
        self.audio_times = [e.t for e in log.audio]


class ReplayEngine:
    """Transport + frame resolution over one LoadedSet."""

    def __init__(self, loaded: LoadedSet, metrics=None, annotations=None):
        from .analytics import MetricsRecorder
        from .annotations import AnnotationStore

        self.loaded = loaded
        self.metrics = metrics if metrics is not None else MetricsRecorder()
        self.annotations = annotations if annotations is not None else AnnotationStore()
        self._index = [_SessionIndex(s) for s in loaded.sessions]
        self._transport = TransportState()
        self._filters = FilterSet()

    # -- transport -----------------------------------------------------------

    @property
    def transport(self) -> TransportState:
        return self._transport

    @property
    def filters(self) -> FilterSet:
        return self._filters

    def apply_transport(self, cmd: str, t: float | None = None) -> TransportState:
        """Apply one transport command; every accepted command counts
        toward its usage metric."""
        from .analytics import MetricKind

        s = self._transport
        if cmd == "play":
            s = replace(s, mode=Mode.PLAYING, direction=Direction.FORWARD, rate=PLAY_RATE)
            self.metrics.record(MetricKind.PLAY)
        elif cmd == "fast_forward":
            s = replace(s, mode=Mode.PLAYING, direction=Direction.FORWARD, rate=FAST_FORWARD_RATE)
            self.metrics.record(MetricKind.PLAY_FORWARD)
        elif cmd == "rewind":
            s = replace(s, mode=Mode.PLAYING, direction=Direction.BACKWARD, rate=PLAY_RATE)
            self.metrics.record(MetricKind.PLAY_REVERSE)
        elif cmd == "pause":
            s = replace(s, mode=Mode.PAUSED)
            self.metrics.record(MetricKind.PAUSE)
        elif cmd == "resume":
            # With no prior play the retained defaults make this a play.
            s = replace(s, mode=Mode.PLAYING)
            self.metrics.record(MetricKind.PLAY)
        elif cmd == "stop":
            s = TransportState(mode=Mode.STOPPED, t=0.0)
        elif cmd == "seek":
            if t is None or isinstance(t, bool) or not isinstance(t, (int, float)) or not math.isfinite(t):
                raise ValueError("seek requires a finite t")
            s = replace(s, t=min(max(float(t), 0.0), self.loaded.duration_max))
        else:
            raise ValueError(f"unknown transport command {cmd!r}")
        self._transport = s
        return s

    def advance_clock(self, wall_dt: float) -> TransportState:
        """Advance replay time by wall seconds while Playing; boundaries
        auto-pause without counting as a pause press."""
        if not wall_dt >= 0:
            raise ValueError("wall_dt must be non-negative")
        s = self._transport
        if s.mode is not Mode.PLAYING:
            return s
        sign = 1.0 if s.direction is Direction.FORWARD else -1.0
        new_t = s.t + sign * s.rate * wall_dt
        dmax = self.loaded.duration_max
        if new_t >= dmax and s.direction is Direction.FORWARD:
            s = replace(s, t=dmax, mode=Mode.PAUSED)
        elif new_t <= 0.0 and s.direction is Direction.BACKWARD:
            s = replace(s, t=0.0, mode=Mode.PAUSED)
        else:
            s = replace(s, t=new_t)
        self._transport = s
        return s

    def force_pause(self) -> TransportState:
        """Pause without counting a pause press (annotation auto-pause)."""
        if self._transport.mode is Mode.PLAYING:
            self._transport = replace(self._transport, mode=Mode.PAUSED)
        return self._transport

    # -- filters ---------------------------------------------------------------

    def set_filters(self, filters: FilterSet) -> None:
        known: set[str] = set()
        for log in self.loaded.sessions:
            known.update(d.id for d in log.objects)
            known.update(s.id for s in log.statics)
        for oid in filters.objects:
            if oid not in known:
                raise UnknownIdError(f"filter override for unknown object id {oid!r}")
        if filters.sessions is not None and len(filters.sessions) != len(self.loaded.sessions):
            raise ValueError("per-session filter length must match loaded session count")
        self._filters = filters

    # -- annotations --------------------------------------------------------------

    def add_annotation(self, position: Vec3, text: str, t: float | None = None, author: str | None = None):
        """Create a note anchored at a position and replay time; pauses
        playback if running."""
        from .analytics import MetricKind

        anchor_t = self._transport.t if t is None else float(t)
        anchor_t = min(max(anchor_t, 0.0), self.loaded.duration_max)
        note = self.annotations.add(position, anchor_t, text, author=author)
        self.force_pause()
        self.metrics.record(MetricKind.NOTE)
        return note

    # -- frame resolution -----------------------------------------------------------

    def trail_prefix(self, object_id: str, session_index: int, t: float) -> tuple[tuple[float, Vec3], ...]:
        """Recorded positions with timestamp <= t, ending with the
        interpolated position at t."""
        if not 0 <= session_index < len(self._index):
            raise UnknownIdError(f"no session at index {session_index}")
        idx = self._index[session_index]
        stream = idx.pose_streams.get(object_id)
        if stream is None:
            raise UnknownIdError(f"no sample stream for object {object_id!r}")
        pts: list[tuple[float, Vec3]] = []
        i = bisect.bisect_right(stream.times, t)
        for s in stream.samples[:i]:
            pts.append((s.t, s.pose.position))
        if not pts or pts[-1][0] != t:
            pose = _resolve_pose(stream, t)
            pts.append((t, pose.position))
        return tuple(pts)

    def resolve_frame(self, t: float | None = None, filters: FilterSet | None = None) -> ReplayFrame:
        """Resolve the full visible scene at replay time t."""
        if t is None:
            t = self._transport.t
        if filters is None:
            filters = self._filters
        t = min(max(t, 0.0), self.loaded.duration_max)

        objects: list[ResolvedObject] = []
        statics: list[StaticMarker] = []
        trails: list[Trail] = []
        events: list[EventMarker] = []
        for si, idx in enumerate(self._index):
            if not filters.session_on(si):
                continue
            log = idx.log
            color = self.loaded.colors[si]
            for d in log.objects:
                if not filters.object_on(d.id, d.category):
                    continue
                if d.category is Category.HAND:
                    stream = idx.hand_streams.get(d.id)
                    if stream is None:
                        continue
                    wrist, joints = _resolve_hand(stream, t)
                    objects.append(
                        ResolvedObject(
                            session_index=si,
                            object_id=d.id,
                            display_name=d.display_name,
                            category=d.category,
                            color=color,
                            pose=wrist,
                            joints=joints,
                            hand_side=d.hand_side.value if d.hand_side else None,
                        )
                    )
                    continue
                stream = idx.pose_streams.get(d.id)
                if stream is None:
                    continue
                pose = _resolve_pose(stream, t)
                objects.append(
                    ResolvedObject(
                        session_index=si,
                        object_id=d.id,
                        display_name=d.display_name,
                        category=d.category,
                        color=color,
                        pose=pose,
                        camera_params=log.camera_params.get(d.id),
                    )
                )
                if d.category is Category.PLAYER and filters.group_on("Trails"):
                    trails.append(
                        Trail(si, d.id, color, self.trail_prefix(d.id, si, t))
                    )
            if filters.group_on("Statics"):
                for st in log.statics:
                    if filters.objects.get(st.id, True):
                        statics.append(StaticMarker(si, st, color))
            lo, hi = t - EVENT_WINDOW, t + EVENT_WINDOW
            if filters.group_on("Inputs"):
                a = bisect.bisect_left(idx.input_times, lo)
                b = bisect.bisect_right(idx.input_times, hi)
                for ev in log.inputs[a:b]:
                    events.append(
                        EventMarker(si, "input", ev.t, ev.position, ev.action, ev.control)
                    )
            if filters.group_on("Audio"):
                a = bisect.bisect_left(idx.audio_times, lo)
                b = bisect.bisect_right(idx.audio_times, hi)
                for ev in log.audio[a:b]:
                    events.append(
                        EventMarker(si, "audio", ev.t, ev.position, ev.clip_name, ev.source_object_id)
                    )
        return ReplayFrame(
            t=t,
            transport=self._transport,
            objects=tuple(objects),
            statics=tuple(statics),
            trails=tuple(trails),
            events=tuple(events),
        )
