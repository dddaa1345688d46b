"""Domain types for one recorded gameplay session.

Everything here is an immutable value. Construction performs only cheap
sanity checks (finiteness, basic ranges); full cross-record consistency
lives in :func:`sessionscope.logstore.validate_session`, which reports
violations instead of raising so that damaged logs can still be inspected.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Mapping

from .geometry import Quat, Vec3

DEFAULT_HAND_JOINTS = 26


class Category(str, Enum):
    PLAYER = "Player"
    CAMERA = "Camera"
    HAND = "Hand"
    AUDIO_SOURCE = "AudioSource"
    CUSTOM = "Custom"


class HandSide(str, Enum):
    LEFT = "Left"
    RIGHT = "Right"


class InputKind(str, Enum):
    BUTTON = "Button"
    JOYSTICK = "Joystick"
    TRIGGER = "Trigger"
    GESTURE = "Gesture"


def _check_finite_vec(name: str, v: Vec3) -> None:
    if not all(math.isfinite(c) for c in v):
        raise ValueError(f"{name} has non-finite components: {v!r}")


@dataclass(frozen=True)
class Pose:
    """World position (meters) plus orientation as an (x, y, z, w) quaternion.

    The orientation is expected to be unit length; use
    :func:`sessionscope.geometry.canonicalize_quaternion` before storing
    raw sensor values. Norm drift is reported by validation, not here,
    so freshly parsed logs can carry whatever the file said.
    """

    position: Vec3
    orientation: Quat

    def __post_init__(self):
        _check_finite_vec("position", self.position)
        if not all(math.isfinite(c) for c in self.orientation):
            raise ValueError(f"orientation has non-finite components: {self.orientation!r}")


@dataclass(frozen=True)
class ObjectDescriptor:
    """Registry entry for one tracked object."""

    id: str
    display_name: str
    category: Category
    dynamic: bool = True
    hand_side: HandSide | None = None
    joint_count: int | None = None


@dataclass(frozen=True)
class CameraParams:
    """Perspective parameters a view frustum is rebuilt from at replay time."""

    vfov: float  # vertical field of view, radians
    aspect: float  # width / height
    near: float  # meters
    far: float  # meters

    def __post_init__(self):
        if not (0.0 < self.vfov < math.pi):
            raise ValueError(f"vfov must be in (0, pi), got {self.vfov}")
        if self.aspect <= 0.0:
            raise ValueError(f"aspect must be positive, got {self.aspect}")
        if not (0.0 < self.near < self.far):
            raise ValueError(f"need 0 < near < far, got near={self.near} far={self.far}")


@dataclass(frozen=True)
class PoseSample:
    t: float  # seconds since recording start
    object_id: str
    pose: Pose


@dataclass(frozen=True)
class HandFrame:
    t: float
    object_id: str
    side: HandSide
    wrist: Pose
    joints: tuple[Vec3, ...]  # world positions, length = descriptor joint count


@dataclass(frozen=True)
class InputEvent:
    t: float
    control: str  # button/axis/gesture name
    kind: InputKind
    action: str  # in-game action label
    position: Vec3  # world position where the input occurred
    value: float  # [-1, 1]; a plain button press is 1.0

    def __post_init__(self):
        if not math.isfinite(self.value):
            raise ValueError(f"input value must be finite, got {self.value}")


@dataclass(frozen=True)
class AudioEvent:
    t: float
    clip_name: str
    length: float  # clip length, seconds
    source_object_id: str
    position: Vec3

    def __post_init__(self):
        if self.length < 0.0:
            raise ValueError(f"audio length must be >= 0, got {self.length}")


@dataclass(frozen=True)
class StaticObject:
    """Scenery captured once when the recording is saved."""

    id: str
    display_name: str
    pose: Pose
    extent: Vec3 | None = None  # axis-aligned half-extents for drawing


@dataclass(frozen=True)
class SessionLog:
    """One recorded gameplay session.

    ``samples`` and ``hands`` map object ids to time-ordered streams.
    ``duration`` comes from the end record and bounds every timestamp.
    """

    session_id: str
    game_name: str
    started_at: str  # wall-clock ISO-8601, stored opaquely
    sample_hz: float
    objects: tuple[ObjectDescriptor, ...] = ()
    camera_params: Mapping[str, CameraParams] = field(default_factory=dict)
    statics: tuple[StaticObject, ...] = ()
    samples: Mapping[str, tuple[PoseSample, ...]] = field(default_factory=dict)
    hands: Mapping[str, tuple[HandFrame, ...]] = field(default_factory=dict)
    inputs: tuple[InputEvent, ...] = ()
    audio: tuple[AudioEvent, ...] = ()
    duration: float = 0.0

    def descriptor(self, object_id: str) -> ObjectDescriptor | None:
        for d in self.objects:
            if d.id == object_id:
                return d
        return None

    def max_timestamp(self) -> float:
        """Largest timestamp across all streams and events (0.0 if empty)."""
        t = 0.0
        for stream in self.samples.values():
            if stream:
                t = max(t, stream[-1].t)
        for stream in self.hands.values():
            if stream:
                t = max(t, stream[-1].t)
        for ev in self.inputs:
            t = max(t, ev.t)
        for ev in self.audio:
            t = max(t, ev.t)
        return t
