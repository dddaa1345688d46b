"""Recording API a game loop drives.

A ``Recording`` handle owns a clock and a fixed-rate sampler. The loop
registers objects, pushes latest poses, emits events, and calls ``tick``
to advance time; every sampler instant crossed logs one synchronized
sample per registered dynamic object. Events are appended immediately
with exact timestamps and are never resampled.

Sampler instants are computed by integer index (``k / sample_hz``), never
by accumulating float periods, so instant k is bit-identical no matter
how the clock was advanced.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from datetime import datetime, timezone
from typing import Iterable, Sequence

from .errors import InvalidOrientationError, RegistrationError, StateError, UnknownIdError
from .geometry import Vec3, quat_norm
from .model import (
    AudioEvent,
    CameraParams,
    Category,
    HandFrame,
    InputEvent,
    ObjectDescriptor,
    Pose,
    PoseSample,
    SessionLog,
    StaticObject,
)

UNIT_NORM_TOL = 1e-6


@dataclass(frozen=True)
class RecordingConfig:
    """Static parameters of one recording."""

    session_id: str
    game_name: str
    sample_hz: float = 30.0
    started_at: str | None = None

    def __post_init__(self) -> None:
        if not self.sample_hz > 0:
            raise ValueError("sample_hz must be positive")


def sampler_instant(index: int, sample_hz: float) -> float:
    """Timestamp of sampler instant ``index`` at the given rate."""
    return index / sample_hz


def _require_unit(pose: Pose, what: str) -> None:
    n = quat_norm(pose.orientation)
    if abs(n - 1.0) > UNIT_NORM_TOL:
        raise InvalidOrientationError(f"{what}: orientation norm {n:.9f} is not unit")


class Recording:
    """One active recording; single logical producer."""

    def __init__(self, config: RecordingConfig):
        self._config = config
        self._started_at = config.started_at or datetime.now(timezone.utc).strftime(
            "%Y-%m-%dT%H:%M:%SZ"
        )
        self._clock = 0.0
        self._next_index = 0
        self._dynamic: dict[str, ObjectDescriptor] = {}
        self._static_ids: set[str] = set()
        self._pose_reg: dict[str, Pose] = {}
        self._hand_reg: dict[str, tuple[Pose, tuple[Vec3, ...]]] = {}
        self._camera_params: dict[str, CameraParams] = {}
        self._statics: list[StaticObject] = []
        self._samples: dict[str, list[PoseSample]] = {}
        self._hands: dict[str, list[HandFrame]] = {}
        self._inputs: list[InputEvent] = []
        self._audio: list[AudioEvent] = []
        self._finished = False

    # -- introspection ------------------------------------------------------

    @property
    def clock(self) -> float:
        return self._clock

    @property
    def next_instant(self) -> float:
        """Timestamp of the next sampler instant not yet consumed."""
        return sampler_instant(self._next_index, self._config.sample_hz)

    # -- registration -------------------------------------------------------

    def _check_active(self) -> None:
        if self._finished:
            raise StateError("recording already finished")

    def track_object(
        self,
        descriptor: ObjectDescriptor,
        initial_pose: Pose,
        camera_params: CameraParams | None = None,
        extent: Vec3 | None = None,
    ) -> None:
        """Register an object for tracking from the current time.

        Dynamic objects join the sampling set immediately; static ones
        (dynamic=False) keep their registration pose and are captured once
        at finish. ``extent`` applies to statics only.
        """
        self._check_active()
        if descriptor.id in self._dynamic or descriptor.id in self._static_ids:
            raise RegistrationError(f"id {descriptor.id!r} already registered")
        _require_unit(initial_pose, f"object {descriptor.id!r}")
        if descriptor.category is Category.CAMERA:
            if camera_params is None:
                raise RegistrationError(
                    f"camera {descriptor.id!r} registered without camera params"
                )
        elif camera_params is not None:
            raise RegistrationError(
                f"object {descriptor.id!r} is not a camera; camera params not allowed"
            )
        if not descriptor.dynamic:
            self._static_ids.add(descriptor.id)
            self._statics.append(
                StaticObject(
                    id=descriptor.id,
                    display_name=descriptor.display_name,
                    pose=initial_pose,
                    extent=tuple(extent) if extent is not None else None,
                )
            )
            return
        if descriptor.category is Category.HAND and (
            descriptor.hand_side is None or not descriptor.joint_count
        ):
            raise RegistrationError(
                f"hand {descriptor.id!r} needs a declared side and joint count"
            )
        self._dynamic[descriptor.id] = descriptor
        if descriptor.category is Category.CAMERA:
            self._camera_params[descriptor.id] = camera_params  # type: ignore[assignment]
        if descriptor.category is Category.HAND:
            # Until the first hand update every joint sits at the wrist.
            joints = tuple(initial_pose.position for _ in range(descriptor.joint_count or 0))
            self._hand_reg[descriptor.id] = (initial_pose, joints)
        else:
            self._pose_reg[descriptor.id] = initial_pose

    # -- state pushes -------------------------------------------------------

    def update_pose(self, object_id: str, pose: Pose) -> None:
        """Overwrite the latest-pose register; logged at the next instant."""
        self._check_active()
        d = self._dynamic.get(object_id)
        if d is None:
            raise UnknownIdError(f"id {object_id!r} is not a registered dynamic object")
        if d.category is Category.HAND:
            raise RegistrationError(f"id {object_id!r} is a hand; use update_hand")
        _require_unit(pose, f"object {object_id!r}")
        self._pose_reg[object_id] = pose

    def update_hand(self, object_id: str, wrist: Pose, joints: Sequence[Vec3]) -> None:
        self._check_active()
        d = self._dynamic.get(object_id)
        if d is None:
            raise UnknownIdError(f"id {object_id!r} is not a registered dynamic object")
        if d.category is not Category.HAND:
            raise RegistrationError(f"id {object_id!r} is not a hand")
        if len(joints) != d.joint_count:
            raise RegistrationError(
                f"hand {object_id!r} declares {d.joint_count} joints, got {len(joints)}"
            )
        _require_unit(wrist, f"hand {object_id!r}")
        self._hand_reg[object_id] = (wrist, tuple(tuple(j) for j in joints))

    def emit_event(self, event: InputEvent | AudioEvent) -> None:
        """Append an event stamped with the current clock; not resampled."""
        self._check_active()
        event = replace(event, t=self._clock)
        if isinstance(event, AudioEvent):
            if (
                event.source_object_id not in self._dynamic
                and event.source_object_id not in self._static_ids
            ):
                raise UnknownIdError(
                    f"audio source id {event.source_object_id!r} is not registered"
                )
            self._audio.append(event)
        elif isinstance(event, InputEvent):
            self._inputs.append(event)
        else:
            raise TypeError(f"unsupported event type {type(event).__name__}")

    # -- time ---------------------------------------------------------------

    def tick(self, dt: float) -> int:
        """Advance the clock by dt seconds; log every instant crossed.

        Returns the number of records (pose samples + hand frames) emitted
        by this call. The instant t=0 is consumed by the first tick.
        """
        self._check_active()
        if not dt >= 0:
            raise ValueError("dt must be non-negative")
        new_clock = self._clock + dt
        emitted = 0
        hz = self._config.sample_hz
        while sampler_instant(self._next_index, hz) <= new_clock:
            t = sampler_instant(self._next_index, hz)
            for oid, d in self._dynamic.items():
                if d.category is Category.HAND:
                    wrist, joints = self._hand_reg[oid]
                    self._hands.setdefault(oid, []).append(
                        HandFrame(t=t, object_id=oid, side=d.hand_side, wrist=wrist, joints=joints)
                    )
                else:
                    self._samples.setdefault(oid, []).append(
                        PoseSample(t=t, object_id=oid, pose=self._pose_reg[oid])
                    )
                emitted += 1
            self._next_index += 1
        self._clock = new_clock
        return emitted

    # -- finalization -------------------------------------------------------

    def finish(self) -> SessionLog:
        """Capture statics, stamp the duration, and build the session."""
        self._check_active()
        self._finished = True
        return SessionLog(
            session_id=self._config.session_id,
            game_name=self._config.game_name,
            started_at=self._started_at,
            sample_hz=self._config.sample_hz,
            objects=tuple(self._dynamic.values()),
            camera_params=dict(self._camera_params),
            statics=tuple(self._statics),
            samples={oid: tuple(s) for oid, s in self._samples.items()},
            hands={oid: tuple(h) for oid, h in self._hands.items()},
            inputs=tuple(self._inputs),
            audio=tuple(self._audio),
            duration=self._clock,
        )


def start_recording(config: RecordingConfig) -> Recording:
    return Recording(config)
