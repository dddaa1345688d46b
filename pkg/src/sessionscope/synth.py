"""Deterministic session synthesizer.

Stands in for live gameplay as the data source: seeded pseudo-random but
smooth trajectories (waypoint wandering with a speed limit), periodic
input events, audio events on scripted triggers, and hand frames for the
fps-drill scenario. The same ScenarioSpec always yields a byte-identical
log: the PRNG is PCG64 seeded from the spec seed, the start timestamp is
a fixed epoch, and every draw happens in a fixed order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .geometry import (
    Quat,
    Vec3,
    canonicalize_quaternion,
    quat_from_axis_angle,
    quat_from_yaw,
    quat_multiply,
    rotate_vector,
)
from .model import (
    AudioEvent,
    CameraParams,
    Category,
    HandSide,
    InputEvent,
    InputKind,
    ObjectDescriptor,
    Pose,
    SessionLog,
)
from .recorder import Recording, RecordingConfig, sampler_instant, start_recording

SCENARIOS = ("arena", "patrol", "fps-drill")

_GAME_NAMES = {
    "arena": "Arena Skirmish",
    "patrol": "Night Patrol",
    "fps-drill": "Range Drill",
}

_EPOCH = "2024-01-01T00:00:00Z"

_CAMERA_PARAMS = CameraParams(
    vfov=math.radians(60.0), aspect=16.0 / 9.0, near=0.1, far=60.0
)

# 26-joint hand skeleton: wrist + palm + 5 fingers derived on a fixed grid.
_JOINT_LOCALS: tuple[Vec3, ...] = tuple(
    (0.0, 0.0, 0.0) if j == 0 else ((j % 5 - 2) * 0.02, -0.006 * (j // 5), 0.03 + 0.018 * (j // 5))
    for j in range(26)
)


@dataclass(frozen=True)
class ScenarioSpec:
    """Parameters of one synthetic session."""

    scenario: str
    seed: int
    player_count: int = 1
    duration: float = 60.0
    extent: tuple[float, float, float, float] = (-10.0, -10.0, 10.0, 10.0)
    sample_hz: float = 30.0

    def __post_init__(self) -> None:
        if self.scenario not in SCENARIOS:
            raise ValueError(f"unknown scenario {self.scenario!r}; expected one of {SCENARIOS}")
        if not self.duration > 0:
            raise ValueError("duration must be positive")
        if self.player_count < 1:
            raise ValueError("player_count must be at least 1")
        x0, z0, x1, z1 = self.extent
        if not (x1 > x0 and z1 > z0):
            raise ValueError("extent must have positive area")
        if not self.sample_hz > 0:
            raise ValueError("sample_hz must be positive")


def _generator(seed_seq: np.random.SeedSequence) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed_seq))


def _clamp(v: float, lo: float, hi: float) -> float:
    return lo if v < lo else hi if v > hi else v


class _Mover:
    """Ground-plane walker: either free waypoint wandering or a fixed loop."""

    def __init__(
        self,
        extent: tuple[float, float, float, float],
        speed: float,
        start: tuple[float, float],
        rng: np.random.Generator | None,
        loop: list[tuple[float, float]] | None = None,
    ):
        self.extent = extent
        self.speed = speed
        self.x, self.z = start
        self.yaw = 0.0
        self.rng = rng
        self.loop = loop
        self.loop_index = 0
        self.wp = self._next_waypoint()

    def _next_waypoint(self) -> tuple[float, float]:
        if self.loop is not None:
            wp = self.loop[self.loop_index % len(self.loop)]
            self.loop_index += 1
            return wp
        x0, z0, x1, z1 = self.extent
        m = min(0.5, (x1 - x0) / 4, (z1 - z0) / 4)
        assert self.rng is not None
        return (
            float(self.rng.uniform(x0 + m, x1 - m)),
            float(self.rng.uniform(z0 + m, z1 - m)),
        )

    def step(self, dt: float) -> None:
        dx, dz = self.wp[0] - self.x, self.wp[1] - self.z
        dist = math.hypot(dx, dz)
        if dist < 0.25:
            self.wp = self._next_waypoint()
            dx, dz = self.wp[0] - self.x, self.wp[1] - self.z
            dist = math.hypot(dx, dz)
        if dist > 0:
            step = min(self.speed * dt, dist)
            self.x += dx / dist * step
            self.z += dz / dist * step
            self.yaw = math.atan2(dx, dz)
        x0, z0, x1, z1 = self.extent
        self.x = _clamp(self.x, x0, x1)
        self.z = _clamp(self.z, z0, z1)


def _pose(x: float, y: float, z: float, q: Quat) -> Pose:
    return Pose((x, y, z), canonicalize_quaternion(q))


class _World:
    """All scenario entities plus their event schedules."""

    def __init__(self, spec: ScenarioSpec):
        self.spec = spec
        x0, z0, x1, z1 = spec.extent
        self.cx, self.cz = (x0 + x1) / 2, (z0 + z1) / 2
        self.span = min(x1 - x0, z1 - z0)
        ss = np.random.SeedSequence(spec.seed & (2**64 - 1))
        move_ss, event_ss = ss.spawn(2)

        speed = {"arena": 2.0, "patrol": 1.4, "fps-drill": 1.0}[spec.scenario]
        loop = None
        if spec.scenario == "patrol":
            m = min(1.5, self.span / 4)
            loop = [(x0 + m, z0 + m), (x1 - m, z0 + m), (x1 - m, z1 - m), (x0 + m, z1 - m)]

        n_extra = 1 if spec.scenario in ("arena", "fps-drill") else 1
        move_children = move_ss.spawn(spec.player_count + n_extra)
        self.players: list[_Mover] = []
        for k in range(spec.player_count):
            angle = 2 * math.pi * k / spec.player_count
            r = self.span / 6
            start = (self.cx + r * math.sin(angle), self.cz + r * math.cos(angle))
            player_loop = None
            if loop is not None:
                player_loop = loop[k % 4 :] + loop[: k % 4]
            self.players.append(
                _Mover(spec.extent, speed, start, _generator(move_children[k]), player_loop)
            )

        extra_rng = _generator(move_children[spec.player_count])
        self.extra: _Mover | None = None
        if spec.scenario == "arena":
            self.extra = _Mover(spec.extent, 2.5, (self.cx, self.cz), extra_rng)
        elif spec.scenario == "patrol":
            assert loop is not None
            self.extra = _Mover(spec.extent, 1.2, loop[2], None, loop[2:] + loop[:2])

        self.input_rngs = [_generator(c) for c in event_ss.spawn(spec.player_count)]
        self.next_input = [float(r.uniform(*self._input_gap())) for r in self.input_rngs]
        self.input_cycle = 0
        self.audio_period = {"arena": 4.0, "patrol": 6.0, "fps-drill": 2.5}[spec.scenario]
        self.next_audio = self.audio_period
        self.audio_cycle = 0

    def _input_gap(self) -> tuple[float, float]:
        return {"arena": (1.0, 3.0), "patrol": (2.0, 5.0), "fps-drill": (0.5, 1.5)}[
            self.spec.scenario
        ]

    # -- registration --------------------------------------------------------

    def register(self, rec: Recording) -> None:
        spec = self.spec
        x0, z0, x1, z1 = spec.extent
        hw, hd = (x1 - x0) / 2, (z1 - z0) / 2
        walls = [
            ("wall-n", (self.cx, 1.0, z1), (hw, 1.0, 0.05)),
            ("wall-s", (self.cx, 1.0, z0), (hw, 1.0, 0.05)),
            ("wall-e", (x1, 1.0, self.cz), (0.05, 1.0, hd)),
            ("wall-w", (x0, 1.0, self.cz), (0.05, 1.0, hd)),
        ]
        for sid, pos, ext in walls:
            rec.track_object(
                ObjectDescriptor(sid, sid.replace("-", " ").title(), Category.CUSTOM, dynamic=False),
                Pose(pos, (0.0, 0.0, 0.0, 1.0)),
                extent=ext,
            )
        landmark = {"arena": "pillar", "patrol": "guard-post", "fps-drill": "bench"}[spec.scenario]
        self.landmark_id = landmark
        rec.track_object(
            ObjectDescriptor(landmark, landmark.replace("-", " ").title(), Category.CUSTOM, dynamic=False),
            Pose((self.cx, 0.5, self.cz + min(1.0, hd / 2)), (0.0, 0.0, 0.0, 1.0)),
            extent=(0.3, 0.5, 0.3),
        )

        for k, mover in enumerate(self.players, start=1):
            rec.track_object(
                ObjectDescriptor(f"player-{k}", f"Player {k}", Category.PLAYER),
                self._player_pose(mover),
            )
            rec.track_object(
                ObjectDescriptor(f"cam-{k}", f"Head Camera {k}", Category.CAMERA),
                self._camera_pose(mover, k, 0.0),
                camera_params=_CAMERA_PARAMS,
            )
            if spec.scenario == "fps-drill":
                for side in (HandSide.LEFT, HandSide.RIGHT):
                    hid = f"hand-{side.value[0].lower()}-{k}"
                    wrist, joints = self._hand_state(mover, side, 0.0)
                    rec.track_object(
                        ObjectDescriptor(
                            hid,
                            f"{side.value.title()} Hand {k}",
                            Category.HAND,
                            hand_side=side,
                            joint_count=26,
                        ),
                        wrist,
                    )
                    rec.update_hand(hid, wrist, joints)

        if spec.scenario == "arena":
            self.extra_id = "enemy-1"
            rec.track_object(
                ObjectDescriptor(self.extra_id, "Roaming Enemy", Category.AUDIO_SOURCE),
                self._extra_pose(0.0),
            )
            rec.track_object(
                ObjectDescriptor("crate-1", "Loot Crate", Category.CUSTOM),
                self._crate_pose(0.0),
            )
        elif spec.scenario == "patrol":
            self.extra_id = "npc-guard"
            rec.track_object(
                ObjectDescriptor(self.extra_id, "Guard NPC", Category.CUSTOM),
                self._extra_pose(0.0),
            )
        else:
            self.extra_id = "target-bot"
            rec.track_object(
                ObjectDescriptor(self.extra_id, "Target Bot", Category.AUDIO_SOURCE),
                self._extra_pose(0.0),
            )

    # -- pose construction ----------------------------------------------------

    def _player_pose(self, mover: _Mover) -> Pose:
        return _pose(mover.x, 0.0, mover.z, quat_from_yaw(mover.yaw))

    def _camera_pose(self, mover: _Mover, k: int, t: float) -> Pose:
        yaw = mover.yaw + 0.3 * math.sin(2 * math.pi * 0.05 * t + k)
        q = quat_from_yaw(yaw)
        if self.spec.scenario == "fps-drill":
            pitch = 0.12 * math.sin(2 * math.pi * 0.15 * t)
            q = quat_multiply(q, quat_from_axis_angle((1.0, 0.0, 0.0), pitch))
        return _pose(mover.x, 1.6, mover.z, q)

    def _hand_state(self, mover: _Mover, side: HandSide, t: float) -> tuple[Pose, tuple[Vec3, ...]]:
        lateral = -0.18 if side is HandSide.LEFT else 0.18
        sway = 0.02 * math.sin(2 * math.pi * 0.5 * t + (0.0 if side is HandSide.LEFT else math.pi))
        q = quat_from_yaw(mover.yaw)
        local = (lateral, -0.45 + sway, 0.32)
        off = rotate_vector(q, local)
        x0, z0, x1, z1 = self.spec.extent
        wx = _clamp(mover.x + off[0], x0, x1)
        wz = _clamp(mover.z + off[2], z0, z1)
        wrist = _pose(wx, 1.6 + off[1], wz, q)
        joints = []
        for jl in _JOINT_LOCALS:
            jo = rotate_vector(q, jl)
            joints.append(
                (
                    _clamp(wrist.position[0] + jo[0], x0, x1),
                    wrist.position[1] + jo[1],
                    _clamp(wrist.position[2] + jo[2], z0, z1),
                )
            )
        return wrist, tuple(joints)

    def _extra_pose(self, t: float) -> Pose:
        assert self.extra is not None or self.spec.scenario == "fps-drill"
        if self.spec.scenario == "fps-drill":
            x0, z0, x1, z1 = self.spec.extent
            amp = (x1 - x0) / 3
            x = self.cx + amp * math.sin(2 * math.pi * 0.25 * t)
            z = _clamp(self.cz + self.span / 4, z0, z1)
            return _pose(x, 1.0, z, quat_from_yaw(math.pi))
        assert self.extra is not None
        y = 0.0 if self.spec.scenario == "patrol" else 0.4
        return _pose(self.extra.x, y, self.extra.z, quat_from_yaw(self.extra.yaw))

    def _crate_pose(self, t: float) -> Pose:
        y = 0.5 + 0.3 * math.sin(2 * math.pi * 0.2 * t)
        return _pose(self.cx - self.span / 5, y, self.cz - self.span / 5, quat_from_yaw(0.5 * t % (2 * math.pi) - math.pi))

    # -- per-instant integration ----------------------------------------------

    def step(self, rec: Recording, t: float, dt: float) -> None:
        for k, mover in enumerate(self.players, start=1):
            mover.step(dt)
            rec.update_pose(f"player-{k}", self._player_pose(mover))
            rec.update_pose(f"cam-{k}", self._camera_pose(mover, k, t))
            if self.spec.scenario == "fps-drill":
                for side in (HandSide.LEFT, HandSide.RIGHT):
                    hid = f"hand-{side.value[0].lower()}-{k}"
                    wrist, joints = self._hand_state(mover, side, t)
                    rec.update_hand(hid, wrist, joints)
        if self.extra is not None:
            self.extra.step(dt)
        rec.update_pose(self.extra_id, self._extra_pose(t))
        if self.spec.scenario == "arena":
            rec.update_pose("crate-1", self._crate_pose(t))

    # -- event schedules --------------------------------------------------------

    def emit_events_before(self, rec: Recording, limit: float, inclusive: bool = False) -> None:
        def due(t: float) -> bool:
            return t <= limit if inclusive else t < limit

        while True:
            candidates: list[tuple[float, int]] = []
            for i, t in enumerate(self.next_input):
                if due(t):
                    candidates.append((t, i))
            if due(self.next_audio):
                candidates.append((self.next_audio, len(self.next_input)))
            if not candidates:
                return
            t_ev, idx = min(candidates)
            rec.tick(max(0.0, t_ev - rec.clock))
            if idx < len(self.next_input):
                self._emit_input(rec, idx)
            else:
                self._emit_audio(rec)

    def _emit_input(self, rec: Recording, player_idx: int) -> None:
        mover = self.players[player_idx]
        controls = [
            ("trigger", InputKind.TRIGGER, "fire", 1.0),
            ("button-a", InputKind.BUTTON, "jump", 1.0),
            ("stick-l", InputKind.JOYSTICK, "strafe", None),
            ("pinch", InputKind.GESTURE, "interact", 1.0),
        ]
        control, kind, action, value = controls[self.input_cycle % len(controls)]
        self.input_cycle += 1
        rng = self.input_rngs[player_idx]
        if value is None:
            value = float(rng.uniform(-1.0, 1.0))
        rec.emit_event(
            InputEvent(
                t=0.0,
                control=control,
                kind=kind,
                action=action,
                position=(mover.x, 0.0, mover.z),
                value=value,
            )
        )
        self.next_input[player_idx] = rec.clock + float(rng.uniform(*self._input_gap()))

    def _emit_audio(self, rec: Recording) -> None:
        scripts = {
            "arena": [("crowd_cheer", 2.0, None), ("enemy_growl", 1.5, "enemy-1")],
            "patrol": [("radio_chatter", 3.0, None), ("footsteps", 1.0, "npc-guard")],
            "fps-drill": [("gunshot", 0.3, "target-bot"), ("reload_click", 0.5, "target-bot")],
        }[self.spec.scenario]
        clip, length, src = scripts[self.audio_cycle % len(scripts)]
        self.audio_cycle += 1
        if src is None:
            src = self.landmark_id
            pos = (self.cx, 0.5, self.cz)
        else:
            p = self._extra_pose(rec.clock)
            pos = p.position
        rec.emit_event(
            AudioEvent(t=0.0, clip_name=clip, length=length, source_object_id=src, position=pos)
        )
        self.next_audio += self.audio_period


def synthesize_session(spec: ScenarioSpec) -> SessionLog:
    """Produce one deterministic session for the given spec."""
    session_id = f"{spec.scenario}-s{spec.seed}-p{spec.player_count}"
    rec = start_recording(
        RecordingConfig(
            session_id=session_id,
            game_name=_GAME_NAMES[spec.scenario],
            sample_hz=spec.sample_hz,
            started_at=_EPOCH,
        )
    )
    world = _World(spec)
    world.register(rec)
    rec.tick(0.0)  # consume the t=0 instant with initial poses

    hz = spec.sample_hz
    duration = float(spec.duration)
    period = 1.0 / hz
    k = 1
    while sampler_instant(k, hz) <= duration:
        t_k = sampler_instant(k, hz)
        world.emit_events_before(rec, t_k)
        world.step(rec, t_k, period)
        rec.tick(t_k - rec.clock)
        k += 1
    world.emit_events_before(rec, duration, inclusive=True)
    if duration > rec.clock:
        rec.tick(duration - rec.clock)
    return rec.finish()
