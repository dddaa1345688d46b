"""Canonical on-disk session log format.

One session per file, extension ``.gamr.jsonl``: line-delimited JSON, one
record per line. Line 1 is the header, the last line is the end record,
and everything between is objects, camera params, statics, then the
time-ordered body. Field order per record kind is fixed on write so equal
sessions serialize to byte-identical files; readers accept fields in any
order and ignore unknown ones.

Record kinds and write-side field order:

    header  {rec,version,session_id,game,started_at,sample_hz,units}
    object  {rec,id,name,category,dynamic,side?,joints?}
    camera_params {rec,id,vfov_rad,aspect,near_m,far_m}
    static  {rec,id,name,p,q,extent?}
    sample  {rec,t,id,p,q}
    hand    {rec,t,id,side,wrist_p,wrist_q,joints}
    input   {rec,t,control,kind,action,p,value}
    audio   {rec,t,clip,len_s,src_id,p}
    end     {rec,t}

Positions ``p`` are [x,y,z] meters; quaternions ``q`` are [x,y,z,w].
Body records are interleaved by timestamp, ties broken by record kind
(sample < hand < input < audio) and then object id; events with equal
timestamps keep their submission order.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import BinaryIO, Iterable

from .errors import (
    LogParseError,
    LogStructureError,
    UnknownIdError,
    ValidationFailedError,
)
from .model import (
    AudioEvent,
    CameraParams,
    Category,
    HandFrame,
    HandSide,
    InputEvent,
    InputKind,
    ObjectDescriptor,
    Pose,
    PoseSample,
    SessionLog,
    StaticObject,
)

LOG_EXTENSION = ".gamr.jsonl"
FORMAT_VERSION = 1
LENGTH_UNITS = "m"

QUAT_NORM_TOL = 1e-6


# ---------------------------------------------------------------------------
# Serialization


def _num(v: float) -> float:
    # Collapse -0.0 so equal values always serialize identically.
    v = float(v)
    return 0.0 if v == 0.0 else v


def _vec(v) -> list[float]:
    return [_num(c) for c in v]


def _dump(record: dict) -> bytes:
    return json.dumps(record, separators=(",", ":"), ensure_ascii=False).encode("utf-8") + b"\n"


def _render_sample(s: PoseSample) -> bytes:
    return _dump(
        {
            "rec": "sample",
            "t": _num(s.t),
            "id": s.object_id,
            "p": _vec(s.pose.position),
            "q": _vec(s.pose.orientation),
        }
    )


def _render_hand(h: HandFrame) -> bytes:
    return _dump(
        {
            "rec": "hand",
            "t": _num(h.t),
            "id": h.object_id,
            "side": h.side.value,
            "wrist_p": _vec(h.wrist.position),
            "wrist_q": _vec(h.wrist.orientation),
            "joints": [_vec(j) for j in h.joints],
        }
    )


def _render_input(ev: InputEvent) -> bytes:
    return _dump(
        {
            "rec": "input",
            "t": _num(ev.t),
            "control": ev.control,
            "kind": ev.kind.value,
            "action": ev.action,
            "p": _vec(ev.position),
            "value": _num(ev.value),
        }
    )


def _render_audio(ev: AudioEvent) -> bytes:
    return _dump(
        {
            "rec": "audio",
            "t": _num(ev.t),
            "clip": ev.clip_name,
            "len_s": _num(ev.length),
            "src_id": ev.source_object_id,
            "p": _vec(ev.position),
        }
    )


def iter_session_lines(log: SessionLog) -> Iterable[bytes]:
    """Yield the canonical serialized lines for one session."""
    yield _dump(
        {
            "rec": "header",
            "version": FORMAT_VERSION,
            "session_id": log.session_id,
            "game": log.game_name,
            "started_at": log.started_at,
            "sample_hz": _num(log.sample_hz),
            "units": LENGTH_UNITS,
        }
    )
    for d in log.objects:
        record = {
            "rec": "object",
            "id": d.id,
            "name": d.display_name,
            "category": d.category.value,
            "dynamic": d.dynamic,
        }
        if d.hand_side is not None:
            record["side"] = d.hand_side.value
        if d.joint_count is not None:
            record["joints"] = int(d.joint_count)
        yield _dump(record)
    for cam_id in sorted(log.camera_params):
        p = log.camera_params[cam_id]
        yield _dump(
            {
                "rec": "camera_params",
                "id": cam_id,
                "vfov_rad": _num(p.vfov),
                "aspect": _num(p.aspect),
                "near_m": _num(p.near),
                "far_m": _num(p.far),
            }
        )
    for st in log.statics:
        record = {
            "rec": "static",
            "id": st.id,
            "name": st.display_name,
            "p": _vec(st.pose.position),
            "q": _vec(st.pose.orientation),
        }
        if st.extent is not None:
            record["extent"] = _vec(st.extent)
        yield _dump(record)

    body: list[tuple[float, int, str, bytes]] = []
    for oid in sorted(log.samples):
        for s in log.samples[oid]:
            body.append((s.t, 0, oid, _render_sample(s)))
    for oid in sorted(log.hands):
        for h in log.hands[oid]:
            body.append((h.t, 1, oid, _render_hand(h)))
    for ev in log.inputs:
        body.append((ev.t, 2, "", _render_input(ev)))
    for ev in log.audio:
        body.append((ev.t, 3, "", _render_audio(ev)))
    body.sort(key=lambda e: (e[0], e[1], e[2]))  # stable: same-t events keep order
    for _, _, _, line in body:
        yield line

    yield _dump({"rec": "end", "t": _num(log.duration)})


def write_session(log: SessionLog, destination: BinaryIO) -> int:
    """Serialize a validated session to a byte sink. Returns bytes written."""
    violations = validate_session(log)
    if violations:
        raise ValidationFailedError(violations)
    total = 0
    for line in iter_session_lines(log):
        destination.write(line)
        total += len(line)
    return total


def session_to_bytes(log: SessionLog) -> bytes:
    import io

    buf = io.BytesIO()
    write_session(log, buf)
    return buf.getvalue()


def write_session_file(log: SessionLog, path: Path | str) -> int:
    path = Path(path)
    with path.open("wb") as f:
        return write_session(log, f)


# ---------------------------------------------------------------------------
# Parsing


@dataclass
class ParseReport:
    """Counts of tolerated irregularities met while reading a log."""

    unknown_fields: int = 0


_KNOWN_FIELDS = {
    "header": {"rec", "version", "session_id", "game", "started_at", "sample_hz", "units"},
    "object": {"rec", "id", "name", "category", "dynamic", "side", "joints"},
    "camera_params": {"rec", "id", "vfov_rad", "aspect", "near_m", "far_m"},
    "static": {"rec", "id", "name", "p", "q", "extent"},
    "sample": {"rec", "t", "id", "p", "q"},
    "hand": {"rec", "t", "id", "side", "wrist_p", "wrist_q", "joints"},
    "input": {"rec", "t", "control", "kind", "action", "p", "value"},
    "audio": {"rec", "t", "clip", "len_s", "src_id", "p"},
    "end": {"rec", "t"},
}


def _field(record: dict, key: str, line: int):
    try:
        return record[key]
    except KeyError:
        raise LogParseError(line, f"missing field '{key}'") from None


def _as_str(record: dict, key: str, line: int) -> str:
    v = _field(record, key, line)
    if not isinstance(v, str):
        raise LogParseError(line, f"field '{key}' must be a string")
    return v


def _as_float(record: dict, key: str, line: int) -> float:
    v = _field(record, key, line)
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise LogParseError(line, f"field '{key}' must be a number")
    return float(v)


def _as_bool(record: dict, key: str, line: int) -> bool:
    v = _field(record, key, line)
    if not isinstance(v, bool):
        raise LogParseError(line, f"field '{key}' must be a boolean")
    return v


def _as_vec(record: dict, key: str, line: int, length: int) -> tuple[float, ...]:
    v = _field(record, key, line)
    return _coerce_vec(v, key, line, length)


def _coerce_vec(v, key: str, line: int, length: int) -> tuple[float, ...]:
    if (
        not isinstance(v, list)
        or len(v) != length
        or any(isinstance(c, bool) or not isinstance(c, (int, float)) for c in v)
    ):
        raise LogParseError(line, f"field '{key}' must be a list of {length} numbers")
    return tuple(float(c) for c in v)


def _enum_value(enum_cls, raw: str, key: str, line: int):
    try:
        return enum_cls(raw)
    except ValueError:
        raise LogParseError(line, f"field '{key}' has unknown value {raw!r}") from None


class _Reader:
    def __init__(self):
        self.report = ParseReport()
        self.header: dict | None = None
        self.end_t: float | None = None
        self.objects: list[ObjectDescriptor] = []
        self.camera_params: dict[str, CameraParams] = {}
        self.statics: list[StaticObject] = []
        self.samples: dict[str, list[tuple[float, PoseSample]]] = {}
        self.hands: dict[str, list[tuple[float, HandFrame]]] = {}
        self.inputs: list[InputEvent] = []
        self.audio: list[AudioEvent] = []
        self._ref_lines: dict[str, int] = {}

    def feed(self, record: dict, line: int) -> None:
        kind = record.get("rec")
        if kind is None:
            raise LogParseError(line, "record has no 'rec' tag")
        if not isinstance(kind, str) or kind not in _KNOWN_FIELDS:
            raise LogParseError(line, f"unknown record kind {kind!r}")
        if self.end_t is not None:
            raise LogStructureError(f"line {line}: record after the end record")
        if kind == "header":
            if line != 1 or self.header is not None:
                raise LogStructureError(f"line {line}: duplicate header record")
        elif self.header is None:
            raise LogStructureError("line 1: file must start with a header record")
        self.report.unknown_fields += len(set(record) - _KNOWN_FIELDS[kind])
        getattr(self, f"_on_{kind}")(record, line)

    # -- record handlers -------------------------------------------------

    def _on_header(self, r: dict, line: int) -> None:
        version = _field(r, "version", line)
        if version != FORMAT_VERSION:
            raise LogParseError(line, f"unsupported format version {version!r}")
        self.header = {
            "session_id": _as_str(r, "session_id", line),
            "game": _as_str(r, "game", line),
            "started_at": _as_str(r, "started_at", line),
            "sample_hz": _as_float(r, "sample_hz", line),
        }

    def _on_object(self, r: dict, line: int) -> None:
        side = _enum_value(HandSide, _as_str(r, "side", line), "side", line) if "side" in r else None
        joints = None
        if "joints" in r:
            v = _field(r, "joints", line)
            if isinstance(v, bool) or not isinstance(v, int):
                raise LogParseError(line, "field 'joints' must be an integer")
            joints = v
        self.objects.append(
            ObjectDescriptor(
                id=_as_str(r, "id", line),
                display_name=_as_str(r, "name", line),
                category=_enum_value(Category, _as_str(r, "category", line), "category", line),
                dynamic=_as_bool(r, "dynamic", line),
                hand_side=side,
                joint_count=joints,
            )
        )

    def _on_camera_params(self, r: dict, line: int) -> None:
        try:
            params = CameraParams(
                vfov=_as_float(r, "vfov_rad", line),
                aspect=_as_float(r, "aspect", line),
                near=_as_float(r, "near_m", line),
                far=_as_float(r, "far_m", line),
            )
        except ValueError as exc:
            raise LogParseError(line, str(exc)) from None
        self.camera_params[_as_str(r, "id", line)] = params

    def _pose(self, r: dict, line: int, p_key: str = "p", q_key: str = "q") -> Pose:
        try:
            return Pose(_as_vec(r, p_key, line, 3), _as_vec(r, q_key, line, 4))
        except ValueError as exc:
            raise LogParseError(line, str(exc)) from None

    def _on_static(self, r: dict, line: int) -> None:
        extent = _as_vec(r, "extent", line, 3) if "extent" in r else None
        self.statics.append(
            StaticObject(
                id=_as_str(r, "id", line),
                display_name=_as_str(r, "name", line),
                pose=self._pose(r, line),
                extent=extent,
            )
        )

    def _on_sample(self, r: dict, line: int) -> None:
        oid = _as_str(r, "id", line)
        sample = PoseSample(t=_as_float(r, "t", line), object_id=oid, pose=self._pose(r, line))
        self.samples.setdefault(oid, []).append((sample.t, sample))
        self._ref_lines.setdefault(oid, line)

    def _on_hand(self, r: dict, line: int) -> None:
        oid = _as_str(r, "id", line)
        joints_raw = _field(r, "joints", line)
        if not isinstance(joints_raw, list):
            raise LogParseError(line, "field 'joints' must be a list")
        joints = tuple(_coerce_vec(j, "joints", line, 3) for j in joints_raw)
        frame = HandFrame(
            t=_as_float(r, "t", line),
            object_id=oid,
            side=_enum_value(HandSide, _as_str(r, "side", line), "side", line),
            wrist=self._pose(r, line, "wrist_p", "wrist_q"),
            joints=joints,
        )
        self.hands.setdefault(oid, []).append((frame.t, frame))
        self._ref_lines.setdefault(oid, line)

    def _on_input(self, r: dict, line: int) -> None:
        try:
            ev = InputEvent(
                t=_as_float(r, "t", line),
                control=_as_str(r, "control", line),
                kind=_enum_value(InputKind, _as_str(r, "kind", line), "kind", line),
                action=_as_str(r, "action", line),
                position=_as_vec(r, "p", line, 3),
                value=_as_float(r, "value", line),
            )
        except ValueError as exc:
            raise LogParseError(line, str(exc)) from None
        self.inputs.append(ev)

    def _on_audio(self, r: dict, line: int) -> None:
        try:
            ev = AudioEvent(
                t=_as_float(r, "t", line),
                clip_name=_as_str(r, "clip", line),
                length=_as_float(r, "len_s", line),
                source_object_id=_as_str(r, "src_id", line),
                position=_as_vec(r, "p", line, 3),
            )
        except ValueError as exc:
            raise LogParseError(line, str(exc)) from None
        self.audio.append(ev)
        self._ref_lines.setdefault(ev.source_object_id, line)

    def _on_end(self, r: dict, line: int) -> None:
        self.end_t = _as_float(r, "t", line)

    # -- assembly ---------------------------------------------------------

    def finish(self) -> SessionLog:
        if self.header is None:
            raise LogStructureError("no header record found")
        if self.end_t is None:
            raise LogStructureError("no end record found")
        registered = {d.id for d in self.objects}
        static_ids = {s.id for s in self.statics}
        for oid in list(self.samples) + list(self.hands):
            if oid not in registered:
                raise UnknownIdError(
                    f"line {self._ref_lines.get(oid, 0)}: "
                    f"record references unregistered object id {oid!r}"
                )
        for ev in self.audio:
            if ev.source_object_id not in registered | static_ids:
                raise UnknownIdError(
                    f"line {self._ref_lines.get(ev.source_object_id, 0)}: "
                    f"audio references unknown source id {ev.source_object_id!r}"
                )
        samples = {
            oid: tuple(s for _, s in sorted(pairs, key=lambda p: p[0]))
            for oid, pairs in self.samples.items()
        }
        hands = {
            oid: tuple(h for _, h in sorted(pairs, key=lambda p: p[0]))
            for oid, pairs in self.hands.items()
        }
        return SessionLog(
            session_id=self.header["session_id"],
            game_name=self.header["game"],
            started_at=self.header["started_at"],
            sample_hz=self.header["sample_hz"],
            objects=tuple(self.objects),
            camera_params=self.camera_params,
            statics=tuple(self.statics),
            samples=samples,
            hands=hands,
            inputs=tuple(sorted(self.inputs, key=lambda e: e.t)),
            audio=tuple(sorted(self.audio, key=lambda e: e.t)),
            duration=self.end_t,
        )


def _iter_lines(source: bytes | BinaryIO) -> Iterable[bytes]:
    if isinstance(source, (bytes, bytearray)):
        lines = bytes(source).split(b"\n")
        if lines and lines[-1] == b"":
            lines.pop()
        yield from lines
    else:
        for raw in source:
            yield raw.rstrip(b"\n")


def parse_session_with_report(source: bytes | BinaryIO) -> tuple[SessionLog, ParseReport]:
    """Parse a serialized session, returning the log and a tolerance report."""
    reader = _Reader()
    line_no = 0
    for raw in _iter_lines(source):
        line_no += 1
        try:
            record = json.loads(raw.decode("utf-8"))
        except (UnicodeDecodeError, json.JSONDecodeError) as exc:
            raise LogParseError(line_no, f"invalid JSON: {exc}") from None
        if not isinstance(record, dict):
            raise LogParseError(line_no, "record must be a JSON object")
        reader.feed(record, line_no)
    if line_no == 0:
        raise LogStructureError("empty file: no header record found")
    return reader.finish(), reader.report


def parse_session(source: bytes | BinaryIO) -> SessionLog:
    log, _ = parse_session_with_report(source)
    return log


def parse_session_file(path: Path | str) -> SessionLog:
    with Path(path).open("rb") as f:
        return parse_session(f)


# ---------------------------------------------------------------------------
# Validation


@dataclass(frozen=True)
class Violation:
    code: str
    message: str
    object_id: str | None = None

    def __str__(self) -> str:
        return f"[{self.code}] {self.message}"


def _check_quat(out: list[Violation], q, where: str, object_id: str | None) -> None:
    n = math.sqrt(q[0] ** 2 + q[1] ** 2 + q[2] ** 2 + q[3] ** 2)
    if abs(n - 1.0) > QUAT_NORM_TOL:
        out.append(
            Violation("non-unit-quaternion", f"{where}: quaternion norm {n:.9f}", object_id)
        )


def validate_session(log: SessionLog) -> list[Violation]:
    """Check cross-record invariants; an empty list means the log is valid."""
    out: list[Violation] = []
    seen_ids: set[str] = set()
    for d in list(log.objects) + list(log.statics):
        if not d.id:
            out.append(Violation("empty-id", "object with empty id"))
        elif d.id in seen_ids:
            out.append(Violation("duplicate-id", f"id {d.id!r} registered twice", d.id))
        seen_ids.add(d.id)

    descriptors = {d.id: d for d in log.objects}
    static_ids = {s.id for s in log.statics}

    for d in log.objects:
        if d.category is Category.HAND and (d.hand_side is None or not d.joint_count):
            out.append(
                Violation("hand-descriptor", f"hand {d.id!r} lacks side or joint count", d.id)
            )
        if d.category is Category.CAMERA and d.id not in log.camera_params:
            out.append(
                Violation("missing-camera-params", f"camera {d.id!r} has no params", d.id)
            )

    for oid, stream in log.samples.items():
        if oid not in descriptors:
            out.append(Violation("dangling-id", f"samples for unregistered id {oid!r}", oid))
        prev = None
        for s in stream:
            if s.t < 0:
                out.append(Violation("negative-time", f"sample at t={s.t} for {oid!r}", oid))
            if prev is not None and s.t <= prev:
                out.append(
                    Violation(
                        "monotonicity",
                        f"object {oid!r}: timestamps not strictly increasing at t={s.t}",
                        oid,
                    )
                )
                break
            prev = s.t
        for s in stream:
            _check_quat(out, s.pose.orientation, f"sample t={s.t}", oid)

    for oid, stream in log.hands.items():
        if oid not in descriptors:
            out.append(Violation("dangling-id", f"hand frames for unregistered id {oid!r}", oid))
        expected = descriptors[oid].joint_count if oid in descriptors else None
        prev = None
        for h in stream:
            if prev is not None and h.t <= prev:
                out.append(
                    Violation(
                        "monotonicity",
                        f"hand {oid!r}: timestamps not strictly increasing at t={h.t}",
                        oid,
                    )
                )
                break
            prev = h.t
        for h in stream:
            if expected is not None and len(h.joints) != expected:
                out.append(
                    Violation(
                        "joint-count",
                        f"hand {oid!r} frame t={h.t} has {len(h.joints)} joints, "
                        f"descriptor declares {expected}",
                        oid,
                    )
                )
                break
        for h in stream:
            _check_quat(out, h.wrist.orientation, f"hand frame t={h.t}", oid)

    for st in log.statics:
        _check_quat(out, st.pose.orientation, f"static {st.id!r}", st.id)

    for ev in log.audio:
        if ev.source_object_id not in descriptors and ev.source_object_id not in static_ids:
            out.append(
                Violation(
                    "dangling-id",
                    f"audio event at t={ev.t} references unknown id {ev.source_object_id!r}",
                    ev.source_object_id,
                )
            )
        if ev.t < 0:
            out.append(Violation("negative-time", f"audio event at t={ev.t}"))
    for ev in log.inputs:
        if ev.t < 0:
            out.append(Violation("negative-time", f"input event at t={ev.t}"))

    max_t = log.max_timestamp()
    if log.duration < max_t:
        out.append(
            Violation(
                "duration-bound",
                f"duration {log.duration} is below the last timestamp {max_t}",
            )
        )
    return out


# ---------------------------------------------------------------------------
# Discovery


@dataclass(frozen=True)
class HeaderInfo:
    session_id: str
    game_name: str
    started_at: str
    sample_hz: float


@dataclass(frozen=True)
class DiscoveredLog:
    path: Path
    header: HeaderInfo | None
    error: str | None = None


def read_header(path: Path | str) -> HeaderInfo:
    """Read and parse only the first line of a log file."""
    with Path(path).open("rb") as f:
        first = f.readline()
    try:
        record = json.loads(first.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise LogParseError(1, f"invalid JSON: {exc}") from None
    if not isinstance(record, dict) or record.get("rec") != "header":
        raise LogStructureError("first line is not a header record")
    reader = _Reader()
    reader.feed(record, 1)
    assert reader.header is not None
    return HeaderInfo(
        session_id=reader.header["session_id"],
        game_name=reader.header["game"],
        started_at=reader.header["started_at"],
        sample_hz=reader.header["sample_hz"],
    )


def discover_logs(directory: Path | str) -> list[DiscoveredLog]:
    """List session logs in a directory, loading headers only.

    Files that fail header parsing are listed with an error marker rather
    than dropped, so the UI can surface them.
    """
    directory = Path(directory)
    entries = sorted(
        (p for p in directory.iterdir() if p.is_file() and p.name.endswith(LOG_EXTENSION)),
        key=lambda p: p.name,
    )
    out: list[DiscoveredLog] = []
    for path in entries:
        try:
            out.append(DiscoveredLog(path=path, header=read_header(path)))
        except (LogParseError, LogStructureError, OSError) as exc:
            out.append(DiscoveredLog(path=path, header=None, error=str(exc)))
    return out
