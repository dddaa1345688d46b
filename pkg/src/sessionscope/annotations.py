"""Spatially-anchored analyst notes.

Notes live in a sidecar file next to the session logs, never inside them:
recordings are immutable, notes are analysis artifacts layered on top.
Wire format, one JSON object per line:

    {"rec":"note","id":...,"p":[x,y,z],"t":...,"text":...,"created_at":...,"author"?}
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path

from .errors import LogParseError
from .geometry import Vec3

NOTES_SUFFIX = ".notes.jsonl"


@dataclass(frozen=True)
class Annotation:
    id: str
    position: Vec3
    t: float
    text: str
    created_at: str
    author: str | None = None

    def __post_init__(self) -> None:
        if not self.text.strip():
            raise ValueError("annotation text must be non-empty")
        if not all(math.isfinite(c) for c in self.position) or not math.isfinite(self.t):
            raise ValueError("annotation anchor must be finite")


def _now_ms() -> str:
    now = datetime.now(timezone.utc)
    return now.strftime("%Y-%m-%dT%H:%M:%S.") + f"{now.microsecond // 1000:03d}Z"


class AnnotationStore:
    """In-memory note collection with sidecar persistence."""

    def __init__(self) -> None:
        self._notes: list[Annotation] = []
        self._next_seq = 1

    def __len__(self) -> int:
        return len(self._notes)

    def all(self) -> tuple[Annotation, ...]:
        return tuple(self._notes)

    def add(
        self,
        position: Vec3,
        t: float,
        text: str,
        author: str | None = None,
        created_at: str | None = None,
    ) -> Annotation:
        note = Annotation(
            id=f"note-{self._next_seq:04d}",
            position=(float(position[0]), float(position[1]), float(position[2])),
            t=float(t),
            text=text,
            created_at=created_at or _now_ms(),
            author=author,
        )
        self._next_seq += 1
        self._notes.append(note)
        return note

    def query(
        self,
        time_window: tuple[float, float] | None = None,
        radius: tuple[Vec3, float] | None = None,
    ) -> tuple[Annotation, ...]:
        """Notes matching every given predicate, sorted by anchor time."""
        out = []
        for note in self._notes:
            if time_window is not None and not (time_window[0] <= note.t <= time_window[1]):
                continue
            if radius is not None:
                center, r = radius
                d = math.dist(note.position, center)
                if d > r:
                    continue
            out.append(note)
        out.sort(key=lambda n: (n.t, n.id))
        return tuple(out)

    # -- persistence -----------------------------------------------------------

    def save(self, path: Path | str) -> int:
        """Write one line per note; returns the note count."""
        path = Path(path)
        lines = []
        for n in self._notes:
            record = {
                "rec": "note",
                "id": n.id,
                "p": [float(c) for c in n.position],
                "t": n.t,
                "text": n.text,
                "created_at": n.created_at,
            }
            if n.author is not None:
                record["author"] = n.author
            lines.append(json.dumps(record, separators=(",", ":"), ensure_ascii=False))
        path.write_text("".join(line + "\n" for line in lines), encoding="utf-8")
        return len(lines)

    def load(self, path: Path | str) -> int:
        """Replace the store with the file's notes; returns the count."""
        notes: list[Annotation] = []
        max_seq = 0
        with Path(path).open("rb") as f:
            for line_no, raw in enumerate(f, start=1):
                raw = raw.rstrip(b"\n")
                if not raw:
                    continue
                try:
                    r = json.loads(raw.decode("utf-8"))
                except (UnicodeDecodeError, json.JSONDecodeError) as exc:
                    raise LogParseError(line_no, f"invalid JSON: {exc}") from None
                if not isinstance(r, dict) or r.get("rec") != "note":
                    raise LogParseError(line_no, "expected a note record")
                try:
                    note = Annotation(
                        id=str(r["id"]),
                        position=tuple(float(c) for c in r["p"]),
                        t=float(r["t"]),
                        text=str(r["text"]),
                        created_at=str(r["created_at"]),
                        author=str(r["author"]) if "author" in r else None,
                    )
                except (KeyError, TypeError, ValueError) as exc:
                    raise LogParseError(line_no, f"bad note field: {exc}") from None
                if len(note.position) != 3:
                    raise LogParseError(line_no, "note position must have 3 components")
                notes.append(note)
                if note.id.startswith("note-"):
                    try:
                        max_seq = max(max_seq, int(note.id[5:]))
                    except ValueError:
                        pass
        self._notes = notes
        self._next_seq = max_seq + 1
        return len(notes)
