"""HTTP service exposing sessions, replay, analytics, and annotations.

The server owns the transport clock: replay time advances by elapsed
wall time times rate while Playing, so auto-pause and usage metrics are
authoritative no matter how often clients poll. All state mutations
funnel through one lock; handlers are atomic.
"""

from __future__ import annotations

import io
import json
import threading
import time
from contextlib import asynccontextmanager
from pathlib import Path
from typing import Callable

from fastapi import FastAPI, HTTPException, Request, Response
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles

from . import heatmap as hm
from .analytics import (
    DEFAULT_PROBE_HEIGHT,
    MetricKind,
    MetricsRecorder,
    compute_coverage,
    coverage_report,
    merge_coverage,
)
from .annotations import AnnotationStore
from .errors import (
    CapacityError,
    EmptyDataError,
    LogParseError,
    LogStructureError,
    UnknownIdError,
)
from .logstore import LOG_EXTENSION, discover_logs, parse_session_file
from .model import Category
from .replay import (
    DEFAULT_LOAD_LIMIT,
    FILTER_GROUPS,
    FilterSet,
    ReplayEngine,
    ReplayFrame,
    TransportState,
    load_sessions,
)

NOTES_FILENAME = "annotations.notes.jsonl"
METRICS_FILENAME = "metrics.json"

_CATEGORY_BY_NAME = {c.value: c for c in Category}


class ServerContext:
    """All mutable service state behind one lock."""

    def __init__(
        self,
        directory: Path,
        limit: int = DEFAULT_LOAD_LIMIT,
        clock: Callable[[], float] = time.monotonic,
    ):
        self.directory = directory
        self.limit = limit
        self.clock = clock
        self.lock = threading.RLock()
        self.engine: ReplayEngine | None = None
        self.loaded_paths: list[str] = []
        self.metrics = MetricsRecorder()
        self.store = AnnotationStore()
        self.last_tick = clock()
        notes = directory / NOTES_FILENAME
        if notes.is_file():
            self.store.load(notes)

    def tick(self) -> None:
        """Advance replay time by wall time elapsed since the last tick."""
        now = self.clock()
        dt = max(0.0, now - self.last_tick)
        self.last_tick = now
        if self.engine is not None:
            self.engine.advance_clock(dt)

    def require_engine(self) -> ReplayEngine:
        if self.engine is None:
            raise HTTPException(status_code=409, detail="no sessions loaded")
        return self.engine

    def save_notes(self) -> None:
        self.store.save(self.directory / NOTES_FILENAME)

    def save_metrics(self) -> Path:
        path = self.directory / METRICS_FILENAME
        path.write_text(self.metrics.to_json() + "\n", encoding="utf-8")
        return path


# ---------------------------------------------------------------------------
# JSON shapes


def transport_json(state: TransportState, duration_max: float) -> dict:
    return {
        "mode": state.mode.value,
        "direction": state.direction.value,
        "rate": state.rate,
        "t": state.t,
        "duration_max": duration_max,
    }


def frame_json(frame: ReplayFrame, duration_max: float) -> dict:
    objects = []
    for o in frame.objects:
        entry: dict = {
            "session": o.session_index,
            "id": o.object_id,
            "name": o.display_name,
            "category": o.category.value,
            "color": list(o.color),
            "p": list(o.pose.position),
            "q": list(o.pose.orientation),
        }
        if o.joints is not None:
            entry["joints"] = [list(j) for j in o.joints]
        if o.hand_side is not None:
            entry["side"] = o.hand_side
        if o.camera_params is not None:
            entry["camera"] = {
                "vfov": o.camera_params.vfov,
                "aspect": o.camera_params.aspect,
                "near": o.camera_params.near,
                "far": o.camera_params.far,
            }
        objects.append(entry)
    statics = []
    for sm in frame.statics:
        entry = {
            "session": sm.session_index,
            "id": sm.static.id,
            "name": sm.static.display_name,
            "color": list(sm.color),
            "p": list(sm.static.pose.position),
            "q": list(sm.static.pose.orientation),
        }
        if sm.static.extent is not None:
            entry["extent"] = list(sm.static.extent)
        statics.append(entry)
    return {
        "t": frame.t,
        "transport": transport_json(frame.transport, duration_max),
        "objects": objects,
        "statics": statics,
        "trails": [trail_json(tr) for tr in frame.trails],
        "events": [
            {
                "session": ev.session_index,
                "kind": ev.kind,
                "t": ev.t,
                "label": ev.label,
                "detail": ev.detail,
                "p": list(ev.position),
            }
            for ev in frame.events
        ],
    }


def trail_json(tr) -> dict:
    return {
        "session": tr.session_index,
        "id": tr.object_id,
        "color": list(tr.color),
        "points": [[t, p[0], p[1], p[2]] for t, p in tr.points],
    }


def filters_json(filters: FilterSet) -> dict:
    return {
        "categories": sorted(filters.categories),
        "objects": dict(filters.objects),
        "sessions": list(filters.sessions) if filters.sessions is not None else None,
    }


def annotation_json(note) -> dict:
    out = {
        "id": note.id,
        "p": list(note.position),
        "t": note.t,
        "text": note.text,
        "created_at": note.created_at,
    }
    if note.author is not None:
        out["author"] = note.author
    return out


def heatmap_json(grid: hm.DensityGrid) -> dict:
    payload = hm.sidecar_payload(grid)
    payload["max_count"] = grid.max_count
    return payload


# ---------------------------------------------------------------------------
# Request helpers


async def _body_json(request: Request) -> dict:
    try:
        data = await request.json()
    except Exception:
        raise HTTPException(status_code=400, detail="body must be valid JSON") from None
    if not isinstance(data, dict):
        raise HTTPException(status_code=400, detail="body must be a JSON object")
    return data


def _parse_categories(raw: str | None) -> tuple[Category, ...]:
    if not raw:
        return (Category.PLAYER,)
    out = []
    for name in raw.split(","):
        name = name.strip()
        cat = _CATEGORY_BY_NAME.get(name) or _CATEGORY_BY_NAME.get(name.title())
        if cat is None:
            raise HTTPException(status_code=400, detail=f"unknown category {name!r}")
        out.append(cat)
    return tuple(out)


def _parse_float(raw: str | None, default: float, name: str) -> float:
    if raw is None:
        return default
    try:
        v = float(raw)
    except ValueError:
        raise HTTPException(status_code=400, detail=f"{name} must be a number") from None
    if not v > 0:
        raise HTTPException(status_code=400, detail=f"{name} must be positive")
    return v


# ---------------------------------------------------------------------------
# App factory


def create_app(
    directory: Path | str,
    limit: int = DEFAULT_LOAD_LIMIT,
    clock: Callable[[], float] = time.monotonic,
    ui_dir: Path | str | None = None,
) -> FastAPI:
    directory = Path(directory)
    if not directory.is_dir():
        raise NotADirectoryError(f"log directory {directory} does not exist")
    ctx = ServerContext(directory, limit=limit, clock=clock)

    @asynccontextmanager
    async def lifespan(_: FastAPI):
        yield
        with ctx.lock:
            ctx.save_metrics()

    app = FastAPI(title="sessionscope", lifespan=lifespan)
    app.state.ctx = ctx

    @app.get("/api/sessions")
    def list_sessions() -> dict:
        with ctx.lock:
            entries = []
            for d in discover_logs(ctx.directory):
                if d.header is not None:
                    entries.append(
                        {
                            "path": d.path.name,
                            "session_id": d.header.session_id,
                            "game": d.header.game_name,
                            "started_at": d.header.started_at,
                            "sample_hz": d.header.sample_hz,
                        }
                    )
                else:
                    entries.append({"path": d.path.name, "error": d.error})
            return {"sessions": entries, "loaded": ctx.loaded_paths}

    @app.post("/api/load")
    async def load(request: Request) -> dict:
        data = await _body_json(request)
        paths = data.get("paths")
        if not isinstance(paths, list) or not paths or not all(isinstance(p, str) for p in paths):
            raise HTTPException(status_code=400, detail="'paths' must be a non-empty list of strings")
        with ctx.lock:
            if len(paths) > ctx.limit:
                raise HTTPException(
                    status_code=409,
                    detail=f"cannot load {len(paths)} sessions: limit is {ctx.limit}",
                )
            logs = []
            for name in paths:
                full = ctx.directory / name
                if not full.is_file() or not name.endswith(LOG_EXTENSION):
                    raise HTTPException(status_code=404, detail=f"unknown session {name!r}")
                try:
                    logs.append(parse_session_file(full))
                except (LogParseError, LogStructureError, UnknownIdError) as exc:
                    raise HTTPException(status_code=400, detail=f"{name}: {exc}") from None
            try:
                loaded = load_sessions(logs, limit=ctx.limit)
            except CapacityError as exc:
                raise HTTPException(status_code=409, detail=str(exc)) from None
            ctx.metrics.reset()
            ctx.engine = ReplayEngine(loaded, metrics=ctx.metrics, annotations=ctx.store)
            ctx.loaded_paths = list(paths)
            ctx.last_tick = ctx.clock()
            return {
                "sessions": [
                    {
                        "path": paths[i],
                        "session_id": loaded.sessions[i].session_id,
                        "color": list(loaded.colors[i]),
                        "duration": loaded.sessions[i].duration,
                    }
                    for i in range(len(logs))
                ],
                "duration_max": loaded.duration_max,
            }

    @app.post("/api/transport")
    async def transport(request: Request) -> dict:
        data = await _body_json(request)
        cmd = data.get("cmd")
        if not isinstance(cmd, str):
            raise HTTPException(status_code=400, detail="'cmd' must be a string")
        with ctx.lock:
            engine = ctx.require_engine()
            ctx.tick()
            try:
                state = engine.apply_transport(cmd, data.get("t"))
            except ValueError as exc:
                raise HTTPException(status_code=400, detail=str(exc)) from None
            return transport_json(state, engine.loaded.duration_max)

    @app.get("/api/frame")
    def frame() -> dict:
        with ctx.lock:
            engine = ctx.require_engine()
            ctx.tick()
            return frame_json(engine.resolve_frame(), engine.loaded.duration_max)

    @app.get("/api/trails")
    def trails(t: float | None = None) -> dict:
        with ctx.lock:
            engine = ctx.require_engine()
            ctx.tick()
            frame = engine.resolve_frame(t=t)
            return {"t": frame.t, "trails": [trail_json(tr) for tr in frame.trails]}

    @app.get("/api/heatmap")
    def heatmap_grid(cell: str | None = None, categories: str | None = None, toggle: bool = False) -> dict:
        cell_size = _parse_float(cell, hm.DEFAULT_CELL_SIZE, "cell")
        cats = _parse_categories(categories)
        with ctx.lock:
            engine = ctx.require_engine()
            try:
                grid = hm.accumulate_density(
                    engine.loaded, engine.filters, cell_size=cell_size, categories=cats
                )
            except EmptyDataError as exc:
                raise HTTPException(status_code=404, detail=str(exc)) from None
            if toggle:
                ctx.metrics.record(MetricKind.HEATMAP_TOGGLE)
            return heatmap_json(grid)

    @app.get("/api/heatmap.png")
    def heatmap_png(cell: str | None = None, categories: str | None = None, toggle: bool = False) -> Response:
        cell_size = _parse_float(cell, hm.DEFAULT_CELL_SIZE, "cell")
        cats = _parse_categories(categories)
        with ctx.lock:
            engine = ctx.require_engine()
            try:
                grid = hm.accumulate_density(
                    engine.loaded, engine.filters, cell_size=cell_size, categories=cats
                )
            except EmptyDataError as exc:
                raise HTTPException(status_code=404, detail=str(exc)) from None
            if toggle:
                ctx.metrics.record(MetricKind.HEATMAP_TOGGLE)
            img = hm.colorize(grid)
            buf = io.BytesIO()
            img.save(buf, format="PNG")
            return Response(
                content=buf.getvalue(),
                media_type="image/png",
                headers={
                    "X-Grid-Origin-X": repr(grid.spec.origin[0]),
                    "X-Grid-Origin-Z": repr(grid.spec.origin[1]),
                    "X-Grid-Cell-Size": repr(grid.spec.cell_size),
                    "X-Grid-Cols": str(grid.spec.cols),
                    "X-Grid-Rows": str(grid.spec.rows),
                },
            )

    @app.get("/api/filters")
    def get_filters() -> dict:
        with ctx.lock:
            engine = ctx.require_engine()
            return filters_json(engine.filters)

    @app.post("/api/filters")
    async def set_filters(request: Request) -> dict:
        data = await _body_json(request)
        with ctx.lock:
            engine = ctx.require_engine()
            current = engine.filters
            categories = current.categories
            if "categories" in data:
                raw = data["categories"]
                if not isinstance(raw, list) or not all(isinstance(c, str) for c in raw):
                    raise HTTPException(status_code=400, detail="'categories' must be a list of strings")
                unknown = set(raw) - set(FILTER_GROUPS)
                if unknown:
                    raise HTTPException(status_code=400, detail=f"unknown filter groups {sorted(unknown)}")
                categories = frozenset(raw)
            objects = dict(current.objects)
            if "objects" in data:
                raw = data["objects"]
                if not isinstance(raw, dict) or not all(isinstance(v, bool) for v in raw.values()):
                    raise HTTPException(status_code=400, detail="'objects' must map ids to booleans")
                objects = dict(raw)
            sessions = current.sessions
            if "sessions" in data:
                raw = data["sessions"]
                if raw is not None and (
                    not isinstance(raw, list) or not all(isinstance(v, bool) for v in raw)
                ):
                    raise HTTPException(status_code=400, detail="'sessions' must be a list of booleans")
                sessions = tuple(raw) if raw is not None else None
            try:
                engine.set_filters(FilterSet(categories=categories, objects=objects, sessions=sessions))
            except (UnknownIdError, ValueError) as exc:
                raise HTTPException(status_code=400, detail=str(exc)) from None
            return filters_json(engine.filters)

    @app.get("/api/annotations")
    def get_annotations() -> dict:
        with ctx.lock:
            return {"annotations": [annotation_json(n) for n in ctx.store.query()]}

    @app.post("/api/annotations")
    async def post_annotation(request: Request) -> JSONResponse:
        data = await _body_json(request)
        p = data.get("p")
        text = data.get("text")
        if (
            not isinstance(p, list)
            or len(p) != 3
            or not all(isinstance(c, (int, float)) and not isinstance(c, bool) for c in p)
        ):
            raise HTTPException(status_code=400, detail="'p' must be [x, y, z]")
        if not isinstance(text, str) or not text:
            raise HTTPException(status_code=400, detail="'text' must be a non-empty string")
        author = data.get("author")
        if author is not None and not isinstance(author, str):
            raise HTTPException(status_code=400, detail="'author' must be a string")
        with ctx.lock:
            engine = ctx.require_engine()
            ctx.tick()
            t = data.get("t")
            if t is not None and (isinstance(t, bool) or not isinstance(t, (int, float))):
                raise HTTPException(status_code=400, detail="'t' must be a number")
            note = engine.add_annotation((p[0], p[1], p[2]), text, t=t, author=author)
            ctx.save_notes()
            return JSONResponse(status_code=201, content=annotation_json(note))

    @app.get("/api/coverage")
    def coverage(cell: str | None = None, height: str | None = None) -> dict:
        cell_size = _parse_float(cell, hm.DEFAULT_CELL_SIZE, "cell")
        probe = _parse_float(height, DEFAULT_PROBE_HEIGHT, "height")
        with ctx.lock:
            engine = ctx.require_engine()
            positions = []
            cam_runs = []
            for si, log in enumerate(engine.loaded.sessions):
                if not engine.filters.session_on(si):
                    continue
                for oid, stream in log.samples.items():
                    positions.extend((s.pose.position[0], s.pose.position[2]) for s in stream)
                for d in log.objects:
                    if d.category is Category.CAMERA and d.id in log.samples and d.id in log.camera_params:
                        cam_runs.append((log.samples[d.id], log.camera_params[d.id]))
            if not positions:
                raise HTTPException(status_code=404, detail="no samples for coverage")
            if not cam_runs:
                raise HTTPException(status_code=404, detail="no camera streams loaded")
            spec = hm.derive_spec(positions, cell_size)
            grids = [compute_coverage(stream, params, spec, probe) for stream, params in cam_runs]
            report = coverage_report(merge_coverage(grids))
            report["probe_height"] = probe
            return report

    @app.get("/api/metrics")
    def metrics() -> dict:
        with ctx.lock:
            return json.loads(ctx.metrics.to_json())

    @app.post("/api/metrics/save")
    def metrics_save() -> dict:
        with ctx.lock:
            path = ctx.save_metrics()
            return {"path": str(path)}

    if ui_dir is not None and Path(ui_dir).is_dir():
        app.mount("/", StaticFiles(directory=str(ui_dir), html=True), name="ui")

    return app
