"""Command-line entry points.

Subcommands: synth (generate a deterministic session), validate, info,
heatmap (batch PNG + sidecar over any number of logs), coverage, serve.
Exit codes: 0 success, 1 validation or data failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from . import heatmap as hm
from .analytics import DEFAULT_PROBE_HEIGHT, compute_coverage, coverage_report
from .errors import (
    EmptyDataError,
    LogParseError,
    LogStructureError,
    SessionScopeError,
    UnknownIdError,
)
from .logstore import (
    LOG_EXTENSION,
    parse_session_file,
    parse_session_with_report,
    validate_session,
    write_session_file,
)
from .model import Category
from .replay import FilterSet, load_sessions
from .synth import SCENARIOS, ScenarioSpec, synthesize_session

DEFAULT_PORT = 8077
PORT_ENV_VAR = "SESSIONSCOPE_PORT"


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sessionscope",
        description="Record, replay, and analyze gameplay telemetry sessions.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a deterministic synthetic session")
    p.add_argument("--scenario", required=True, choices=SCENARIOS)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--players", type=int, default=1)
    p.add_argument("--duration", type=float, default=60.0)
    p.add_argument("--out", required=True, help="output directory")

    p = sub.add_parser("validate", help="parse and validate a session log")
    p.add_argument("log", help="path to a session log")

    p = sub.add_parser("info", help="print session metadata and stream sizes")
    p.add_argument("log")

    p = sub.add_parser("heatmap", help="accumulate logs into a density PNG + JSON sidecar")
    p.add_argument("logs", nargs="+", metavar="LOG")
    p.add_argument("--cell", type=float, default=hm.DEFAULT_CELL_SIZE)
    p.add_argument("--out", required=True, help="output PNG path")

    p = sub.add_parser("coverage", help="camera-frustum exploration coverage report")
    p.add_argument("log")
    p.add_argument("--cell", type=float, default=hm.DEFAULT_CELL_SIZE)
    p.add_argument("--height", type=float, default=DEFAULT_PROBE_HEIGHT)
    p.add_argument("--out", required=True, help="output JSON path")

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--dir", required=True, help="directory of session logs")
    p.add_argument("--port", type=int, default=DEFAULT_PORT)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--ui", default=None, help="directory of built web UI assets")

    return parser


def _cmd_synth(args: argparse.Namespace) -> int:
    try:
        spec = ScenarioSpec(
            scenario=args.scenario,
            seed=args.seed,
            player_count=args.players,
            duration=args.duration,
        )
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    log = synthesize_session(spec)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / f"{log.session_id}{LOG_EXTENSION}"
    n = write_session_file(log, path)
    print(f"wrote {path} ({n} bytes, duration {log.duration:g}s)")
    return 0


def _cmd_validate(args: argparse.Namespace) -> int:
    try:
        log, report = parse_session_with_report(Path(args.log).read_bytes())
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (LogParseError, LogStructureError, UnknownIdError) as exc:
        print(f"invalid: {exc}", file=sys.stderr)
        return 1
    violations = validate_session(log)
    for v in violations:
        print(str(v), file=sys.stderr)
    if violations:
        print(f"invalid: {len(violations)} violation(s)", file=sys.stderr)
        return 1
    suffix = f" ({report.unknown_fields} unknown field(s) ignored)" if report.unknown_fields else ""
    print(f"OK: {log.session_id}{suffix}")
    return 0


def _cmd_info(args: argparse.Namespace) -> int:
    try:
        log = parse_session_file(args.log)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (LogParseError, LogStructureError, UnknownIdError) as exc:
        print(f"invalid: {exc}", file=sys.stderr)
        return 1
    info = {
        "session_id": log.session_id,
        "game": log.game_name,
        "started_at": log.started_at,
        "sample_hz": log.sample_hz,
        "duration": log.duration,
        "objects": [
            {"id": d.id, "category": d.category.value, "samples": len(log.samples.get(d.id, ()))
             if d.category is not Category.HAND else len(log.hands.get(d.id, ()))}
            for d in log.objects
        ],
        "statics": len(log.statics),
        "inputs": len(log.inputs),
        "audio": len(log.audio),
    }
    print(json.dumps(info, indent=2))
    return 0


def _cmd_heatmap(args: argparse.Namespace) -> int:
    logs = []
    for path in args.logs:
        try:
            logs.append(parse_session_file(path))
        except OSError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return 1
        except (LogParseError, LogStructureError, UnknownIdError) as exc:
            print(f"invalid {path}: {exc}", file=sys.stderr)
            return 1
    # Batch aggregation is not bound by the interactive 3-session limit.
    loaded = load_sessions(logs, limit=len(logs))
    try:
        grid = hm.accumulate_density(loaded, FilterSet(), cell_size=args.cell)
    except EmptyDataError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    files = hm.export_heatmap(grid, hm.colorize(grid), args.out)
    print(f"wrote {files[0]} and {files[1]} ({grid.total} samples, max {grid.max_count})")
    return 0


def _cmd_coverage(args: argparse.Namespace) -> int:
    try:
        log = parse_session_file(args.log)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (LogParseError, LogStructureError, UnknownIdError) as exc:
        print(f"invalid: {exc}", file=sys.stderr)
        return 1
    cam = next(
        (d for d in log.objects
         if d.category is Category.CAMERA and d.id in log.samples and d.id in log.camera_params),
        None,
    )
    if cam is None:
        print("error: no camera stream in the log", file=sys.stderr)
        return 1
    positions = [
        (s.pose.position[0], s.pose.position[2])
        for stream in log.samples.values()
        for s in stream
    ]
    spec = hm.derive_spec(positions, args.cell)
    grid = compute_coverage(log.samples[cam.id], log.camera_params[cam.id], spec, args.height)
    report = coverage_report(grid)
    report["probe_height"] = args.height
    Path(args.out).write_text(json.dumps(report) + "\n", encoding="utf-8")
    print(f"wrote {args.out} (covered fraction {grid.covered_fraction:.3f})")
    return 0


def _cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from .service import create_app

    port = args.port
    env_port = os.environ.get(PORT_ENV_VAR)
    if env_port:
        try:
            port = int(env_port)
        except ValueError:
            print(f"error: {PORT_ENV_VAR} must be an integer", file=sys.stderr)
            return 2
    try:
        app = create_app(Path(args.dir), ui_dir=args.ui)
    except NotADirectoryError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    uvicorn.run(app, host=args.host, port=port, log_level="info")
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    handlers = {
        "synth": _cmd_synth,
        "validate": _cmd_validate,
        "info": _cmd_info,
        "heatmap": _cmd_heatmap,
        "coverage": _cmd_coverage,
        "serve": _cmd_serve,
    }
    try:
        return handlers[args.command](args)
    except SessionScopeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
