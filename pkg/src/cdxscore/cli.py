"""Command line entry points: serve the API, replay scenarios, export fixtures."""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from . import demo
from .scenario import NdjsonSink, ReplayAborted, ScenarioError, load_scenario, replay


def _parse_speed(value: str):
    if value == "instant":
        return value
    cleaned = value[:-1] if value.endswith(("x", "X")) else value
    try:
        speed = float(cleaned)
    except ValueError:
        raise argparse.ArgumentTypeError(
            f"speed must be 'instant' or a multiplier like '60x', got {value!r}"
        )
    if speed <= 0:
        raise argparse.ArgumentTypeError("speed multiplier must be positive")
    return speed


def cmd_replay(args: argparse.Namespace) -> int:
    try:
        script = load_scenario(args.scenario)
    except ScenarioError as e:
        print("scenario is invalid:", file=sys.stderr)
        for problem in e.problems:
            print(f"  - {problem}", file=sys.stderr)
        return 2
    sink = NdjsonSink(args.out)
    try:
        report = replay(script, sink, speed=args.speed)
    except ReplayAborted as e:
        print(f"aborted: {e}", file=sys.stderr)
        return 1
    finally:
        sink.close()
    print(
        f"replayed {report.events_emitted} events "
        f"({report.manual_events} manual, {report.auto_events} automatic) "
        f"in {report.wall_seconds:.2f}s -> {args.out}"
    )
    return 0


def cmd_export_fixtures(args: argparse.Namespace) -> int:
    written = demo.write_fixtures(Path(args.dir))
    for path in written:
        print(path)
    return 0


def cmd_monitor(args: argparse.Namespace) -> int:
    import json
    import time

    from .availability import Monitor, http_sink
    from .exercise import ScoringEvent
    from .service import ServiceConfig

    config = ServiceConfig.from_file(args.config)
    if args.endpoint:
        sink = http_sink(args.endpoint, args.token or "")
        target = args.endpoint
    else:
        out = open(args.out, "a", encoding="utf-8")

        def sink(event: ScoringEvent) -> None:
            out.write(json.dumps(event.to_dict(), sort_keys=True) + "\n")
            out.flush()

        target = args.out
    monitor = Monitor(
        config.exercise.monitored_services,
        sink=sink,
        exercise_id=config.exercise.exercise_id,
        timeout=args.timeout,
        interval_override=args.interval,
    )
    services = len(config.exercise.monitored_services)
    print(f"probing {services} services -> {target} (Ctrl-C to stop)")
    monitor.start()
    try:
        if args.duration:
            time.sleep(args.duration)
        else:
            while True:
                time.sleep(3600)
    except KeyboardInterrupt:
        pass
    finally:
        monitor.stop()
    fails = sum(1 for r in monitor.results if not r.up)
    print(f"{len(monitor.results)} checks, {fails} failed, "
          f"{monitor.sink_errors} sink errors")
    return 0


def cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from .service import ExerciseService, ServiceConfig, create_app

    config = ServiceConfig.from_file(args.config)
    data_dir = Path(os.environ.get("CDXSCORE_DATA", args.data))
    data_dir.mkdir(parents=True, exist_ok=True)
    port = int(os.environ.get("CDXSCORE_PORT", args.port))
    service = ExerciseService(config, log_path=data_dir / "events.ndjson", fsync=args.fsync)
    if service.recovery and service.recovery.records_read:
        print(f"recovered {service.recovery.records_read} records from the log")
    app = create_app(service)
    uvicorn.run(app, host=args.host, port=port, log_level="warning")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cdxscore",
        description="Exercise scoring, feedback timelines and telemetry service.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_serve = sub.add_parser("serve", help="run the HTTP service")
    p_serve.add_argument("--config", required=True, help="exercise/service config JSON")
    p_serve.add_argument("--data", default="./data", help="data directory for the event log")
    p_serve.add_argument("--port", type=int, default=8000)
    p_serve.add_argument("--host", default="127.0.0.1")
    p_serve.add_argument("--fsync", action="store_true", help="fsync the log on every write")
    p_serve.set_defaults(func=cmd_serve)

    p_replay = sub.add_parser("replay", help="replay a scenario into an event log")
    p_replay.add_argument("--scenario", required=True)
    p_replay.add_argument("--speed", type=_parse_speed, default="instant",
                          help="'instant' or a multiplier like 60x")
    p_replay.add_argument("--out", required=True, help="output NDJSON event log")
    p_replay.set_defaults(func=cmd_replay)

    p_fix = sub.add_parser("export-fixtures", help="regenerate every golden fixture file")
    p_fix.add_argument("--dir", required=True)
    p_fix.set_defaults(func=cmd_export_fixtures)

    p_mon = sub.add_parser("monitor", help="probe the monitored services and emit penalties")
    p_mon.add_argument("--config", required=True, help="exercise/service config JSON")
    target = p_mon.add_mutually_exclusive_group(required=True)
    target.add_argument("--endpoint", help="base URL of the exercise service")
    target.add_argument("--out", help="offline mode: append events to this NDJSON file")
    p_mon.add_argument("--token", help="credential for the ingest endpoint")
    p_mon.add_argument("--timeout", type=float, default=2.0, help="probe timeout, seconds")
    p_mon.add_argument("--interval", type=float, default=None,
                       help="override every service's check interval, seconds")
    p_mon.add_argument("--duration", type=float, default=None,
                       help="stop after this many seconds (default: run until Ctrl-C)")
    p_mon.set_defaults(func=cmd_monitor)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
