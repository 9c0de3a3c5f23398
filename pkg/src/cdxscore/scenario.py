"""Scenario scripts and their deterministic replay.

A scenario bundles the exercise definition with a timed list of entries:
attacks, communication injects, simulated-user injects, assistance requests
(all manual ratings) and service outage windows (which the availability
monitor turns into automatic penalties). Replaying a script emits the full
scoring-event stream — in real time, accelerated, or instantly — and is
deterministic: the same (script, seed) always produces the same log,
whatever the speed.
"""

from __future__ import annotations

import json
import random
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional, Union

from .availability import ProbeResult, check_offsets, evaluate_checks
from .exercise import (
    ExerciseDef,
    ScoreCategory,
    ScoringEvent,
    SourceRole,
)

ALL_TEAMS = "*"

# entry kind -> (category, source)
KIND_MAP: dict[str, tuple[ScoreCategory, SourceRole]] = {
    "attack": (ScoreCategory.ATTACKS, SourceRole.RED),
    "communication_inject": (ScoreCategory.INJECTS, SourceRole.WHITE),
    "user_inject": (ScoreCategory.USERS, SourceRole.WHITE),
    "assistance_request": (ScoreCategory.ACCESS, SourceRole.GREEN),
}
OUTAGE = "outage_window"
MANUAL_KINDS = tuple(KIND_MAP)


class ScenarioError(Exception):
    """A scenario file failed to parse or violates an invariant."""

    def __init__(self, problems: list[str]):
        self.problems = problems
        super().__init__("; ".join(problems))


class ReplayAborted(Exception):
    """The sink failed mid-replay; ``emitted`` events made it out."""

    def __init__(self, emitted: int, cause: Exception):
        self.emitted = emitted
        self.cause = cause
        super().__init__(f"replay aborted after {emitted} events: {cause}")


@dataclass(frozen=True)
class ScenarioEntry:
    offset: int  # seconds from exercise start
    kind: str
    team_id: str  # a team id or "*" for all teams
    objective_id: Optional[str] = None
    points: Optional[int] = None  # manual kinds only
    duration: Optional[int] = None  # outage windows only
    service_id: Optional[str] = None  # outage windows only
    title: str = ""
    description: str = ""
    recording_delay: int = 0  # manual-entry lag, seconds

    def to_dict(self) -> dict:
        d: dict = {"offset": self.offset, "kind": self.kind, "team_id": self.team_id}
        for key in ("objective_id", "points", "duration", "service_id"):
            val = getattr(self, key)
            if val is not None:
                d[key] = val
        if self.title:
            d["title"] = self.title
        if self.description:
            d["description"] = self.description
        if self.recording_delay:
            d["recording_delay"] = self.recording_delay
        return d


@dataclass
class ScenarioScript:
    exercise: ExerciseDef
    entries: list[ScenarioEntry] = field(default_factory=list)
    seed: int = 0

    def manual_entries(self) -> list[ScenarioEntry]:
        return [e for e in self.entries if e.kind in KIND_MAP]

    def outage_entries(self) -> list[ScenarioEntry]:
        return [e for e in self.entries if e.kind == OUTAGE]

    def manual_objective_ids(self) -> list[str]:
        seen: dict[str, None] = {}
        for e in self.manual_entries():
            if e.objective_id:
                seen.setdefault(e.objective_id)
        return list(seen)

    def validate(self) -> list[str]:
        problems: list[str] = []
        teams = set(self.exercise.team_ids)
        services = {s.service_id for s in self.exercise.monitored_services}
        last_offset = None
        for i, e in enumerate(self.entries):
            where = f"entry {i}"
            if e.kind not in MANUAL_KINDS and e.kind != OUTAGE:
                problems.append(f"{where}: unknown kind {e.kind!r}")
                continue
            if not 0 <= e.offset <= self.exercise.duration:
                problems.append(f"{where}: offset {e.offset} outside exercise duration")
            if last_offset is not None and e.offset < last_offset:
                problems.append(f"{where}: entries must be sorted by offset")
            last_offset = e.offset
            if e.team_id != ALL_TEAMS and e.team_id not in teams:
                problems.append(f"{where}: unknown team {e.team_id!r}")
            if e.kind == OUTAGE:
                if e.points is not None:
                    problems.append(f"{where}: outage windows carry no points")
                if not e.duration or e.duration <= 0:
                    problems.append(f"{where}: outage window needs a positive duration")
                if e.service_id not in services:
                    problems.append(f"{where}: unknown service {e.service_id!r}")
            else:
                if not e.points:
                    problems.append(f"{where}: {e.kind} needs non-zero points")
                if e.recording_delay < 0:
                    problems.append(f"{where}: recording_delay must be >= 0")
        return problems

    def to_dict(self) -> dict:
        return {
            "exercise": self.exercise.to_dict(),
            "seed": self.seed,
            "entries": [e.to_dict() for e in self.entries],
        }


def load_scenario(path: Union[str, Path]) -> ScenarioScript:
    """Parse and validate a scenario file; raises ScenarioError listing problems."""
    raw = Path(path).read_text(encoding="utf-8")
    try:
        data = json.loads(raw)
    except json.JSONDecodeError as e:
        raise ScenarioError([f"not valid JSON: line {e.lineno}: {e.msg}"])
    return scenario_from_dict(data)


def scenario_from_dict(data: dict) -> ScenarioScript:
    try:
        exercise = ExerciseDef.from_dict(data["exercise"])
    except KeyError as e:
        raise ScenarioError([f"exercise block: missing field {e}"])
    entries = []
    for i, d in enumerate(data.get("entries", [])):
        try:
            entries.append(
                ScenarioEntry(
                    offset=int(d["offset"]),
                    kind=d["kind"],
                    team_id=d.get("team_id", ALL_TEAMS),
                    objective_id=d.get("objective_id"),
                    points=d.get("points"),
                    duration=d.get("duration"),
                    service_id=d.get("service_id"),
                    title=d.get("title", ""),
                    description=d.get("description", ""),
                    recording_delay=int(d.get("recording_delay", 0)),
                )
            )
        except (KeyError, TypeError, ValueError) as e:
            raise ScenarioError([f"entry {i}: {e}"])
    script = ScenarioScript(exercise=exercise, entries=entries, seed=int(data.get("seed", 0)))
    problems = script.validate()
    if problems:
        raise ScenarioError(problems)
    return script


# ---------------------------------------------------------------------------
# Replay
# ---------------------------------------------------------------------------


@dataclass
class ReplayReport:
    events_emitted: int
    manual_events: int
    auto_events: int
    wall_seconds: float


def manual_events_of(script: ScenarioScript) -> list[ScoringEvent]:
    """Expand manual entries into scoring events (one per targeted team)."""
    start = script.exercise.start_at
    events = []
    counter = 0
    seen: dict[str, int] = {}
    for e in script.manual_entries():
        category, source = KIND_MAP[e.kind]
        teams = script.exercise.team_ids if e.team_id == ALL_TEAMS else [e.team_id]
        for team_id in teams:
            counter += 1
            base = e.objective_id or f"obj{counter:03d}"
            event_id = f"{base}-{team_id}".lower()
            # an objective may be rated more than once for one team (e.g. a
            # promptness rating followed by a quality rating)
            n = seen.get(event_id, 0) + 1
            seen[event_id] = n
            if n > 1:
                event_id = f"{event_id}-{n}"
            events.append(
                ScoringEvent(
                    event_id=event_id,
                    exercise_id=script.exercise.exercise_id,
                    team_id=team_id,
                    category=category,
                    source=source,
                    points=e.points or 0,
                    occurred_at=start + e.offset,
                    recorded_at=start + e.offset + e.recording_delay,
                    title=e.title,
                    description=e.description,
                    objective_id=e.objective_id,
                )
            )
    return events


def probe_schedule(script: ScenarioScript) -> list[ProbeResult]:
    """Full probe-result log implied by the script's outage windows.

    Every monitored service is checked on its own interval across the whole
    exercise; a check fails iff it falls inside one of the service's outage
    windows. Up-check latencies carry seeded jitter so the log is
    deterministic per (script, seed).
    """
    rng = random.Random(script.seed)
    outages: dict[str, list[tuple[int, int]]] = {}
    for e in script.outage_entries():
        outages.setdefault(e.service_id or "", []).append(
            (e.offset, e.offset + (e.duration or 0))
        )
    results = []
    start = script.exercise.start_at
    for svc in script.exercise.monitored_services:
        windows = outages.get(svc.service_id, [])
        for off in check_offsets(svc, script.exercise.duration):
            down = any(lo <= off < hi for lo, hi in windows)
            results.append(
                ProbeResult(
                    service_id=svc.service_id,
                    team_id=svc.team_id,
                    probed_at=start + off,
                    up=not down,
                    latency_ms=None if down else round(rng.uniform(2.0, 40.0), 3),
                )
            )
    results.sort(key=lambda r: (r.probed_at, r.service_id))
    return results


def auto_events_of(script: ScenarioScript) -> list[ScoringEvent]:
    from dataclasses import replace

    events = evaluate_checks(probe_schedule(script), script.exercise.monitored_services)
    return [replace(ev, exercise_id=script.exercise.exercise_id) for ev in events]


def all_events_of(script: ScenarioScript) -> list[ScoringEvent]:
    """The complete deterministic event stream, ordered by occurrence."""
    events = manual_events_of(script) + auto_events_of(script)
    events.sort(key=lambda ev: (ev.occurred_at, ev.event_id))
    return events


def replay(
    script: ScenarioScript,
    sink: Callable[[ScoringEvent], None],
    speed: Union[float, str] = "instant",
    sleep_fn: Callable[[float], None] = time.sleep,
) -> ReplayReport:
    """Deliver the script's events to ``sink`` in occurrence order.

    ``speed`` is either "instant" (no pacing, suitable for CI and fixture
    generation) or a multiplier: 1.0 re-runs the exercise in real time, 60.0
    runs a 6-hour scenario in about 6 minutes. Pacing never changes the
    emitted events. A sink failure aborts with the partial progress.
    """
    problems = script.validate()
    if problems:
        raise ScenarioError(problems)
    if speed != "instant" and (not isinstance(speed, (int, float)) or speed <= 0):
        raise ValueError(f"speed must be a positive multiplier or 'instant', got {speed!r}")

    events = all_events_of(script)
    started = time.perf_counter()
    emitted = 0
    prev_t: Optional[int] = None
    for ev in events:
        if speed != "instant" and prev_t is not None and ev.occurred_at > prev_t:
            sleep_fn((ev.occurred_at - prev_t) / float(speed))
        prev_t = ev.occurred_at
        try:
            sink(ev)
        except Exception as e:
            raise ReplayAborted(emitted, e)
        emitted += 1
    manual = sum(1 for ev in events if ev.is_manual)
    return ReplayReport(
        events_emitted=emitted,
        manual_events=manual,
        auto_events=emitted - manual,
        wall_seconds=time.perf_counter() - started,
    )


class NdjsonSink:
    """Writes each event as one JSON line; usable as a replay sink."""

    def __init__(self, path: Union[str, Path]):
        self.path = Path(path)
        self._fh = self.path.open("w", encoding="utf-8")

    def __call__(self, event: ScoringEvent) -> None:
        self._fh.write(json.dumps(event.to_dict(), sort_keys=True) + "\n")

    def close(self) -> None:
        self._fh.close()

    def __enter__(self) -> "NdjsonSink":
        return self

    def __exit__(self, *exc) -> None:
        self.close()
