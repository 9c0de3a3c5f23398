"""Learner reflections and low-level interaction telemetry.

Reflections are predefined-option answers attached to timeline dots, one
per (learner, dot) with later submissions replacing earlier ones.
Interaction telemetry is an append-only stream of clicks, hovers and mouse
movements captured by the frontend, aggregated here into session
statistics and mouse-position heatmaps.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Optional

from .exercise import (
    ExerciseDef,
    ExerciseError,
    ScoreCategory,
    ScoringEvent,
)
from .timeline import dot_color, reflection_options


class AuthorizationError(ExerciseError):
    pass


class ValidationError(ExerciseError):
    pass


class InteractionKind(str, Enum):
    CLICK = "click"
    HOVER = "hover"
    MOVE = "move"


@dataclass(frozen=True)
class Reflection:
    reflection_id: str
    event_id: str  # the dot
    team_id: str
    learner_id: str
    option_id: str
    submitted_at: int  # epoch seconds
    free_text: Optional[str] = None

    def to_dict(self) -> dict:
        d = {
            "reflection_id": self.reflection_id,
            "event_id": self.event_id,
            "team_id": self.team_id,
            "learner_id": self.learner_id,
            "option_id": self.option_id,
            "submitted_at": self.submitted_at,
        }
        if self.free_text is not None:
            d["free_text"] = self.free_text
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "Reflection":
        return cls(
            reflection_id=d["reflection_id"],
            event_id=d["event_id"],
            team_id=d["team_id"],
            learner_id=d["learner_id"],
            option_id=d["option_id"],
            submitted_at=int(d["submitted_at"]),
            free_text=d.get("free_text"),
        )


@dataclass(frozen=True)
class InteractionEvent:
    session_id: str
    learner_id: str
    team_id: str
    kind: InteractionKind
    x: int
    y: int
    viewport: tuple[int, int]  # (width, height) pixels
    at: int  # epoch milliseconds
    target: Optional[str] = None  # dot event_id or region tag

    def to_dict(self) -> dict:
        d = {
            "session_id": self.session_id,
            "learner_id": self.learner_id,
            "team_id": self.team_id,
            "kind": self.kind.value,
            "x": self.x,
            "y": self.y,
            "viewport": {"width": self.viewport[0], "height": self.viewport[1]},
            "at": self.at,
        }
        if self.target is not None:
            d["target"] = self.target
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "InteractionEvent":
        vp = d["viewport"]
        return cls(
            session_id=d["session_id"],
            learner_id=d["learner_id"],
            team_id=d["team_id"],
            kind=InteractionKind(d["kind"]),
            x=int(d["x"]),
            y=int(d["y"]),
            viewport=(int(vp["width"]), int(vp["height"])),
            at=int(d["at"]),
            target=d.get("target"),
        )


@dataclass(frozen=True)
class SessionStats:
    session_id: str
    learner_id: str
    first_at: int  # epoch ms
    last_at: int  # epoch ms
    duration: float  # seconds
    event_count: int

    def to_dict(self) -> dict:
        return {
            "session_id": self.session_id,
            "learner_id": self.learner_id,
            "first_at": self.first_at,
            "last_at": self.last_at,
            "duration": self.duration,
            "event_count": self.event_count,
        }


@dataclass(frozen=True)
class Heatmap:
    cols: int
    rows: int
    cells: tuple[tuple[int, ...], ...]  # [row][col] counts
    viewport: Optional[tuple[int, int]] = None
    total: int = 0

    def to_dict(self) -> dict:
        return {
            "grid": {"cols": self.cols, "rows": self.rows},
            "cells": [list(row) for row in self.cells],
            "viewport": (
                {"width": self.viewport[0], "height": self.viewport[1]}
                if self.viewport
                else None
            ),
            "total": self.total,
        }


# ---------------------------------------------------------------------------
# Reflections
# ---------------------------------------------------------------------------


def dot_index(events: Iterable[ScoringEvent]) -> dict[str, tuple[str, ScoreCategory]]:
    """Map dot event_id -> (team_id, category) for all manual events."""
    return {
        ev.event_id: (ev.team_id, ev.category)
        for ev in events
        if dot_color(ev) is not None
    }


class ReflectionStore:
    """Append-only reflection log with latest-per-(learner, dot) reads."""

    def __init__(self):
        self._log: list[Reflection] = []

    def record(
        self,
        r: Reflection,
        dots: dict[str, tuple[str, ScoreCategory]],
        exercise: Optional[ExerciseDef] = None,
    ) -> str:
        """Validate and store a reflection; returns the stored id.

        A learner may only reflect on dots of their own team, and only with
        an option defined for the dot's category. Re-submission replaces the
        previous answer at read time; the log itself keeps everything.
        """
        if r.event_id not in dots:
            raise ValidationError(f"unknown dot: {r.event_id!r}")
        dot_team, category = dots[r.event_id]
        if r.team_id != dot_team:
            raise AuthorizationError(
                f"dot {r.event_id!r} belongs to {dot_team}, not {r.team_id}"
            )
        valid_options = {o.option_id for o in reflection_options(category, exercise)}
        if r.option_id not in valid_options:
            raise ValidationError(
                f"option {r.option_id!r} is not valid for {category.value} dots"
            )
        self._log.append(r)
        return r.reflection_id

    def latest(self) -> list[Reflection]:
        """One reflection per (learner, dot): the last one submitted."""
        by_key: dict[tuple[str, str], Reflection] = {}
        for r in self._log:
            by_key[(r.learner_id, r.event_id)] = r
        return list(by_key.values())

    def all_records(self) -> list[Reflection]:
        return list(self._log)

    def __len__(self) -> int:
        return len(self._log)


@dataclass(frozen=True)
class ReflectionCounts:
    """Team x dot-category counts of distinct reflections, with margins."""

    by_team: dict[str, dict[ScoreCategory, int]]
    category_totals: dict[ScoreCategory, int]
    team_totals: dict[str, int]
    total: int

    def to_dict(self) -> dict:
        return {
            "by_team": {
                team: {cat.value: n for cat, n in row.items()}
                for team, row in self.by_team.items()
            },
            "category_totals": {cat.value: n for cat, n in self.category_totals.items()},
            "team_totals": dict(self.team_totals),
            "total": self.total,
        }


REFLECTION_CATEGORIES = (
    ScoreCategory.ATTACKS,
    ScoreCategory.USERS,
    ScoreCategory.INJECTS,
    ScoreCategory.ACCESS,
)


def reflection_counts(
    reflections: Iterable[Reflection],
    dots: dict[str, tuple[str, ScoreCategory]],
) -> ReflectionCounts:
    """Count distinct (learner, dot) reflections per team and dot category.

    Teams without any reflection get no row (mirrors how a silent team simply
    does not appear in the response table).
    """
    by_key: dict[tuple[str, str], Reflection] = {}
    for r in reflections:
        by_key[(r.learner_id, r.event_id)] = r

    by_team: dict[str, dict[ScoreCategory, int]] = {}
    for r in by_key.values():
        _, category = dots[r.event_id]
        row = by_team.setdefault(r.team_id, {cat: 0 for cat in REFLECTION_CATEGORIES})
        row[category] += 1

    by_team = dict(sorted(by_team.items()))
    category_totals = {
        cat: sum(row[cat] for row in by_team.values()) for cat in REFLECTION_CATEGORIES
    }
    team_totals = {team: sum(row.values()) for team, row in by_team.items()}
    return ReflectionCounts(
        by_team=by_team,
        category_totals=category_totals,
        team_totals=team_totals,
        total=sum(team_totals.values()),
    )


# ---------------------------------------------------------------------------
# Interaction telemetry
# ---------------------------------------------------------------------------


@dataclass
class BatchResult:
    accepted: int = 0
    duplicates: int = 0
    rejected: list[tuple[int, str]] = field(default_factory=list)  # (index, reason)

    @property
    def ok(self) -> bool:
        return not self.rejected


def validate_interaction(ev: InteractionEvent) -> Optional[str]:
    """Reason the event is invalid, or None."""
    w, h = ev.viewport
    if w <= 0 or h <= 0:
        return "viewport must be positive"
    if not 0 <= ev.x < w:
        return f"x={ev.x} out of bounds for viewport width {w}"
    if not 0 <= ev.y < h:
        return f"y={ev.y} out of bounds for viewport height {h}"
    return None


class TelemetryStore:
    """Append-only interaction log.

    Batches may arrive concurrently and out of order; per-session ordering is
    re-established at read time. Exact duplicates (same session, timestamp,
    kind and coordinates) are dropped.
    """

    def __init__(self):
        self._events: list[InteractionEvent] = []
        self._seen: set[tuple] = set()

    def record_interactions(self, batch: Iterable[InteractionEvent]) -> BatchResult:
        result = BatchResult()
        for i, ev in enumerate(batch):
            reason = validate_interaction(ev)
            if reason is not None:
                result.rejected.append((i, reason))
                continue
            key = (ev.session_id, ev.at, ev.kind, ev.x, ev.y)
            if key in self._seen:
                result.duplicates += 1
                continue
            self._seen.add(key)
            self._events.append(ev)
            result.accepted += 1
        return result

    @property
    def events(self) -> list[InteractionEvent]:
        return list(self._events)

    def __len__(self) -> int:
        return len(self._events)


def session_stats(events: Iterable[InteractionEvent], session_id: str) -> SessionStats:
    """Duration and extent of one viewing session (last minus first event)."""
    session = sorted(
        (ev for ev in events if ev.session_id == session_id), key=lambda ev: ev.at
    )
    if not session:
        raise ValidationError(f"unknown session: {session_id!r}")
    first, last = session[0], session[-1]
    return SessionStats(
        session_id=session_id,
        learner_id=first.learner_id,
        first_at=first.at,
        last_at=last.at,
        duration=(last.at - first.at) / 1000.0,
        event_count=len(session),
    )


def all_session_stats(events: Iterable[InteractionEvent]) -> list[SessionStats]:
    events = list(events)
    ids = sorted({ev.session_id for ev in events})
    return [session_stats(events, sid) for sid in ids]


def build_heatmap(
    events: Iterable[InteractionEvent],
    grid: tuple[int, int],
    viewport: Optional[tuple[int, int]] = None,
) -> Heatmap:
    """Bin event positions into a cols x rows grid.

    Each event falls into exactly one cell, scaled by its own viewport so
    sessions on different screens aggregate into the same grid:
    ``cell = (floor(x * cols / width), floor(y * rows / height))``.
    """
    cols, rows = grid
    if cols < 1 or rows < 1:
        raise ValidationError("heatmap grid must be at least 1x1")
    cells = [[0] * cols for _ in range(rows)]
    total = 0
    for ev in events:
        w, h = ev.viewport
        cx = ev.x * cols // w
        cy = ev.y * rows // h
        cells[cy][cx] += 1
        total += 1
    return Heatmap(
        cols=cols,
        rows=rows,
        cells=tuple(tuple(row) for row in cells),
        viewport=viewport,
        total=total,
    )
