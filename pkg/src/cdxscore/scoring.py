"""Pure scoring engine.

Aggregates scoring events into per-team category totals, total scores,
time-parameterised score curves and the sorted scoreboard. Everything here
is a pure function over immutable inputs; state lives in the service layer.

The initial score is credited to the Services category: availability
penalties eat into it, all other categories start from zero.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Optional

from .exercise import (
    ALLOWED_CATEGORIES,
    ExerciseDef,
    ScoreCategory,
    ScoringEvent,
    UnknownTeamError,
)

CategoryTotals = dict[ScoreCategory, int]


def fresh_totals(initial_score: int) -> CategoryTotals:
    totals = {cat: 0 for cat in ScoreCategory}
    totals[ScoreCategory.SERVICES] = initial_score
    return totals


def total_of(totals: CategoryTotals) -> int:
    return sum(totals.values())


@dataclass(frozen=True)
class ScoreboardRow:
    team_id: str
    display_name: str
    totals: CategoryTotals
    total: int

    def to_dict(self) -> dict:
        return {
            "team_id": self.team_id,
            "display_name": self.display_name,
            "totals": {cat.value: pts for cat, pts in self.totals.items()},
            "total": self.total,
        }


@dataclass(frozen=True)
class Scoreboard:
    exercise_id: str
    as_of: int
    rows: tuple[ScoreboardRow, ...]

    def row(self, team_id: str) -> ScoreboardRow:
        for r in self.rows:
            if r.team_id == team_id:
                return r
        raise UnknownTeamError(team_id)

    def to_dict(self) -> dict:
        return {
            "exercise_id": self.exercise_id,
            "as_of": self.as_of,
            "rows": [r.to_dict() for r in self.rows],
        }


@dataclass
class ValidationResult:
    """Outcome of validating one event: hard violations block, warnings don't."""

    violations: list[str] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations


def validate_event(event: ScoringEvent, exercise: ExerciseDef) -> ValidationResult:
    """Check an event against the exercise definition.

    Never raises; all problems are reported in the result. Events dated
    outside the exercise window are legal (manual entries arrive late in
    reality) but get a warning.
    """
    result = ValidationResult()
    if event.exercise_id != exercise.exercise_id:
        result.violations.append(
            f"unknown exercise: {event.exercise_id!r} (expected {exercise.exercise_id!r})"
        )
    if event.team_id not in exercise.team_ids:
        result.violations.append(f"unknown team: {event.team_id!r}")
    if event.points == 0:
        result.violations.append("points must be non-zero")
    if event.category not in ALLOWED_CATEGORIES[event.source]:
        result.violations.append(
            f"illegal category/source pair: {event.source.value} may not score "
            f"{event.category.value}"
        )
    if event.occurred_at > event.recorded_at:
        result.violations.append("occurred_at must not be after recorded_at")
    start, end = exercise.window()
    if not start <= event.occurred_at <= end:
        result.warnings.append(
            f"occurred_at {event.occurred_at} outside exercise window [{start}, {end}]"
        )
    return result


def apply_event(
    state: dict[str, CategoryTotals], event: ScoringEvent
) -> dict[str, CategoryTotals]:
    """Fold one validated event into per-team totals.

    Returns a new state; only the event's team changes, by exactly
    ``event.points`` in ``event.category``. Raises ValueError on events that
    should have been rejected by validate_event (caller contract).
    """
    if event.team_id not in state:
        raise UnknownTeamError(event.team_id)
    if event.points == 0:
        raise ValueError("unvalidated event: zero points")
    if event.category not in ALLOWED_CATEGORIES[event.source]:
        raise ValueError("unvalidated event: illegal category/source pair")
    new_state = {team: dict(totals) for team, totals in state.items()}
    new_state[event.team_id][event.category] += event.points
    return new_state


def initial_state(exercise: ExerciseDef) -> dict[str, CategoryTotals]:
    return {tid: fresh_totals(exercise.initial_score) for tid in exercise.team_ids}


def compute_scoreboard(
    events: Iterable[ScoringEvent],
    exercise: ExerciseDef,
    as_of: Optional[int] = None,
) -> Scoreboard:
    """Aggregate events into the public scoreboard.

    Events with ``occurred_at > as_of`` are excluded; ``as_of=None`` means
    "everything". Every team gets a row even with no events. Rows are sorted
    by total descending, ties broken by team_id ascending.
    """
    state = initial_state(exercise)
    last_t = exercise.start_at
    for ev in events:
        if as_of is not None and ev.occurred_at > as_of:
            continue
        state[ev.team_id][ev.category] += ev.points
        last_t = max(last_t, ev.occurred_at)
    rows = [
        ScoreboardRow(
            team_id=t.team_id,
            display_name=t.display_name,
            totals=state[t.team_id],
            total=total_of(state[t.team_id]),
        )
        for t in exercise.teams
    ]
    rows.sort(key=lambda r: (-r.total, r.team_id))
    return Scoreboard(
        exercise_id=exercise.exercise_id,
        as_of=as_of if as_of is not None else last_t,
        rows=tuple(rows),
    )


def score_at(
    events: Iterable[ScoringEvent],
    exercise: ExerciseDef,
    team_id: str,
    t: int,
) -> int:
    """Team's total score at instant ``t``.

    Right-continuous step semantics: an event at exactly ``t`` is included.
    """
    if team_id not in exercise.team_ids:
        raise UnknownTeamError(team_id)
    score = exercise.initial_score
    for ev in events:
        if ev.team_id == team_id and ev.occurred_at <= t:
            score += ev.points
    return score


def category_breakdown(
    events: Iterable[ScoringEvent],
    exercise: ExerciseDef,
    team_id: str,
) -> CategoryTotals:
    """Per-category sums for one team, with the initial score under Services."""
    if team_id not in exercise.team_ids:
        raise UnknownTeamError(team_id)
    totals = fresh_totals(exercise.initial_score)
    for ev in events:
        if ev.team_id == team_id:
            totals[ev.category] += ev.points
    return totals
