"""Per-team feedback timeline.

Each team gets a personalized model: the step curve of its total score over
time plus one interactive dot per manually rated event. Automatic
availability penalties shape the curve but get no dot — dots exist to
collect reflections on manual ratings.

Dot colors follow the rating source: red for attack penalties, white for
communication-inject ratings, yellow for simulated-user ratings, grey for
green-team assistance charges.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Optional

from .exercise import (
    ExerciseDef,
    ReflectionOption,
    ScoreCategory,
    ScoringEvent,
    SourceRole,
    UnknownTeamError,
)
from .scoring import score_at

# A manual rating recorded this long after the fact gets flagged, so learners
# can tell a late entry from a late event.
LATE_RECORDING_THRESHOLD = 600  # seconds


class DotColor(str, Enum):
    RED = "red"
    WHITE = "white"
    YELLOW = "yellow"
    GREY = "grey"


_COLOR_BY_CATEGORY = {
    ScoreCategory.ATTACKS: DotColor.RED,
    ScoreCategory.INJECTS: DotColor.WHITE,
    ScoreCategory.USERS: DotColor.YELLOW,
    ScoreCategory.ACCESS: DotColor.GREY,
}

DEFAULT_REFLECTION_OPTIONS: dict[ScoreCategory, list[ReflectionOption]] = {
    ScoreCategory.ATTACKS: [
        ReflectionOption("attack-recognized", ScoreCategory.ATTACKS, "We recognized this attack"),
        ReflectionOption(
            "attack-not-recognized", ScoreCategory.ATTACKS, "We did not recognize this attack"
        ),
        ReflectionOption(
            "attack-other", ScoreCategory.ATTACKS, "Other / no comment", free_text=True
        ),
    ],
    ScoreCategory.INJECTS: [
        ReflectionOption("inject-answered", ScoreCategory.INJECTS, "We responded to this inject"),
        ReflectionOption(
            "inject-no-time",
            ScoreCategory.INJECTS,
            "We did not respond to this inject — no time left for it",
        ),
        ReflectionOption(
            "inject-missed", ScoreCategory.INJECTS, "We did not notice this inject"
        ),
        ReflectionOption(
            "inject-other", ScoreCategory.INJECTS, "Other / no comment", free_text=True
        ),
    ],
    ScoreCategory.USERS: [
        ReflectionOption("user-handled", ScoreCategory.USERS, "We handled the user request"),
        ReflectionOption(
            "user-deprioritized",
            ScoreCategory.USERS,
            "We deprioritized this request in favor of the attacks",
        ),
        ReflectionOption("user-other", ScoreCategory.USERS, "Other / no comment", free_text=True),
    ],
    ScoreCategory.ACCESS: [
        ReflectionOption(
            "assist-necessary", ScoreCategory.ACCESS, "We could not have recovered without help"
        ),
        ReflectionOption(
            "assist-tradeoff",
            ScoreCategory.ACCESS,
            "Paying the penalty was faster than fixing it ourselves",
        ),
        ReflectionOption("assist-other", ScoreCategory.ACCESS, "Other / no comment", free_text=True),
    ],
}


@dataclass(frozen=True)
class TimelineDot:
    event_id: str
    at: int  # occurred_at
    points: int
    color: DotColor
    title: str
    tooltip: str
    reflection_option_ids: tuple[str, ...]
    recorded_late: bool = False

    def to_dict(self) -> dict:
        return {
            "event_id": self.event_id,
            "at": self.at,
            "points": self.points,
            "color": self.color.value,
            "title": self.title,
            "tooltip": self.tooltip,
            "reflection_option_ids": list(self.reflection_option_ids),
            "recorded_late": self.recorded_late,
        }


@dataclass(frozen=True)
class TimelineModel:
    team_id: str
    range: tuple[int, int]
    curve: tuple[tuple[int, int], ...]  # (timestamp, score) breakpoints
    dots: tuple[TimelineDot, ...]

    def to_dict(self) -> dict:
        return {
            "team_id": self.team_id,
            "range": {"start": self.range[0], "end": self.range[1]},
            "curve": [[t, s] for t, s in self.curve],
            "dots": [d.to_dict() for d in self.dots],
        }


def dot_color(event: ScoringEvent) -> Optional[DotColor]:
    """Color for an event's dot; None for automatic events (no dot)."""
    if event.source == SourceRole.AUTO or event.category == ScoreCategory.SERVICES:
        return None
    return _COLOR_BY_CATEGORY[event.category]


def tooltip(event: ScoringEvent) -> str:
    """Dot tooltip: title, signed points, category and the rating's reason."""
    text = f"{event.title} ({event.points:+,} pts, {event.category.display_name})"
    if event.description:
        text += f"\n{event.description}"
    return text


def reflection_options(
    category: ScoreCategory,
    exercise: Optional[ExerciseDef] = None,
) -> list[ReflectionOption]:
    """Predefined reflection options for a dot category, stable order.

    Exercises may override the defaults in their definition. Services has no
    dots, hence no options.
    """
    if category == ScoreCategory.SERVICES:
        raise ValueError("services events have no dots and no reflection options")
    if exercise is not None and category in exercise.reflection_options:
        return list(exercise.reflection_options[category])
    return list(DEFAULT_REFLECTION_OPTIONS[category])


def build_timeline(
    events: Iterable[ScoringEvent],
    exercise: ExerciseDef,
    team_id: str,
    range_: Optional[tuple[int, int]] = None,
) -> TimelineModel:
    """Build one team's timeline model over ``range_`` (default: exercise window).

    The curve is the team's cumulative score as breakpoints of a
    right-continuous step function; simultaneous events merge into one
    breakpoint. Dots are exactly the team's manual events in range.
    """
    if team_id not in exercise.team_ids:
        raise UnknownTeamError(team_id)
    start, end = range_ if range_ is not None else exercise.window()
    team_events = [ev for ev in events if ev.team_id == team_id]

    times = sorted({ev.occurred_at for ev in team_events if start <= ev.occurred_at <= end})
    curve: list[tuple[int, int]] = []
    if not times or times[0] > start:
        curve.append((start, score_at(team_events, exercise, team_id, start)))
    for t in times:
        curve.append((t, score_at(team_events, exercise, team_id, t)))
    if curve[-1][0] != end:
        curve.append((end, score_at(team_events, exercise, team_id, end)))

    dots = []
    for ev in sorted(team_events, key=lambda e: (e.occurred_at, e.event_id)):
        color = dot_color(ev)
        if color is None or not start <= ev.occurred_at <= end:
            continue
        options = reflection_options(ev.category, exercise)
        dots.append(
            TimelineDot(
                event_id=ev.event_id,
                at=ev.occurred_at,
                points=ev.points,
                color=color,
                title=ev.title,
                tooltip=tooltip(ev),
                reflection_option_ids=tuple(o.option_id for o in options),
                recorded_late=(ev.recorded_at - ev.occurred_at) > LATE_RECORDING_THRESHOLD,
            )
        )
    return TimelineModel(
        team_id=team_id,
        range=(start, end),
        curve=tuple(curve),
        dots=tuple(dots),
    )
