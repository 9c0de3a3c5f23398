"""Domain model for a scored cyber defence exercise.

An exercise is defined up front (teams, phases, monitored services,
initial score); during the run it accumulates ScoringEvents from the
automatic availability monitor and from manual ratings entered by the
red, white and green teams.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Optional


class ExerciseError(Exception):
    """Base class for domain errors."""


class UnknownTeamError(ExerciseError):
    pass


class UnknownServiceError(ExerciseError):
    pass


class DefinitionError(ExerciseError):
    """An exercise definition violates its invariants."""


class ScoreCategory(str, Enum):
    """The five scoreboard columns."""

    SERVICES = "services"
    ATTACKS = "attacks"
    INJECTS = "injects"
    USERS = "users"
    ACCESS = "access"

    @property
    def display_name(self) -> str:
        return self.value.capitalize()


class SourceRole(str, Enum):
    """Who produced a scoring event."""

    AUTO = "auto"
    RED = "red"
    WHITE = "white"
    GREEN = "green"


# Each source may only score specific categories: the monitor scores service
# availability, red scores attacks, white rates injects and simulated-user
# requests, green charges for assistance.
ALLOWED_CATEGORIES: dict[SourceRole, frozenset[ScoreCategory]] = {
    SourceRole.AUTO: frozenset({ScoreCategory.SERVICES}),
    SourceRole.RED: frozenset({ScoreCategory.ATTACKS}),
    SourceRole.WHITE: frozenset({ScoreCategory.INJECTS, ScoreCategory.USERS}),
    SourceRole.GREEN: frozenset({ScoreCategory.ACCESS}),
}

MANUAL_SOURCES = (SourceRole.RED, SourceRole.WHITE, SourceRole.GREEN)


@dataclass(frozen=True)
class TeamDef:
    team_id: str
    display_name: str
    auth_token_ref: str = ""


@dataclass(frozen=True)
class PhaseDef:
    order: int
    name: str
    duration_minutes: int
    day: int


@dataclass(frozen=True)
class ServiceDef:
    """A critical service whose availability is probed periodically."""

    service_id: str
    team_id: str
    name: str
    host: str
    port: int
    protocol: str = "tcp-connect"  # tcp-connect | http-get
    http_path: str = "/"
    check_interval: int = 60  # seconds
    penalty_per_failed_check: int = -100

    def validate(self) -> None:
        if self.check_interval <= 0:
            raise DefinitionError(f"{self.service_id}: check_interval must be > 0")
        if self.penalty_per_failed_check >= 0:
            raise DefinitionError(
                f"{self.service_id}: penalty_per_failed_check must be negative"
            )
        if self.protocol not in ("tcp-connect", "http-get"):
            raise DefinitionError(f"{self.service_id}: unknown protocol {self.protocol!r}")


@dataclass(frozen=True)
class ScoringEvent:
    """One signed point change for one team.

    ``occurred_at`` is the exercise-clock instant the scored thing happened;
    ``recorded_at`` is when it was entered. Manual ratings often trail the
    action they rate, so the two are kept separate and the timeline positions
    events by ``occurred_at``.
    """

    event_id: str
    exercise_id: str
    team_id: str
    category: ScoreCategory
    source: SourceRole
    points: int
    occurred_at: int  # epoch seconds
    recorded_at: int  # epoch seconds
    title: str = ""
    description: str = ""
    objective_id: Optional[str] = None

    @property
    def is_manual(self) -> bool:
        return self.source != SourceRole.AUTO

    def to_dict(self) -> dict:
        d = {
            "event_id": self.event_id,
            "exercise_id": self.exercise_id,
            "team_id": self.team_id,
            "category": self.category.value,
            "source": self.source.value,
            "points": self.points,
            "occurred_at": self.occurred_at,
            "recorded_at": self.recorded_at,
            "title": self.title,
            "description": self.description,
        }
        if self.objective_id is not None:
            d["objective_id"] = self.objective_id
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "ScoringEvent":
        return cls(
            event_id=d["event_id"],
            exercise_id=d["exercise_id"],
            team_id=d["team_id"],
            category=ScoreCategory(d["category"]),
            source=SourceRole(d["source"]),
            points=int(d["points"]),
            occurred_at=int(d["occurred_at"]),
            recorded_at=int(d["recorded_at"]),
            title=d.get("title", ""),
            description=d.get("description", ""),
            objective_id=d.get("objective_id"),
        )


@dataclass(frozen=True)
class ReflectionOption:
    """A predefined answer a learner can attach to a timeline dot."""

    option_id: str
    category: ScoreCategory
    label: str
    free_text: bool = False  # the catch-all "other" choice


@dataclass
class ExerciseDef:
    """Static definition of one exercise.

    ``start_at``/``duration`` anchor the exercise clock: the scored window is
    ``[start_at, start_at + duration]``. Phases are descriptive (agenda and
    time allocation); they do not drive scoring.
    """

    exercise_id: str
    name: str
    initial_score: int
    start_at: int  # epoch seconds, start of the scored exercise phase
    duration: int  # seconds
    teams: list[TeamDef] = field(default_factory=list)
    phases: list[PhaseDef] = field(default_factory=list)
    monitored_services: list[ServiceDef] = field(default_factory=list)
    reflection_options: dict[ScoreCategory, list[ReflectionOption]] = field(
        default_factory=dict
    )

    @property
    def end_at(self) -> int:
        return self.start_at + self.duration

    def window(self) -> tuple[int, int]:
        return (self.start_at, self.end_at)

    @property
    def team_ids(self) -> list[str]:
        return [t.team_id for t in self.teams]

    def team(self, team_id: str) -> TeamDef:
        for t in self.teams:
            if t.team_id == team_id:
                return t
        raise UnknownTeamError(team_id)

    def service(self, service_id: str) -> ServiceDef:
        for s in self.monitored_services:
            if s.service_id == service_id:
                return s
        raise UnknownServiceError(service_id)

    def validate(self) -> None:
        if self.initial_score <= 0:
            raise DefinitionError("initial_score must be > 0")
        if self.duration <= 0:
            raise DefinitionError("duration must be > 0")
        ids = self.team_ids
        if len(set(ids)) != len(ids):
            raise DefinitionError("team ids must be unique")
        for t in self.teams:
            if not t.display_name:
                raise DefinitionError(f"{t.team_id}: display_name must be non-empty")
        orders = sorted(p.order for p in self.phases)
        if orders and orders != list(range(1, len(orders) + 1)):
            raise DefinitionError("phase orders must be contiguous from 1")
        for s in self.monitored_services:
            s.validate()
            if s.team_id not in ids:
                raise DefinitionError(f"{s.service_id}: unknown team {s.team_id}")
        for cat, opts in self.reflection_options.items():
            if cat == ScoreCategory.SERVICES:
                raise DefinitionError("services events have no dots, so no options")
            if len(opts) < 2:
                raise DefinitionError(f"{cat.value}: at least two reflection options required")
            if sum(o.free_text for o in opts) != 1:
                raise DefinitionError(f"{cat.value}: exactly one free-text option required")
            option_ids = [o.option_id for o in opts]
            if len(set(option_ids)) != len(option_ids):
                raise DefinitionError(f"{cat.value}: option ids must be unique")

    def to_dict(self) -> dict:
        return {
            "exercise_id": self.exercise_id,
            "name": self.name,
            "initial_score": self.initial_score,
            "start_at": self.start_at,
            "duration": self.duration,
            "teams": [
                {
                    "team_id": t.team_id,
                    "display_name": t.display_name,
                    "auth_token_ref": t.auth_token_ref,
                }
                for t in self.teams
            ],
            "phases": [
                {
                    "order": p.order,
                    "name": p.name,
                    "duration_minutes": p.duration_minutes,
                    "day": p.day,
                }
                for p in self.phases
            ],
            "monitored_services": [
                {
                    "service_id": s.service_id,
                    "team_id": s.team_id,
                    "name": s.name,
                    "host": s.host,
                    "port": s.port,
                    "protocol": s.protocol,
                    "http_path": s.http_path,
                    "check_interval": s.check_interval,
                    "penalty_per_failed_check": s.penalty_per_failed_check,
                }
                for s in self.monitored_services
            ],
            "reflection_options": {
                cat.value: [
                    {
                        "option_id": o.option_id,
                        "label": o.label,
                        "free_text": o.free_text,
                    }
                    for o in opts
                ]
                for cat, opts in self.reflection_options.items()
            },
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ExerciseDef":
        ex = cls(
            exercise_id=d["exercise_id"],
            name=d["name"],
            initial_score=int(d["initial_score"]),
            start_at=int(d["start_at"]),
            duration=int(d["duration"]),
            teams=[
                TeamDef(
                    team_id=t["team_id"],
                    display_name=t["display_name"],
                    auth_token_ref=t.get("auth_token_ref", ""),
                )
                for t in d.get("teams", [])
            ],
            phases=[
                PhaseDef(
                    order=int(p["order"]),
                    name=p["name"],
                    duration_minutes=int(p["duration_minutes"]),
                    day=int(p["day"]),
                )
                for p in d.get("phases", [])
            ],
            monitored_services=[
                ServiceDef(
                    service_id=s["service_id"],
                    team_id=s["team_id"],
                    name=s["name"],
                    host=s["host"],
                    port=int(s["port"]),
                    protocol=s.get("protocol", "tcp-connect"),
                    http_path=s.get("http_path", "/"),
                    check_interval=int(s.get("check_interval", 60)),
                    penalty_per_failed_check=int(s.get("penalty_per_failed_check", -100)),
                )
                for s in d.get("monitored_services", [])
            ],
            reflection_options={
                ScoreCategory(cat): [
                    ReflectionOption(
                        option_id=o["option_id"],
                        category=ScoreCategory(cat),
                        label=o["label"],
                        free_text=bool(o.get("free_text", False)),
                    )
                    for o in opts
                ]
                for cat, opts in d.get("reflection_options", {}).items()
            },
        )
        ex.validate()
        return ex


def events_from_ndjson(lines: Iterable[str]) -> list[ScoringEvent]:
    import json

    out = []
    for line in lines:
        line = line.strip()
        if line:
            out.append(ScoringEvent.from_dict(json.loads(line)))
    return out
