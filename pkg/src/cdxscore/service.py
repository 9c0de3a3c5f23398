"""The long-running exercise service.

Everything that happens during an exercise — scoring events, reflections,
telemetry batches, survey answers — lands in one append-only log and in the
in-memory state materialized from it. Authorization is token-based with
team- and role-scoped rights: the red team may only enter attack penalties,
the white team inject and user ratings, the green team assistance charges;
blue teams submit reflections, telemetry and survey answers and can only
ever see their own timeline. Organizers can do anything.

Reads are snapshot-consistent: every response is computed from a contiguous
prefix of the log.
"""

from __future__ import annotations

import hashlib
import json
import threading
import time
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Callable, Optional, Union

from fastapi import Body, FastAPI, Query, Request
from fastapi.responses import JSONResponse, PlainTextResponse

from .exercise import (
    ALLOWED_CATEGORIES,
    ExerciseDef,
    ScoreCategory,
    ScoringEvent,
    SourceRole,
)
from .eventlog import EventLog, RecoveryReport, read_records
from .scoring import Scoreboard, compute_scoreboard, validate_event
from .surveys import Answer, SurveyDef, SurveyError, stats_table, survey_stats, validate_answer
from .telemetry import (
    AuthorizationError,
    BatchResult,
    InteractionEvent,
    Reflection,
    ReflectionStore,
    TelemetryStore,
    ValidationError,
    build_heatmap,
    dot_index,
    reflection_counts,
)
from .timeline import TimelineModel, build_timeline, reflection_options


class Role(str, Enum):
    BLUE = "blue"
    RED = "red"
    WHITE = "white"
    GREEN = "green"
    ORGANIZER = "organizer"


# which categories each role may enter manual (or automatic) events for
SCORING_RIGHTS: dict[Role, frozenset[ScoreCategory]] = {
    Role.BLUE: frozenset(),
    Role.RED: frozenset({ScoreCategory.ATTACKS}),
    Role.WHITE: frozenset({ScoreCategory.INJECTS, ScoreCategory.USERS}),
    Role.GREEN: frozenset({ScoreCategory.ACCESS}),
    Role.ORGANIZER: frozenset(ScoreCategory),
}


@dataclass(frozen=True)
class Credential:
    credential_id: str
    token: str
    role: Role
    team_id: Optional[str] = None  # blue only


class ApiError(Exception):
    def __init__(self, status: int, detail):
        self.status = status
        self.detail = detail
        super().__init__(f"{status}: {detail}")


@dataclass
class ServiceConfig:
    exercise: ExerciseDef
    credentials: list[Credential] = field(default_factory=list)
    surveys: list[SurveyDef] = field(default_factory=list)
    timeline_visible_from: Optional[int] = None

    @classmethod
    def from_dict(cls, d: dict) -> "ServiceConfig":
        return cls(
            exercise=ExerciseDef.from_dict(d["exercise"]),
            credentials=[
                Credential(
                    credential_id=c["credential_id"],
                    token=c["token"],
                    role=Role(c["role"]),
                    team_id=c.get("team_id"),
                )
                for c in d.get("credentials", [])
            ],
            surveys=[SurveyDef.from_dict(s) for s in d.get("surveys", [])],
            timeline_visible_from=d.get("timeline_visible_from"),
        )

    @classmethod
    def from_file(cls, path: Union[str, Path]) -> "ServiceConfig":
        return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))

    def survey(self, survey_id: str) -> SurveyDef:
        for s in self.surveys:
            if s.survey_id == survey_id:
                return s
        raise ApiError(404, f"unknown survey: {survey_id!r}")

    def by_token(self, token: str) -> Optional[Credential]:
        for c in self.credentials:
            if c.token == token:
                return c
        return None


class ExerciseService:
    """Materialized state plus the append-only log behind it.

    All writes serialize through one lock; reads slice append-only lists,
    so every read sees the state of some log prefix.
    """

    def __init__(
        self,
        config: ServiceConfig,
        log_path: Optional[Union[str, Path]] = None,
        fsync: bool = False,
        clock: Callable[[], int] = lambda: int(time.time()),
    ):
        self.config = config
        self.exercise = config.exercise
        self.clock = clock
        self._write_lock = threading.Lock()
        self._events: list[ScoringEvent] = []
        self._dots: dict[str, tuple[str, ScoreCategory]] = {}
        self._reflections = ReflectionStore()
        self._telemetry = TelemetryStore()
        self._answers: list[Answer] = []
        self._log: Optional[EventLog] = None
        self._seq = 0
        self.recovery: Optional[RecoveryReport] = None
        if log_path is not None:
            report, records = read_records(log_path)
            for record in records:
                self._apply(record.kind, record.payload)
            self._seq = report.last_valid_seq
            self.recovery = report
            self._log = EventLog(log_path, fsync=fsync)

    # -- state materialization -------------------------------------------

    def _apply(self, kind: str, payload: dict) -> None:
        """Apply one already-validated log record to in-memory state."""
        if kind == "scoring_event":
            ev = ScoringEvent.from_dict(payload)
            self._events.append(ev)
            self._dots.update(dot_index([ev]))
        elif kind == "reflection":
            self._reflections.record(
                Reflection.from_dict(payload), self._dots, self.exercise
            )
        elif kind == "telemetry_batch":
            self._telemetry.record_interactions(
                InteractionEvent.from_dict(d) for d in payload["events"]
            )
        elif kind == "survey_answer":
            self._answers.append(Answer.from_dict(payload))
        else:
            raise ValueError(f"unknown record kind {kind!r}")

    def _commit(self, kind: str, payload: dict) -> int:
        """Log first, then materialize; returns the sequence number."""
        if self._log is not None:
            self._seq = self._log.append(kind, payload).seq
        else:
            self._seq += 1
        return self._seq

    def state_fingerprint(self) -> str:
        """Stable hash of the materialized state."""
        body = {
            "events": [ev.to_dict() for ev in self._events],
            "reflections": [r.to_dict() for r in self._reflections.all_records()],
            "telemetry": [ev.to_dict() for ev in self._telemetry.events],
            "answers": [a.to_dict() for a in self._answers],
        }
        blob = json.dumps(body, sort_keys=True).encode("utf-8")
        return hashlib.sha256(blob).hexdigest()

    # -- authentication ----------------------------------------------------

    def authenticate(self, token: Optional[str]) -> Optional[Credential]:
        """None -> anonymous; unknown token -> 401."""
        if token is None:
            return None
        cred = self.config.by_token(token)
        if cred is None:
            raise ApiError(401, "unknown credential")
        return cred

    @staticmethod
    def _require(cred: Optional[Credential]) -> Credential:
        if cred is None:
            raise ApiError(401, "authentication required")
        return cred

    # -- write endpoints ---------------------------------------------------

    def ingest_scoring_event(
        self, cred: Optional[Credential], payload: dict
    ) -> tuple[int, ScoringEvent]:
        cred = self._require(cred)
        now = self.clock()
        data = dict(payload)
        data.setdefault("exercise_id", self.exercise.exercise_id)
        data.setdefault("occurred_at", now)
        data.setdefault("recorded_at", max(now, int(data["occurred_at"])))
        with self._write_lock:
            data.setdefault("event_id", f"man-{len(self._events) + 1:05d}")
            try:
                event = ScoringEvent.from_dict(data)
            except (KeyError, ValueError, TypeError) as e:
                raise ApiError(422, f"malformed event: {e}")
            if event.category not in SCORING_RIGHTS[cred.role]:
                raise ApiError(
                    403,
                    f"role {cred.role.value} may not score {event.category.value}",
                )
            result = validate_event(event, self.exercise)
            if not result.ok:
                raise ApiError(422, {"violations": result.violations})
            if any(ev.event_id == event.event_id for ev in self._events):
                raise ApiError(422, f"duplicate event_id {event.event_id!r}")
            seq = self._commit("scoring_event", event.to_dict())
            self._apply("scoring_event", event.to_dict())
        return seq, event

    def post_reflection(self, cred: Optional[Credential], payload: dict) -> Reflection:
        cred = self._require(cred)
        if cred.role != Role.BLUE:
            raise ApiError(403, "only blue team members submit reflections")
        data = dict(payload)
        data.setdefault("team_id", cred.team_id)
        data.setdefault("submitted_at", self.clock())
        data.setdefault(
            "reflection_id", f"r-{data.get('learner_id', 'anon')}-{data.get('event_id')}"
        )
        try:
            reflection = Reflection.from_dict(data)
        except (KeyError, ValueError, TypeError) as e:
            raise ApiError(422, f"malformed reflection: {e}")
        if reflection.team_id != cred.team_id:
            raise ApiError(403, "reflection team does not match credential")
        with self._write_lock:
            try:
                # validate against a copy first: nothing hits the log unless valid
                probe = ReflectionStore()
                probe.record(reflection, self._dots, self.exercise)
            except AuthorizationError as e:
                raise ApiError(403, str(e))
            except ValidationError as e:
                raise ApiError(422, str(e))
            self._commit("reflection", reflection.to_dict())
            self._apply("reflection", reflection.to_dict())
        return reflection

    def post_telemetry(self, cred: Optional[Credential], events: list[dict]) -> BatchResult:
        from .telemetry import validate_interaction

        cred = self._require(cred)
        if cred.role != Role.BLUE:
            raise ApiError(403, "only blue team members submit telemetry")
        parsed: list[InteractionEvent] = []
        rejected: list[tuple[int, str]] = []  # indices refer to the posted batch
        for i, d in enumerate(events):
            try:
                ev = InteractionEvent.from_dict(d)
            except (KeyError, ValueError, TypeError) as e:
                rejected.append((i, f"malformed: {e}"))
                continue
            if ev.team_id != cred.team_id:
                raise ApiError(403, "telemetry team does not match credential")
            reason = validate_interaction(ev)
            if reason is not None:
                rejected.append((i, reason))
                continue
            parsed.append(ev)
        with self._write_lock:
            result = self._telemetry.record_interactions(parsed)
            result.rejected = rejected
            if result.accepted:
                # only the accepted events are persisted
                stored = self._telemetry.events[-result.accepted:]
                self._commit(
                    "telemetry_batch", {"events": [ev.to_dict() for ev in stored]}
                )
        return result

    def post_answers(self, cred: Optional[Credential], survey_id: str,
                     answers: list[dict]) -> int:
        cred = self._require(cred)
        if cred.role != Role.BLUE:
            raise ApiError(403, "only blue team members submit survey answers")
        survey = self.config.survey(survey_id)
        parsed = []
        for i, d in enumerate(answers):
            data = dict(d)
            data.setdefault("survey_id", survey_id)
            if data.get("survey_id") != survey_id:
                raise ApiError(422, f"answer {i}: survey_id mismatch")
            if data.get("team_id") is not None and data["team_id"] != cred.team_id:
                raise ApiError(403, f"answer {i}: team does not match credential")
            try:
                answer = Answer.from_dict(data)
                validate_answer(answer, survey)
            except SurveyError as e:
                raise ApiError(422, f"answer {i}: {e}")
            parsed.append(answer)
        with self._write_lock:
            for answer in parsed:
                self._commit("survey_answer", answer.to_dict())
                self._apply("survey_answer", answer.to_dict())
        return len(parsed)

    # -- read endpoints ----------------------------------------------------

    def _events_snapshot(self) -> list[ScoringEvent]:
        events = self._events
        return events[: len(events)]

    def scoreboard(self, as_of: Optional[int] = None) -> Scoreboard:
        return compute_scoreboard(self._events_snapshot(), self.exercise, as_of)

    def timeline(self, cred: Optional[Credential], team_id: str) -> TimelineModel:
        cred = self._require(cred)
        if team_id not in self.exercise.team_ids:
            raise ApiError(404, f"unknown team: {team_id!r}")
        if cred.role == Role.BLUE:
            if cred.team_id != team_id:
                raise ApiError(403, "blue teams may only view their own timeline")
            visible_from = self.config.timeline_visible_from
            if visible_from is not None and self.clock() < visible_from:
                raise ApiError(403, "the timeline is not open yet")
        elif cred.role != Role.ORGANIZER:
            raise ApiError(403, "timelines are visible to their team and organizers")
        return build_timeline(self._events_snapshot(), self.exercise, team_id)

    def reflection_stats(self, cred: Optional[Credential]) -> dict:
        self._require_organizer(cred)
        counts = reflection_counts(self._reflections.latest(), self._dots)
        return counts.to_dict()

    def survey_statistics(self, cred: Optional[Credential], survey_id: str,
                          as_text: bool = False):
        self._require_organizer(cred)
        survey = self.config.survey(survey_id)
        answers = self._answers[: len(self._answers)]
        if as_text:
            return stats_table(survey, answers, self.exercise.team_ids)
        return survey_stats(survey, answers, self.exercise.team_ids)

    def heatmap(self, cred: Optional[Credential], team_id: str,
                cols: int, rows: int) -> dict:
        self._require_organizer(cred)
        if team_id not in self.exercise.team_ids:
            raise ApiError(404, f"unknown team: {team_id!r}")
        events = [ev for ev in self._telemetry.events if ev.team_id == team_id]
        try:
            hm = build_heatmap(events, (cols, rows))
        except ValidationError as e:
            raise ApiError(422, str(e))
        return hm.to_dict()

    def _require_organizer(self, cred: Optional[Credential]) -> None:
        cred = self._require(cred)
        if cred.role != Role.ORGANIZER:
            raise ApiError(403, "organizer credential required")

    def exercise_info(self, cred: Optional[Credential]) -> dict:
        self._require(cred)
        options = {
            cat.value: [
                {"option_id": o.option_id, "label": o.label, "free_text": o.free_text}
                for o in reflection_options(cat, self.exercise)
            ]
            for cat in ScoreCategory
            if cat != ScoreCategory.SERVICES
        }
        return {
            "exercise": self.exercise.to_dict(),
            "reflection_options": options,
            "surveys": [s.to_dict() for s in self.config.surveys],
            "timeline_visible_from": self.config.timeline_visible_from,
        }

    def close(self) -> None:
        if self._log is not None:
            self._log.close()


def recover(log_path: Union[str, Path], config: ServiceConfig) -> ExerciseService:
    """Rebuild a service purely from its log (read-only; no appender opened)."""
    service = ExerciseService(config, log_path=None)
    report, records = read_records(log_path)
    for record in records:
        service._apply(record.kind, record.payload)
    service.recovery = report
    return service


# ---------------------------------------------------------------------------
# HTTP layer
# ---------------------------------------------------------------------------


def create_app(service: ExerciseService) -> FastAPI:
    app = FastAPI(title="cdxscore", version="0.1.0")
    app.state.service = service

    def credential(request: Request) -> Optional[Credential]:
        header = request.headers.get("authorization")
        if header is None:
            return None
        if not header.lower().startswith("bearer "):
            raise ApiError(401, "expected a bearer token")
        return service.authenticate(header[7:].strip())

    @app.exception_handler(ApiError)
    async def _api_error(request: Request, exc: ApiError):
        return JSONResponse(status_code=exc.status, content={"detail": exc.detail})

    @app.get("/api/exercise")
    def get_exercise(request: Request):
        return service.exercise_info(credential(request))

    @app.get("/api/me")
    def get_me(request: Request):
        cred = credential(request)
        if cred is None:
            raise ApiError(401, "authentication required")
        return {"credential_id": cred.credential_id, "role": cred.role.value,
                "team_id": cred.team_id}

    @app.get("/api/scoreboard")
    def get_scoreboard(request: Request, as_of: Optional[int] = Query(default=None)):
        credential(request)  # anonymous is fine, but a bad token is still a 401
        return service.scoreboard(as_of).to_dict()

    @app.get("/api/teams/{team_id}/timeline")
    def get_timeline(team_id: str, request: Request):
        return service.timeline(credential(request), team_id).to_dict()

    @app.post("/api/events", status_code=201)
    def post_event(request: Request, payload: dict = Body(...)):
        seq, event = service.ingest_scoring_event(credential(request), payload)
        return {"sequence_no": seq, "event_id": event.event_id}

    @app.post("/api/reflections")
    def post_reflection(request: Request, payload: dict = Body(...)):
        reflection = service.post_reflection(credential(request), payload)
        return {"reflection_id": reflection.reflection_id, "stored": True}

    @app.post("/api/telemetry")
    def post_telemetry(request: Request, events: list[dict] = Body(...)):
        result = service.post_telemetry(credential(request), events)
        body = {
            "accepted": result.accepted,
            "duplicates": result.duplicates,
            "rejected": [{"index": i, "reason": r} for i, r in result.rejected],
        }
        if result.rejected:
            return JSONResponse(status_code=422, content=body)
        return body

    @app.post("/api/surveys/{survey_id}/answers")
    def post_answers(survey_id: str, request: Request, answers: list[dict] = Body(...)):
        stored = service.post_answers(credential(request), survey_id, answers)
        return {"stored": stored}

    @app.get("/api/surveys/{survey_id}")
    def get_survey(survey_id: str, request: Request):
        cred = credential(request)
        if cred is None:
            raise ApiError(401, "authentication required")
        return service.config.survey(survey_id).to_dict()

    @app.get("/api/surveys/{survey_id}/stats")
    def get_survey_stats(survey_id: str, request: Request,
                         format: str = Query(default="json")):
        cred = credential(request)
        if format == "text":
            return PlainTextResponse(
                service.survey_statistics(cred, survey_id, as_text=True)
            )
        return service.survey_statistics(cred, survey_id)

    @app.get("/api/reflections/stats")
    def get_reflection_stats(request: Request):
        return service.reflection_stats(credential(request))

    @app.get("/api/teams/{team_id}/heatmap")
    def get_heatmap(team_id: str, request: Request,
                    cols: int = Query(default=64), rows: int = Query(default=36)):
        return service.heatmap(credential(request), team_id, cols, rows)

    return app
