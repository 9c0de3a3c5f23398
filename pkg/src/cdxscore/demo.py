"""The bundled demo exercise and every fixture derived from it.

One constructed six-hour exercise for five blue teams with 24 manual
objectives (12 attacks, 6 communication injects, 4 user injects, 2
assistance requests) plus scripted service outages. The numbers are chosen
so the derived artifacts land on well-known reference values: the final
scoreboard, the per-team reflection counts, the telemetry session extremes
and the survey averages. Everything here is deterministic; regenerating the
fixtures always produces byte-identical files.
"""

from __future__ import annotations

import json
import random
from pathlib import Path

from .exercise import ExerciseDef, PhaseDef, ServiceDef, TeamDef
from .scenario import ScenarioEntry, ScenarioScript, manual_events_of
from .surveys import Answer, SurveyDef, SurveyItem
from .telemetry import InteractionEvent, InteractionKind, Reflection

EXERCISE_ID = "cdx-rail-2017"
EXERCISE_START = 1_495_609_200  # 2017-05-24 07:00:00 UTC
EXERCISE_DURATION = 21_600  # 6 hours
EXERCISE_END = EXERCISE_START + EXERCISE_DURATION
# timeline exploration opens after the post-exercise survey (5 min) and break (25 min)
TIMELINE_OPENS_AT = EXERCISE_END + 30 * 60

TEAM_IDS = ("T1", "T2", "T3", "T4", "T5")
DEMO_SEED = 20170524


def build_demo_exercise() -> ExerciseDef:
    ex = ExerciseDef(
        exercise_id=EXERCISE_ID,
        name="Critical Infrastructure Defence Exercise 2017",
        initial_score=100_000,
        start_at=EXERCISE_START,
        duration=EXERCISE_DURATION,
        teams=[TeamDef(tid, tid, f"cred-{tid.lower()}") for tid in TEAM_IDS],
        phases=[
            PhaseDef(1, "Infrastructure familiarization", 180, 1),
            PhaseDef(2, "Live exercise", 360, 2),
            PhaseDef(3, "Post-exercise survey", 5, 2),
            PhaseDef(4, "Break", 25, 2),
            PhaseDef(5, "Timeline exploration", 10, 2),
            PhaseDef(6, "Timeline survey", 5, 2),
            PhaseDef(7, "Debriefing", 15, 2),
        ],
        monitored_services=[
            ServiceDef("t1-web", "T1", "T1 public web", "10.0.1.10", 80, "http-get",
                       penalty_per_failed_check=-250),
            ServiceDef("t1-dns", "T1", "T1 DNS", "10.0.1.53", 53,
                       penalty_per_failed_check=-157),
            ServiceDef("t2-web", "T2", "T2 public web", "10.0.2.10", 80, "http-get",
                       penalty_per_failed_check=-240),
            ServiceDef("t3-web", "T3", "T3 public web", "10.0.3.10", 80, "http-get",
                       penalty_per_failed_check=-237),
            ServiceDef("t3-mail", "T3", "T3 mail relay", "10.0.3.25", 25,
                       penalty_per_failed_check=-12),
            ServiceDef("t4-web", "T4", "T4 public web", "10.0.4.10", 80, "http-get",
                       penalty_per_failed_check=-274),
            ServiceDef("t5-web", "T5", "T5 public web", "10.0.5.10", 80, "http-get",
                       penalty_per_failed_check=-210),
        ],
    )
    ex.validate()
    return ex


# ---------------------------------------------------------------------------
# Scenario: 24 manual objectives, per-team outcomes, scripted outages
# ---------------------------------------------------------------------------

# (objective, base offset, recording delay, title)
_ATTACKS = [
    ("A01", 2000, 240, "Phishing campaign"),
    ("A02", 3500, 300, "Brute force on VPN gateway"),
    ("A03", 5000, 180, "Web portal defacement"),
    ("A04", 6500, 360, "SQL injection in customer portal"),
    ("A05", 7700, 240, "Privilege escalation on file server"),
    ("A06", 9000, 300, "Ransomware dropper detected"),
    ("A07", 10500, 900, "Data exfiltration over DNS"),
    ("A08", 12000, 420, "Lateral movement into office segment"),
    ("A09", 13500, 240, "Stolen administrator credentials"),
    ("A10", 15500, 300, "Persistence via scheduled task"),
    ("A11", 17500, 180, "Mail relay abuse"),
    ("A12", 19500, 360, "Firewall rule tampering"),
]

_ATTACK_POINTS = {
    "T1": [-600, -800, -500, -900, -700, -650, -750, -800, -550, -700, -900, -650],
    "T2": [-900, -850, -1000, -800, -950, -900, -875, -900, -850, -925, -900, -900],
    "T3": [-1000] * 12,
    "T4": [-900, -950, -900, -1000, -850, -950, -900, -950, -900, -850, -950, -900],
    "T5": [-400, -450, -350, -500, -400, -420, -380, -450, -400, -430, -410, -410],
}

# (objective, base offset, title); objectives rated twice model a promptness
# rating followed by a quality rating
_INJECT_SCHEDULE = [
    ("C01", 2760, "Media inquiry"),
    ("C02", 5520, "Situation report for the coordinator"),
    ("C02", 6720, "Situation report, quality follow-up"),
    ("C03", 8280, "Law enforcement data request"),
    ("C04", 11040, "Press statement review"),
    ("C05", 13800, "Second situation report"),
    ("C05", 15000, "Second situation report, quality follow-up"),
    ("C06", 16560, "Partner CERT notification"),
]
_INJECT_SCHEDULE_T3 = [
    ("C01", 2760, "Media inquiry"),
    ("C02", 5520, "Situation report for the coordinator"),
    ("C03", 8280, "Law enforcement data request"),
    ("C03", 9480, "Law enforcement request, quality follow-up"),
    ("C04", 11040, "Press statement review"),
    ("C05", 13800, "Second situation report"),
    ("C06", 16560, "Partner CERT notification"),
]

_INJECT_POINTS = {
    "T1": [1200, 1500, 900, 1100, 1300, 1000, 1200, 800],
    "T2": [800, 825, 750, 800, 850, 800, 775, 825],
    "T3": [350, 400, 300, 375, 350, 400, 300],
    "T4": [850, 800, 825, 850, 800, 825, 850, 850],
    "T5": [500, 400, 450, 500, 400, 450, 400, 500],
}

_USERS = [
    ("U01", 4260, "Webmail access problem"),
    ("U02", 9840, "Password reset request"),
    ("U03", 15120, "Workstation cleanup for a manager"),
    ("U04", 18000, "Shared drive permissions"),
]

_USER_POINTS = {
    "T1": [-300, -400, -200, -200],
    "T2": [-1000, -1000, -1000, -1000],
    "T3": [-600, -600, -500],  # U04 went unrated for T3
    "T4": [500, -500],  # only U01/U02; good and bad handling cancel out
    "T5": [-100, -100, -100, -100],
}

# (objective, team, offset, points, title)
_ASSISTANCE = [
    ("G01", "T4", 7200, -2000, "Assistance: mail service restored by operators"),
    ("G01", "T3", 8400, -5000, "Assistance: web server reverted to clean state"),
    ("G02", "T4", 16800, -2000, "Assistance: temporary remote access granted"),
    ("G02", "T3", 18600, -4500, "Assistance: temporary remote access granted"),
]

# (service, offset, duration) — all aligned to the 60 s check interval
_OUTAGES = [
    ("t1-web", 3600, 1200),
    ("t1-web", 10800, 720),
    ("t1-dns", 14400, 60),
    ("t2-web", 3000, 2400),
    ("t2-web", 9000, 1800),
    ("t2-web", 15000, 480),
    ("t3-web", 3600, 1800),
    ("t3-web", 12600, 1800),
    ("t3-mail", 7200, 120),
    ("t4-web", 2400, 3000),
    ("t4-web", 8400, 1800),
    ("t4-web", 16200, 780),
    ("t5-web", 4800, 1200),
    ("t5-web", 12000, 1020),
]


def build_demo_scenario() -> ScenarioScript:
    exercise = build_demo_exercise()
    entries: list[ScenarioEntry] = []

    for i, (obj, base, delay, title) in enumerate(_ATTACKS):
        for t, team in enumerate(TEAM_IDS):
            entries.append(
                ScenarioEntry(
                    offset=base + 60 * t,
                    kind="attack",
                    team_id=team,
                    objective_id=obj,
                    points=_ATTACK_POINTS[team][i],
                    title=title,
                    description=f"Attack objective {obj}: impact assessed for {team}.",
                    recording_delay=delay,
                )
            )

    for team in TEAM_IDS:
        schedule = _INJECT_SCHEDULE_T3 if team == "T3" else _INJECT_SCHEDULE
        t = TEAM_IDS.index(team)
        for i, (obj, base, title) in enumerate(schedule):
            entries.append(
                ScenarioEntry(
                    offset=base + 30 * t,
                    kind="communication_inject",
                    team_id=team,
                    objective_id=obj,
                    points=_INJECT_POINTS[team][i],
                    title=title,
                    description=f"Response of {team} to inject {obj} rated.",
                    recording_delay=60,
                )
            )

    for team in TEAM_IDS:
        t = TEAM_IDS.index(team)
        points = _USER_POINTS[team]
        for i, (obj, base, title) in enumerate(_USERS[: len(points)]):
            entries.append(
                ScenarioEntry(
                    offset=base + 45 * t,
                    kind="user_inject",
                    team_id=team,
                    objective_id=obj,
                    points=points[i],
                    title=title,
                    description=f"Handling of simulated user request {obj} rated.",
                    recording_delay=60,
                )
            )

    for obj, team, offset, points, title in _ASSISTANCE:
        entries.append(
            ScenarioEntry(
                offset=offset,
                kind="assistance_request",
                team_id=team,
                objective_id=obj,
                points=points,
                title=title,
                description="Operator assistance charged against the team score.",
                recording_delay=30,
            )
        )

    for service_id, offset, duration in _OUTAGES:
        team = next(
            s.team_id for s in exercise.monitored_services if s.service_id == service_id
        )
        entries.append(
            ScenarioEntry(
                offset=offset,
                kind="outage_window",
                team_id=team,
                service_id=service_id,
                duration=duration,
                title=f"{service_id} outage",
            )
        )

    entries.sort(key=lambda e: e.offset)
    script = ScenarioScript(exercise=exercise, entries=entries, seed=DEMO_SEED)
    problems = script.validate()
    if problems:
        raise AssertionError(f"demo scenario is invalid: {problems}")
    return script


def team_dot_ids(script: ScenarioScript) -> dict[str, list[str]]:
    """Manual event ids per team (the dots each team will see)."""
    dots: dict[str, list[str]] = {tid: [] for tid in script.exercise.team_ids}
    for ev in manual_events_of(script):
        dots[ev.team_id].append(ev.event_id)
    return dots


# ---------------------------------------------------------------------------
# Reflections: 7 learners from four teams, 52 distinct (learner, dot) answers
# ---------------------------------------------------------------------------

_REFLECTION_PLAN = [
    # (learner, team, objectives reflected on)
    ("t2-l1", "T2", ["a01", "a02", "a03", "a04", "u01", "u02", "u03", "u04"]),
    ("t2-l2", "T2", ["a05", "a06", "a07", "u01"]),
    ("t3-l1", "T3", ["a01", "a02", "a03", "a04", "a05", "a06",
                     "u01", "u02", "u03", "c01", "c02", "c03", "c04", "g01", "g02"]),
    ("t3-l2", "T3", ["a07", "a08", "a09", "a10", "a11", "a12",
                     "u01", "u02", "u03", "c05", "g01", "g02"]),
    ("t3-l3", "T3", ["a01", "u01"]),
    ("t4-l1", "T4", ["a01", "a02", "a03", "a04", "a05", "g01", "g02"]),
    ("t5-l1", "T5", ["a03", "u02", "c01", "c04"]),
]

_OPTION_CYCLE = {
    "a": ("attack-recognized", "attack-not-recognized"),
    "u": ("user-handled", "user-deprioritized"),
    "c": ("inject-answered", "inject-no-time"),
    "g": ("assist-necessary", "assist-tradeoff"),
}


def build_demo_reflections() -> list[Reflection]:
    reflections = []
    at = TIMELINE_OPENS_AT
    for learner, team, objectives in _REFLECTION_PLAN:
        for i, obj in enumerate(objectives):
            at += 7
            options = _OPTION_CYCLE[obj[0]]
            reflections.append(
                Reflection(
                    reflection_id=f"r-{learner}-{obj}",
                    event_id=f"{obj}-{team.lower()}",
                    team_id=team,
                    learner_id=learner,
                    option_id=options[i % 2],
                    submitted_at=at,
                )
            )
    assert len(reflections) == 52
    return reflections


# ---------------------------------------------------------------------------
# Interaction telemetry: 18 sessions, 2,994 events, durations 82 s .. 507 s
# ---------------------------------------------------------------------------

# (learner, team, duration seconds, event count, viewport)
_SESSION_PLAN = [
    ("t1-l1", "T1", 507, 320, (1920, 1080)),
    ("t1-l2", "T1", 441, 280, (1920, 1080)),
    ("t1-l3", "T1", 390, 240, (1366, 768)),
    ("t1-l4", "T1", 365, 220, (1920, 1080)),
    ("t2-l1", "T2", 284, 160, (1920, 1080)),
    ("t2-l2", "T2", 210, 120, (1920, 1080)),
    ("t2-l3", "T2", 198, 110, (1366, 768)),
    ("t3-l1", "T3", 310, 190, (1920, 1080)),
    ("t3-l2", "T3", 255, 150, (1920, 1080)),
    ("t3-l3", "T3", 240, 140, (1920, 1080)),
    ("t3-l4", "T3", 189, 100, (1366, 768)),
    ("t4-l1", "T4", 230, 130, (1920, 1080)),
    ("t4-l2", "T4", 205, 110, (1920, 1080)),
    ("t4-l3", "T4", 82, 40, (1920, 1080)),
    ("t5-l1", "T5", 320, 180, (1920, 1080)),
    ("t5-l2", "T5", 300, 170, (1920, 1080)),
    ("t5-l3", "T5", 276, 170, (1366, 768)),
    ("t5-l4", "T5", 262, 164, (1920, 1080)),
]


def build_demo_telemetry() -> list[InteractionEvent]:
    rng = random.Random(DEMO_SEED)
    dots = team_dot_ids(build_demo_scenario())
    events: list[InteractionEvent] = []
    for idx, (learner, team, duration, count, viewport) in enumerate(_SESSION_PLAN):
        w, h = viewport
        session_id = f"sess-{learner}"
        t0 = (TIMELINE_OPENS_AT + idx * 4) * 1000 + idx  # staggered starts
        offsets = [0] + sorted(rng.sample(range(1, duration * 1000), count - 2))
        offsets.append(duration * 1000)
        for off in offsets:
            roll = rng.random()
            if roll < 0.80 or off in (0, duration * 1000):
                kind, target = InteractionKind.MOVE, None
            elif roll < 0.95:
                kind, target = InteractionKind.HOVER, rng.choice(dots[team])
            else:
                kind, target = InteractionKind.CLICK, rng.choice(dots[team])
            events.append(
                InteractionEvent(
                    session_id=session_id,
                    learner_id=learner,
                    team_id=team,
                    kind=kind,
                    x=rng.randrange(0, w),
                    y=rng.randrange(0, h),
                    viewport=viewport,
                    at=t0 + off,
                    target=target,
                )
            )
    assert len(events) == 2994
    return events


# ---------------------------------------------------------------------------
# Surveys
# ---------------------------------------------------------------------------

POST_EXERCISE_SURVEY = SurveyDef(
    survey_id="post-exercise",
    title="Post-exercise survey",
    items=(
        SurveyItem("E1", "I had the knowledge and skills this exercise required."),
        SurveyItem("E2", "The exercise was difficult for me."),
        SurveyItem("E3", "The exercise was well organized."),
        SurveyItem("E4", "The exercise was useful for my professional development."),
    ),
)

TIMELINE_SURVEY = SurveyDef(
    survey_id="timeline",
    title="Score timeline survey",
    items=(
        SurveyItem("F1", "The score timeline shown after the exercise gave my team useful feedback."),
        SurveyItem("F2", "Any comments on the score timeline?", kind="free_text"),
    ),
)

# identified respondents per team (the rest answered anonymously)
_IDENTIFIED = {"T1": 4, "T2": 4, "T3": 1, "T4": 4, "T5": 3}

# per item: per-team identified values in learner order, then anonymous values
_POST_EXERCISE_VALUES = {
    "E1": ({"T1": [3, 3, 3, 3], "T2": [4, 4, 4, 3], "T3": [2], "T4": [3, 3, 2, 2],
            "T5": [3, 3, 2]}, [4, 4, 3, 3]),
    "E2": ({"T1": [3, 3, 3, 3], "T2": [4, 3, 3, 3], "T3": [5], "T4": [5, 4, 4, 4],
            "T5": [4, 4, 4]}, [5, 5, 4, 3]),
    "E3": ({"T1": [4, 3, 3, 3], "T2": [3, 3, 3, 2], "T3": [5], "T4": [4, 4, 4, 4],
            "T5": [4, 3, 3]}, [5, 5, 5, 5]),
    "E4": ({"T1": [4, 4, 3, 3], "T2": [3, 3, 3, 2], "T3": [5], "T4": [5, 5, 4, 4],
            "T5": [4, 4, 4]}, [5, 5, 4, 3]),
}

# timeline survey: T5 did not respond at all; 13 identified answers
_F1_VALUES = {"T1": [1, 4], "T2": [2, 3, 4, 4], "T3": [3, 4, 4], "T4": [4, 4, 4, 5]}

_F2_COMMENTS = [
    ("T2", "t2-l1", "Several attack penalties show up on the timeline noticeably "
                    "later than the moment the attack actually hit us."),
    ("T1", "t1-l1", "More detail per event would help, e.g. which host was affected "
                    "and how the points were decided."),
    ("T4", "t4-l1", "Please attach a longer description to every penalty, not just "
                    "a short title."),
    ("T3", "t3-l1", "It would be useful to see how each incident unfolded, not only "
                    "the final rating."),
]


def build_demo_answers() -> list[Answer]:
    answers: list[Answer] = []
    for item_id, (team_values, anon_values) in _POST_EXERCISE_VALUES.items():
        for team, values in team_values.items():
            assert len(values) == _IDENTIFIED[team]
            for i, value in enumerate(values, start=1):
                answers.append(
                    Answer(
                        survey_id="post-exercise",
                        item_id=item_id,
                        value=value,
                        respondent_id=f"{team.lower()}-l{i}",
                        team_id=team,
                    )
                )
        for value in anon_values:
            answers.append(Answer(survey_id="post-exercise", item_id=item_id, value=value))

    for team, values in _F1_VALUES.items():
        for i, value in enumerate(values, start=1):
            answers.append(
                Answer(
                    survey_id="timeline",
                    item_id="F1",
                    value=value,
                    respondent_id=f"{team.lower()}-l{i}",
                    team_id=team,
                )
            )
    for team, learner, text in _F2_COMMENTS:
        answers.append(
            Answer(
                survey_id="timeline",
                item_id="F2",
                value=text,
                respondent_id=learner,
                team_id=team,
            )
        )
    return answers


# ---------------------------------------------------------------------------
# Service configuration and fixture export
# ---------------------------------------------------------------------------


def build_demo_credentials() -> list[dict]:
    creds = [
        {
            "credential_id": f"cred-{tid.lower()}",
            "token": f"tok-blue-{tid.lower()}",
            "role": "blue",
            "team_id": tid,
        }
        for tid in TEAM_IDS
    ]
    creds += [
        {"credential_id": "cred-red", "token": "tok-red", "role": "red"},
        {"credential_id": "cred-white", "token": "tok-white", "role": "white"},
        {"credential_id": "cred-green", "token": "tok-green", "role": "green"},
        {"credential_id": "cred-org", "token": "tok-organizer", "role": "organizer"},
    ]
    return creds


def build_demo_config() -> dict:
    return {
        "exercise": build_demo_exercise().to_dict(),
        "credentials": build_demo_credentials(),
        "timeline_visible_from": TIMELINE_OPENS_AT,
        "surveys": [POST_EXERCISE_SURVEY.to_dict(), TIMELINE_SURVEY.to_dict()],
    }


def bundled_scenario_path() -> Path:
    return Path(__file__).parent / "data" / "demo_scenario.json"


def write_fixtures(out_dir: Path) -> list[Path]:
    """Regenerate every golden fixture file under ``out_dir``."""
    from .eventlog import EventLog
    from .scenario import all_events_of, probe_schedule

    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    script = build_demo_scenario()
    written = []

    def dump_json(name: str, payload) -> None:
        path = out_dir / name
        path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")
        written.append(path)

    def dump_ndjson(name: str, rows) -> None:
        path = out_dir / name
        with path.open("w", encoding="utf-8") as fh:
            for row in rows:
                fh.write(json.dumps(row, sort_keys=True) + "\n")
        written.append(path)

    dump_json("demo_scenario.json", script.to_dict())
    dump_json("demo_config.json", build_demo_config())
    dump_ndjson("scoring_events.ndjson", (ev.to_dict() for ev in all_events_of(script)))
    dump_ndjson("probe_results.ndjson", (r.to_dict() for r in probe_schedule(script)))
    dump_json("reflections.json", [r.to_dict() for r in build_demo_reflections()])
    dump_ndjson("telemetry.ndjson", (ev.to_dict() for ev in build_demo_telemetry()))
    dump_json("survey_answers.json", [a.to_dict() for a in build_demo_answers()])

    log_path = out_dir / "service_log.ndjson"
    if log_path.exists():
        log_path.unlink()
    # fixed write timestamp keeps regenerated fixtures byte-identical
    log = EventLog(log_path, fsync=False, clock=lambda: TIMELINE_OPENS_AT * 1000)
    for record in demo_log_payloads():
        log.append(*record)
    log.close()
    written.append(log_path)
    return written


def demo_log_payloads() -> list[tuple[str, dict]]:
    """The full service event log as (kind, payload) pairs, ingest order."""
    from .scenario import all_events_of

    script = build_demo_scenario()
    records: list[tuple[str, dict]] = [
        ("scoring_event", ev.to_dict()) for ev in all_events_of(script)
    ]
    records += [("reflection", r.to_dict()) for r in build_demo_reflections()]

    telemetry = build_demo_telemetry()
    by_session: dict[str, list[InteractionEvent]] = {}
    for ev in telemetry:
        by_session.setdefault(ev.session_id, []).append(ev)
    for session_id in sorted(by_session):
        records.append(
            ("telemetry_batch", {"events": [ev.to_dict() for ev in by_session[session_id]]})
        )
    records += [("survey_answer", a.to_dict()) for a in build_demo_answers()]
    return records
