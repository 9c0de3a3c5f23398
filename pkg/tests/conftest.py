from __future__ import annotations

import random

import pytest

from cdxscore import demo
from cdxscore.exercise import ScoreCategory, ScoringEvent, SourceRole
from cdxscore.scenario import all_events_of

# legal manual (category, source) pairs plus the automatic one
EVENT_SHAPES = [
    (ScoreCategory.ATTACKS, SourceRole.RED),
    (ScoreCategory.INJECTS, SourceRole.WHITE),
    (ScoreCategory.USERS, SourceRole.WHITE),
    (ScoreCategory.ACCESS, SourceRole.GREEN),
    (ScoreCategory.SERVICES, SourceRole.AUTO),
]


@pytest.fixture(scope="session")
def demo_script():
    return demo.build_demo_scenario()


@pytest.fixture(scope="session")
def exercise(demo_script):
    return demo_script.exercise


@pytest.fixture(scope="session")
def demo_events(demo_script):
    return all_events_of(demo_script)


@pytest.fixture(scope="session")
def demo_reflections():
    return demo.build_demo_reflections()


@pytest.fixture(scope="session")
def demo_telemetry():
    return demo.build_demo_telemetry()


@pytest.fixture(scope="session")
def demo_answers():
    return demo.build_demo_answers()


def make_random_log(exercise, rng: random.Random, size: int) -> list[ScoringEvent]:
    """A random but individually valid event log for the given exercise."""
    start, end = exercise.window()
    events = []
    for i in range(size):
        category, source = rng.choice(EVENT_SHAPES)
        points = rng.choice([p for p in range(-2000, 2001, 25) if p != 0])
        if category == ScoreCategory.SERVICES:
            points = -abs(points)
        occurred = rng.randrange(start, end + 1)
        events.append(
            ScoringEvent(
                event_id=f"rnd-{i:05d}",
                exercise_id=exercise.exercise_id,
                team_id=rng.choice(exercise.team_ids),
                category=category,
                source=source,
                points=points,
                occurred_at=occurred,
                recorded_at=occurred + rng.randrange(0, 600),
                title=f"random event {i}",
            )
        )
    return events


@pytest.fixture
def random_log_factory(exercise):
    def factory(seed: int, size: int = 60):
        return make_random_log(exercise, random.Random(seed), size)

    return factory
