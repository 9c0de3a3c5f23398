from __future__ import annotations

import pytest

from cdxscore.exercise import (
    ReflectionOption,
    ScoreCategory,
    ScoringEvent,
    SourceRole,
    UnknownTeamError,
)
from cdxscore.scoring import compute_scoreboard, score_at
from cdxscore.timeline import (
    DotColor,
    build_timeline,
    dot_color,
    reflection_options,
    tooltip,
)


def make_event(exercise, **kwargs):
    defaults = dict(
        event_id="ev-x",
        exercise_id=exercise.exercise_id,
        team_id="T1",
        category=ScoreCategory.ATTACKS,
        source=SourceRole.RED,
        points=-2000,
        occurred_at=exercise.start_at + 1000,
        recorded_at=exercise.start_at + 1100,
        title="Defacement",
        description="Public site defaced.",
    )
    defaults.update(kwargs)
    return ScoringEvent(**defaults)


# ---------------------------------------------------------------------------
# dot_color
# ---------------------------------------------------------------------------


def test_color_mapping(exercise):
    assert dot_color(make_event(exercise)) == DotColor.RED
    assert dot_color(
        make_event(exercise, category=ScoreCategory.USERS, source=SourceRole.WHITE)
    ) == DotColor.YELLOW
    assert dot_color(
        make_event(exercise, category=ScoreCategory.INJECTS, source=SourceRole.WHITE)
    ) == DotColor.WHITE
    assert dot_color(
        make_event(exercise, category=ScoreCategory.ACCESS, source=SourceRole.GREEN)
    ) == DotColor.GREY
    assert dot_color(
        make_event(exercise, category=ScoreCategory.SERVICES, source=SourceRole.AUTO)
    ) is None


def test_color_total_over_fixture(demo_events):
    for ev in demo_events:
        color = dot_color(ev)
        if ev.source == SourceRole.AUTO:
            assert color is None
        else:
            assert isinstance(color, DotColor)


# ---------------------------------------------------------------------------
# tooltip
# ---------------------------------------------------------------------------


def test_tooltip_contains_title_points_category(exercise):
    text = tooltip(make_event(exercise))
    assert "Defacement" in text
    assert "-2,000" in text
    assert "Attacks" in text
    assert "Public site defaced." in text


def test_tooltip_with_empty_description(exercise):
    text = tooltip(make_event(exercise, description=""))
    assert "Defacement" in text and "-2,000" in text


def test_tooltip_positive_points_signed(exercise):
    text = tooltip(
        make_event(exercise, category=ScoreCategory.INJECTS, source=SourceRole.WHITE,
                   points=9000, title="Report rated")
    )
    assert "+9,000" in text


def test_fixture_tooltips_nonempty_and_unique(demo_events):
    manual = [ev for ev in demo_events if ev.is_manual]
    texts = {}
    for ev in manual:
        text = tooltip(ev)
        assert text.strip()
        texts[ev.event_id] = text
    assert len(set(texts.values())) == len(manual)


# ---------------------------------------------------------------------------
# reflection_options
# ---------------------------------------------------------------------------


def test_attack_options_cover_recognition():
    labels = [o.label for o in reflection_options(ScoreCategory.ATTACKS)]
    assert "We recognized this attack" in labels
    assert "We did not recognize this attack" in labels


def test_inject_options_cover_non_response():
    labels = " ".join(o.label for o in reflection_options(ScoreCategory.INJECTS))
    assert "did not respond" in labels


def test_every_category_has_exactly_one_free_text_option():
    for cat in (ScoreCategory.ATTACKS, ScoreCategory.INJECTS,
                ScoreCategory.USERS, ScoreCategory.ACCESS):
        options = reflection_options(cat)
        assert len(options) >= 2
        assert sum(o.free_text for o in options) == 1
        # stable order
        assert [o.option_id for o in options] == [o.option_id for o in reflection_options(cat)]


def test_services_has_no_options():
    with pytest.raises(ValueError):
        reflection_options(ScoreCategory.SERVICES)


def test_exercise_override_wins(exercise):
    import copy

    ex = copy.deepcopy(exercise)
    custom = [
        ReflectionOption("custom-1", ScoreCategory.ATTACKS, "Custom choice"),
        ReflectionOption("custom-other", ScoreCategory.ATTACKS, "Other", free_text=True),
    ]
    ex.reflection_options = {ScoreCategory.ATTACKS: custom}
    assert reflection_options(ScoreCategory.ATTACKS, ex) == custom
    # unconfigured categories still fall back to the defaults
    assert reflection_options(ScoreCategory.USERS, ex)[0].option_id == "user-handled"


# ---------------------------------------------------------------------------
# build_timeline
# ---------------------------------------------------------------------------


def test_timeline_no_events_is_flat(exercise):
    model = build_timeline([], exercise, "T1")
    assert model.dots == ()
    assert model.curve[0] == (exercise.start_at, 100_000)
    assert model.curve[-1] == (exercise.end_at, 100_000)
    assert all(score == 100_000 for _, score in model.curve)


def test_timeline_t3_structure(exercise, demo_events):
    model = build_timeline(demo_events, exercise, "T3")
    red = [d for d in model.dots if d.color == DotColor.RED]
    assert len(red) == 12
    assert sum(d.points for d in red) == -12_000
    assert len(model.dots) == 24
    assert model.curve[0][1] == 100_000
    assert model.curve[-1][1] == 65_031


def test_timeline_dot_bijection_and_personalization(exercise, demo_events):
    manual_by_team = {}
    for ev in demo_events:
        if ev.is_manual:
            manual_by_team.setdefault(ev.team_id, set()).add(ev.event_id)
    total_dots = 0
    seen_ids: set[str] = set()
    for team in exercise.team_ids:
        model = build_timeline(demo_events, exercise, team)
        dot_ids = {d.event_id for d in model.dots}
        assert dot_ids == manual_by_team[team]
        # no other team's events leak in
        assert dot_ids.isdisjoint(seen_ids)
        seen_ids |= dot_ids
        total_dots += len(model.dots)
    assert total_dots == sum(1 for ev in demo_events if ev.is_manual)


def test_timeline_curve_matches_score_at(exercise, demo_events):
    for team in exercise.team_ids:
        model = build_timeline(demo_events, exercise, team)
        times = [t for t, _ in model.curve]
        assert times == sorted(set(times))
        for t, score in model.curve:
            assert score == score_at(demo_events, exercise, team, t)
        board = compute_scoreboard(demo_events, exercise)
        assert model.curve[-1][1] == board.row(team).total


def test_timeline_simultaneous_events_merge_breakpoints(exercise):
    at = exercise.start_at + 500
    events = [
        make_event(exercise, event_id="a", occurred_at=at, recorded_at=at, points=-100),
        make_event(exercise, event_id="b", occurred_at=at, recorded_at=at, points=-200,
                   category=ScoreCategory.USERS, source=SourceRole.WHITE),
    ]
    model = build_timeline(events, exercise, "T1")
    assert len([t for t, _ in model.curve if t == at]) == 1
    assert dict(model.curve)[at] == 100_000 - 300
    assert len(model.dots) == 2


def test_timeline_flags_late_recordings(exercise, demo_events):
    model = build_timeline(demo_events, exercise, "T2")
    flagged = {d.event_id for d in model.dots if d.recorded_late}
    assert flagged == {"a07-t2"}  # the one attack entered 15 minutes late


def test_timeline_dots_carry_option_ids(exercise, demo_events):
    model = build_timeline(demo_events, exercise, "T4")
    for dot in model.dots:
        assert dot.reflection_option_ids
        if dot.color == DotColor.GREY:
            assert "assist-necessary" in dot.reflection_option_ids


def test_timeline_unknown_team(exercise):
    with pytest.raises(UnknownTeamError):
        build_timeline([], exercise, "T9")


def test_timeline_respects_range(exercise, demo_events):
    start = exercise.start_at
    mid = start + exercise.duration // 2
    model = build_timeline(demo_events, exercise, "T1", range_=(start, mid))
    assert all(start <= d.at <= mid for d in model.dots)
    assert model.curve[-1][0] == mid
    full = build_timeline(demo_events, exercise, "T1")
    assert len(model.dots) < len(full.dots)
