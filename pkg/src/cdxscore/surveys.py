"""Likert surveys and their statistics.

Answers are stored at full precision and aggregated with plain means;
quartiles use Tukey's inclusive hinges (the median joins both halves for odd
sample sizes), which is stable and well defined for the tiny per-team
samples a team exercise produces. Values are truncated to two decimals only
for display.

Team averages cover identified answers only; the overall average covers
every answer, anonymous ones included.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional, Sequence, Union

from .exercise import ExerciseError


class SurveyError(ExerciseError):
    pass


LIKERT_MIN, LIKERT_MAX = 1, 5


@dataclass(frozen=True)
class SurveyItem:
    item_id: str
    statement: str
    kind: str = "likert5"  # likert5 | free_text


@dataclass(frozen=True)
class SurveyDef:
    survey_id: str
    title: str
    items: tuple[SurveyItem, ...]

    def __post_init__(self):
        ids = [i.item_id for i in self.items]
        if len(set(ids)) != len(ids):
            raise SurveyError(f"{self.survey_id}: item ids must be unique")

    def item(self, item_id: str) -> SurveyItem:
        for i in self.items:
            if i.item_id == item_id:
                return i
        raise SurveyError(f"unknown item: {item_id!r}")

    def to_dict(self) -> dict:
        return {
            "survey_id": self.survey_id,
            "title": self.title,
            "items": [
                {"item_id": i.item_id, "statement": i.statement, "kind": i.kind}
                for i in self.items
            ],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SurveyDef":
        return cls(
            survey_id=d["survey_id"],
            title=d.get("title", ""),
            items=tuple(
                SurveyItem(
                    item_id=i["item_id"],
                    statement=i["statement"],
                    kind=i.get("kind", "likert5"),
                )
                for i in d["items"]
            ),
        )


@dataclass(frozen=True)
class Answer:
    """One answer to one survey item.

    Likert answers carry an integer 1..5, free-text answers a string.
    Anonymous answers have neither respondent nor team; a team can only be
    attributed when the respondent identified themselves.
    """

    survey_id: str
    item_id: str
    value: Union[int, str]
    respondent_id: Optional[str] = None
    team_id: Optional[str] = None

    def __post_init__(self):
        if self.team_id is not None and self.respondent_id is None:
            raise SurveyError("team_id present requires an identified respondent")

    @property
    def anonymous(self) -> bool:
        return self.respondent_id is None

    def to_dict(self) -> dict:
        d: dict = {
            "survey_id": self.survey_id,
            "item_id": self.item_id,
            "value": self.value,
        }
        if self.respondent_id is not None:
            d["respondent_id"] = self.respondent_id
        if self.team_id is not None:
            d["team_id"] = self.team_id
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "Answer":
        return cls(
            survey_id=d["survey_id"],
            item_id=d["item_id"],
            value=d["value"],
            respondent_id=d.get("respondent_id"),
            team_id=d.get("team_id"),
        )


def validate_answer(answer: Answer, survey: SurveyDef) -> None:
    item = survey.item(answer.item_id)
    if item.kind == "likert5":
        if not isinstance(answer.value, int) or isinstance(answer.value, bool):
            raise SurveyError(f"{item.item_id}: Likert answer must be an integer")
        if not LIKERT_MIN <= answer.value <= LIKERT_MAX:
            raise SurveyError(
                f"{item.item_id}: Likert answer must be in {LIKERT_MIN}..{LIKERT_MAX}"
            )
    else:
        if not isinstance(answer.value, str):
            raise SurveyError(f"{item.item_id}: free-text answer must be a string")


@dataclass(frozen=True)
class DistributionStats:
    item_id: str
    lower_whisker: float
    lower_quartile: float
    median: float
    upper_quartile: float
    upper_whisker: float
    average: float
    count: int

    def to_dict(self) -> dict:
        return {
            "item_id": self.item_id,
            "lower_whisker": self.lower_whisker,
            "lower_quartile": self.lower_quartile,
            "median": self.median,
            "upper_quartile": self.upper_quartile,
            "upper_whisker": self.upper_whisker,
            "average": self.average,
            "count": self.count,
        }


def display_round(value: float) -> float:
    """Truncate to two decimals for presentation.

    Survey tables conventionally print 8/3 as 2.66 and 46/13 as 3.53, i.e.
    truncation rather than half-up rounding; storage keeps full precision.
    The epsilon absorbs float noise in means that are exact hundredths
    (61/20 must print as 3.05, not 3.04).
    """
    import math

    eps = 1e-7
    if value >= 0:
        return math.floor(value * 100 + eps) / 100
    return math.ceil(value * 100 - eps) / 100


def _likert_values(
    answers: Iterable[Answer], item_id: str, team_id: Optional[str] = None
) -> list[int]:
    vals = []
    for a in answers:
        if a.item_id != item_id or not isinstance(a.value, int):
            continue
        if team_id is not None and a.team_id != team_id:
            continue
        vals.append(a.value)
    return vals


def team_average(
    answers: Iterable[Answer], item_id: str, team_id: str
) -> Optional[float]:
    """Mean of a team's identified answers to one item; None when no data.

    Anonymous answers carry no team and can never contribute here.
    """
    vals = _likert_values(answers, item_id, team_id)
    if not vals:
        return None
    return sum(vals) / len(vals)


def overall_average(answers: Iterable[Answer], item_id: str) -> Optional[float]:
    """Mean over all answers to one item, anonymous ones included."""
    vals = _likert_values(answers, item_id)
    if not vals:
        return None
    return sum(vals) / len(vals)


def _median(sorted_vals: Sequence[int]) -> float:
    n = len(sorted_vals)
    mid = n // 2
    if n % 2:
        return float(sorted_vals[mid])
    return (sorted_vals[mid - 1] + sorted_vals[mid]) / 2


def tukey_quartiles(values: Sequence[int]) -> tuple[float, float, float]:
    """(lower hinge, median, upper hinge) by the inclusive method.

    For odd sample sizes the median belongs to both halves.
    """
    xs = sorted(values)
    n = len(xs)
    if n == 0:
        raise SurveyError("quartiles of an empty sample")
    half = (n + 1) // 2
    return _median(xs[:half]), _median(xs), _median(xs[n - half:])


def distribution(answers: Iterable[Answer], item_id: str) -> DistributionStats:
    """Boxplot statistics for one item: min/max whiskers, Tukey hinges, mean."""
    vals = _likert_values(answers, item_id)
    if not vals:
        raise SurveyError(f"no Likert answers for {item_id!r}")
    q1, med, q3 = tukey_quartiles(vals)
    return DistributionStats(
        item_id=item_id,
        lower_whisker=float(min(vals)),
        lower_quartile=q1,
        median=med,
        upper_quartile=q3,
        upper_whisker=float(max(vals)),
        average=sum(vals) / len(vals),
        count=len(vals),
    )


def free_text_collect(
    answers: Iterable[Answer], survey: SurveyDef, item_id: str
) -> list[tuple[Optional[str], str]]:
    """All non-empty free texts for an item as (team_id, text), submission order."""
    item = survey.item(item_id)
    if item.kind != "free_text":
        raise SurveyError(f"{item_id!r} is not a free-text item")
    out = []
    for a in answers:
        if a.item_id == item_id and isinstance(a.value, str) and a.value.strip():
            out.append((a.team_id, a.value))
    return out


# ---------------------------------------------------------------------------
# Statistics export
# ---------------------------------------------------------------------------


def survey_stats(
    survey: SurveyDef,
    answers: Iterable[Answer],
    team_ids: Sequence[str],
) -> dict:
    """Full per-item statistics: team averages, overall average, distribution,
    free texts. Averages are reported raw and display-truncated."""
    answers = [a for a in answers if a.survey_id == survey.survey_id]
    items = []
    for item in survey.items:
        entry: dict = {"item_id": item.item_id, "statement": item.statement, "kind": item.kind}
        if item.kind == "likert5":
            teams = {}
            for tid in team_ids:
                avg = team_average(answers, item.item_id, tid)
                vals = _likert_values(answers, item.item_id, tid)
                teams[tid] = (
                    None
                    if avg is None
                    else {"count": len(vals), "average": avg, "display": display_round(avg)}
                )
            overall = overall_average(answers, item.item_id)
            entry["teams"] = teams
            entry["overall"] = (
                None
                if overall is None
                else {
                    "count": len(_likert_values(answers, item.item_id)),
                    "average": overall,
                    "display": display_round(overall),
                }
            )
            entry["distribution"] = (
                distribution(answers, item.item_id).to_dict() if overall is not None else None
            )
        else:
            entry["free_text"] = [
                {"team_id": tid, "text": text}
                for tid, text in free_text_collect(answers, survey, item.item_id)
            ]
        items.append(entry)
    return {"survey_id": survey.survey_id, "title": survey.title, "items": items}


def stats_table(survey: SurveyDef, answers: Iterable[Answer], team_ids: Sequence[str]) -> str:
    """Tabular text export: one row per item per team plus an ALL row.

    Columns: item, team, n, average (2-decimal display). Free-text items list
    each comment as its own row with the text in the average column.
    """
    stats = survey_stats(survey, list(answers), team_ids)
    lines = ["item\tteam\tn\taverage"]
    for entry in stats["items"]:
        if entry["kind"] == "likert5":
            for tid in team_ids:
                cell = entry["teams"][tid]
                if cell is None:
                    lines.append(f"{entry['item_id']}\t{tid}\t0\t-")
                else:
                    lines.append(
                        f"{entry['item_id']}\t{tid}\t{cell['count']}\t{cell['display']:.2f}"
                    )
            overall = entry["overall"]
            if overall is not None:
                lines.append(
                    f"{entry['item_id']}\tALL\t{overall['count']}\t{overall['display']:.2f}"
                )
        else:
            for comment in entry["free_text"]:
                team = comment["team_id"] or "-"
                lines.append(f"{entry['item_id']}\t{team}\t1\t{comment['text']}")
    return "\n".join(lines) + "\n"
