"""Score arithmetic for peer-assessed programming tasks.

This module is pure math: review-group bonus/penalty deltas, rubric-based
code review scores, reverse-review scores, and the weighted overall score
per student and task.  Nothing here touches task state or storage.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from .errors import ValidationError

# ---------------------------------------------------------------------------
# parameters
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class MotivationParams:
    """Award/penalty points and segment bounds for review-group bonuses.

    Reviewers whose score sits close to the group mean earn ``a1`` (or the
    weaker ``a2``); reviewers far from the mean lose ``p1`` or ``p2``.  The
    segment bounds are fractions of the group's max-min score spread, and
    groups whose spread stays below ``max_diff_min`` are already in consensus:
    nobody's score moves.
    """

    a1: float = 2.0
    a2: float = 0.0
    p1: float = 4.0
    p2: float = 8.0
    t1_frac: float = 0.10
    t2_frac: float = 0.30
    t3_frac: float = 0.60
    max_diff_min: float = 10.0

    def __post_init__(self) -> None:
        if not self.a1 > self.a2 >= 0:
            raise ValidationError("awards must satisfy a1 > a2 >= 0")
        if not self.p2 > self.p1 >= 0:
            raise ValidationError("penalties must satisfy p2 > p1 >= 0")
        if not 0 < self.t1_frac < self.t2_frac < self.t3_frac <= 1:
            raise ValidationError("segment fractions must satisfy 0 < t1 < t2 < t3 <= 1")
        if self.max_diff_min < 0:
            raise ValidationError("max_diff_min must be non-negative")


@dataclass(frozen=True)
class WeightConfig:
    """Weights of the five score items; they must sum to 100.

    The revision and the two process items are all-or-nothing per slot, the
    code/review quality items scale their 0..100 means down by weight/100.
    A student's own source submission carries no weight on purpose: skipping
    it already forfeits everything downstream.
    """

    w_revision: float = 15.0
    w_code: float = 30.0
    w_review: float = 30.0
    w_review_done: float = 12.5
    w_reverse_done: float = 12.5

    def __post_init__(self) -> None:
        weights = (
            self.w_revision,
            self.w_code,
            self.w_review,
            self.w_review_done,
            self.w_reverse_done,
        )
        if any(w < 0 for w in weights):
            raise ValidationError("weights must be non-negative")
        if abs(sum(weights) - 100.0) > 1e-9:
            raise ValidationError("weights must sum to 100")


# ---------------------------------------------------------------------------
# rubrics
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RubricItem:
    """One deductible defect class in the code-review rubric."""

    item_id: str
    label: str
    min_deduction: int
    max_deduction: int

    def __post_init__(self) -> None:
        if not 0 <= self.min_deduction <= self.max_deduction:
            raise ValidationError(
                f"rubric item {self.item_id!r}: need 0 <= min <= max deduction"
            )


@dataclass(frozen=True)
class ReverseCriterion:
    """One additive criterion in the review-the-review rubric."""

    criterion_id: str
    label: str
    max_points: int = 25

    def __post_init__(self) -> None:
        if self.max_points <= 0:
            raise ValidationError(
                f"criterion {self.criterion_id!r}: max_points must be positive"
            )


@dataclass(frozen=True)
class Rubric:
    """Deduction items for code reviews plus criteria for reverse reviews."""

    items: tuple[RubricItem, ...]
    reverse_criteria: tuple[ReverseCriterion, ...]

    def __post_init__(self) -> None:
        if len({i.item_id for i in self.items}) != len(self.items):
            raise ValidationError("duplicate rubric item ids")
        if len({c.criterion_id for c in self.reverse_criteria}) != len(
            self.reverse_criteria
        ):
            raise ValidationError("duplicate reverse criterion ids")

    def item(self, item_id: str) -> RubricItem:
        for it in self.items:
            if it.item_id == item_id:
                return it
        raise ValidationError(f"unknown rubric item {item_id!r}")

    def to_dict(self) -> dict:
        return {
            "items": [
                {
                    "item_id": i.item_id,
                    "label": i.label,
                    "min_deduction": i.min_deduction,
                    "max_deduction": i.max_deduction,
                }
                for i in self.items
            ],
            "reverse_criteria": [
                {
                    "criterion_id": c.criterion_id,
                    "label": c.label,
                    "max_points": c.max_points,
                }
                for c in self.reverse_criteria
            ],
        }

    @classmethod
    def from_dict(cls, data: Mapping) -> "Rubric":
        return cls(
            items=tuple(
                RubricItem(
                    item_id=i["item_id"],
                    label=i.get("label", i["item_id"]),
                    min_deduction=int(i["min_deduction"]),
                    max_deduction=int(i["max_deduction"]),
                )
                for i in data["items"]
            ),
            reverse_criteria=tuple(
                ReverseCriterion(
                    criterion_id=c["criterion_id"],
                    label=c.get("label", c["criterion_id"]),
                    max_points=int(c.get("max_points", 25)),
                )
                for c in data["reverse_criteria"]
            ),
        )


def default_rubric() -> Rubric:
    """The stock rubric: comment/naming/layout/correctness deductions and
    four 0-25 reverse-review criteria."""
    return Rubric(
        items=(
            RubricItem("header_comment", "missing or inadequate header comment", 2, 10),
            RubricItem("block_comment", "missing or inadequate block comments", 2, 10),
            RubricItem("line_comment", "missing or inadequate line comments", 2, 10),
            RubricItem("naming", "unclear or inconsistent identifier naming", 1, 20),
            RubricItem("layout", "disordered program layout", 1, 20),
            RubricItem(
                "suspected_nonworking", "program suspected not to work as required", 15, 25
            ),
            RubricItem(
                "proven_nonworking", "program demonstrated not to work as required", 20, 40
            ),
        ),
        reverse_criteria=(
            ReverseCriterion("completeness", "review covers the whole submission"),
            ReverseCriterion("constructiveness", "comments help improve the program"),
            ReverseCriterion("fairness", "deductions are justified and unbiased"),
            ReverseCriterion("clarity", "review is readable and specific"),
        ),
    )


DEFAULT_RUBRIC = default_rubric()


# ---------------------------------------------------------------------------
# review records
# ---------------------------------------------------------------------------


def _check_score(value, what: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ValidationError(f"{what} must be an integer, got {value!r}")
    if not 0 <= value <= 100:
        raise ValidationError(f"{what} must be in [0, 100], got {value}")
    return value


@dataclass(frozen=True)
class ReviewGroup:
    """All review scores one author's program received in one task."""

    task_id: str
    author_id: str
    entries: tuple[tuple[str, int], ...]  # (reviewer_id, code_score)

    def __post_init__(self) -> None:
        object.__setattr__(self, "entries", tuple((r, s) for r, s in self.entries))
        if not self.entries:
            raise ValidationError("review group must have at least one entry")
        reviewers = [r for r, _ in self.entries]
        if len(set(reviewers)) != len(reviewers):
            raise ValidationError("duplicate reviewer in review group")
        if self.author_id in reviewers:
            raise ValidationError("author cannot review their own program")
        for r, s in self.entries:
            _check_score(s, f"score by {r!r}")

    @property
    def scores(self) -> tuple[int, ...]:
        return tuple(s for _, s in self.entries)


@dataclass(frozen=True)
class BonusDelta:
    """Signed adjustment one reviewer earned from one review group."""

    reviewer_id: str
    delta: float


@dataclass(frozen=True)
class CodeReview:
    """A rubric-scored review of one author's program.

    ``code_score`` always equals 100 minus the deduction total, floored at 0;
    the constructor enforces it so a stored review can never drift from its
    own deductions.
    """

    task_id: str
    reviewer_id: str
    author_id: str
    deductions: tuple[tuple[str, int], ...]
    comments: str
    code_score: int

    def __post_init__(self) -> None:
        object.__setattr__(
            self, "deductions", tuple((i, p) for i, p in self.deductions)
        )
        expected = max(0, 100 - sum(p for _, p in self.deductions))
        if self.code_score != expected:
            raise ValidationError(
                f"code_score {self.code_score} != 100 - deductions ({expected})"
            )


@dataclass(frozen=True)
class ReverseReview:
    """The author's assessment of one review they received."""

    task_id: str
    author_id: str
    reviewer_id: str
    criterion_scores: tuple[tuple[str, int], ...]
    total: int

    def __post_init__(self) -> None:
        object.__setattr__(
            self, "criterion_scores", tuple((c, p) for c, p in self.criterion_scores)
        )
        expected = sum(p for _, p in self.criterion_scores)
        if self.total != expected:
            raise ValidationError(f"total {self.total} != criterion sum ({expected})")


@dataclass
class ScoreSheet:
    """Everything one student earned in one task.

    The done-flags are per assignment slot; the received lists carry the raw
    scores this student's program (code) and this student's reviews (reverse)
    were given.  ``overall`` stays None until the task is finalized.
    """

    student_id: str
    task_id: str
    source_done: bool = False
    revision_done: bool = False
    review_done: list[bool] = field(default_factory=list)
    reverse_done: list[bool] = field(default_factory=list)
    code_scores_received: list[int] = field(default_factory=list)
    review_scores_received: list[int] = field(default_factory=list)
    review_bonuses: list[BonusDelta] = field(default_factory=list)
    overall: float | None = None


# ---------------------------------------------------------------------------
# operations
# ---------------------------------------------------------------------------


def compute_bonus(
    group: ReviewGroup, params: MotivationParams | None = None
) -> list[BonusDelta]:
    """Award or penalize each reviewer by distance from the group mean.

    With M the group mean and D_i = |M - score_i|, reviewer i earns +a1 for
    D_i <= t1*maxDiff, +a2 up to t2*maxDiff, loses p1 up to t3*maxDiff and p2
    beyond; a boundary hit takes the more favorable segment.  If the group's
    spread (max - min) is below ``max_diff_min`` the group already agrees and
    every delta is 0.  Comparisons run in exact rational arithmetic so the
    boundary rule never depends on float rounding.
    """
    params = params or MotivationParams()
    entries = group.entries
    scores = [s for _, s in entries]
    m = len(scores)
    max_diff = max(scores) - min(scores)
    if max_diff < params.max_diff_min:
        return [BonusDelta(r, 0.0) for r, _ in entries]

    # D_i = |total - m*score_i| / m, so D_i <= t*maxDiff cross-multiplies to
    # |total - m*score_i| * t.denominator <= t.numerator * maxDiff * m.
    total = sum(scores)
    bounds = []
    for frac in (params.t1_frac, params.t2_frac, params.t3_frac):
        t = Fraction(frac)
        bounds.append((t.denominator, t.numerator * max_diff * m))

    deltas = []
    for reviewer_id, score in entries:
        dm = abs(total - m * score)
        if dm * bounds[0][0] <= bounds[0][1]:
            delta = params.a1
        elif dm * bounds[1][0] <= bounds[1][1]:
            delta = params.a2
        elif dm * bounds[2][0] <= bounds[2][1]:
            delta = -params.p1
        else:
            delta = -params.p2
        deltas.append(BonusDelta(reviewer_id, float(delta)))
    return deltas


def score_code_review(
    deductions: Iterable[tuple[str, int]], rubric: Rubric | None = None
) -> int:
    """Score a code review: 100 minus all deductions, floored at 0.

    Every deduction must name a rubric item and fall inside that item's
    allowed range.  The same item may appear more than once (one entry per
    violation found).
    """
    rubric = rubric or DEFAULT_RUBRIC
    total = 0
    for item_id, points in deductions:
        item = rubric.item(item_id)
        if isinstance(points, bool) or not isinstance(points, int):
            raise ValidationError(f"deduction for {item_id!r} must be an integer")
        if not item.min_deduction <= points <= item.max_deduction:
            raise ValidationError(
                f"deduction {points} for {item_id!r} outside "
                f"[{item.min_deduction}, {item.max_deduction}]"
            )
        total += points
    return max(0, 100 - total)


def score_reverse_review(
    criterion_scores: Mapping[str, int], rubric: Rubric | None = None
) -> int:
    """Score a reverse review by summing its per-criterion points.

    All rubric criteria must be present (the score builds up from 0), each
    within [0, max_points].
    """
    rubric = rubric or DEFAULT_RUBRIC
    expected = {c.criterion_id: c for c in rubric.reverse_criteria}
    given = dict(criterion_scores)
    missing = sorted(set(expected) - set(given))
    if missing:
        raise ValidationError(f"missing reverse criteria: {', '.join(missing)}")
    unknown = sorted(set(given) - set(expected))
    if unknown:
        raise ValidationError(f"unknown reverse criteria: {', '.join(unknown)}")
    total = 0
    for cid, points in given.items():
        if isinstance(points, bool) or not isinstance(points, int):
            raise ValidationError(f"points for {cid!r} must be an integer")
        if not 0 <= points <= expected[cid].max_points:
            raise ValidationError(
                f"points {points} for {cid!r} outside [0, {expected[cid].max_points}]"
            )
        total += points
    return total


def _mean(values: Sequence[float]) -> float:
    return sum(values) / len(values)


def _done_fraction(flags: Sequence[bool]) -> float:
    # No duties assigned means no process credit to earn.
    if not flags:
        return 0.0
    return sum(1 for f in flags if f) / len(flags)


def overall_score(
    sheet: ScoreSheet,
    weights: WeightConfig | None = None,
    *,
    strict: bool = True,
) -> float:
    """Aggregate one sheet into the student's overall score for the task.

    Quality items are weight * mean/100, process items are weight * done
    fraction, the revision is all-or-nothing, and every review bonus the
    student earned as a reviewer is added on top.  The result is floored at
    0 but deliberately not capped at 100: bonuses may push past it.

    With ``strict`` (the default) empty received-score lists are rejected —
    a finalized sheet is expected to carry at least one review each way.  The
    engine relaxes this for students whose counterparts never submitted, in
    which case the missing mean simply contributes nothing.
    """
    weights = weights or WeightConfig()
    if strict and (not sheet.code_scores_received or not sheet.review_scores_received):
        raise ValidationError(
            f"sheet for {sheet.student_id!r} has empty received-score lists"
        )
    total = weights.w_revision * (1.0 if sheet.revision_done else 0.0)
    if sheet.code_scores_received:
        total += weights.w_code * _mean(sheet.code_scores_received) / 100.0
    if sheet.review_scores_received:
        total += weights.w_review * _mean(sheet.review_scores_received) / 100.0
    total += weights.w_review_done * _done_fraction(sheet.review_done)
    total += weights.w_reverse_done * _done_fraction(sheet.reverse_done)
    total += sum(b.delta for b in sheet.review_bonuses)
    return max(0.0, total)
