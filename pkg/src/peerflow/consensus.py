"""Consensus detection over review groups and reviewer radicalness.

Two detectors live here.  The group detector measures how much one program's
reviewers disagree (population standard deviation of the scores, with small
groups pooled into mean-score bands to de-bias the estimate).  The reviewer
detector measures how little one reviewer's scores move across programs
(accumulated squared deviation from their own per-task means, reported
without the square root, so *low* values mean radical).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Mapping, Sequence

from .errors import ValidationError
from .scoring import ReviewGroup, _check_score

# ---------------------------------------------------------------------------
# configuration
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DetectorConfig:
    """Course-level knobs for both detectors."""

    band_width: int = 5
    pooling_size: int = 4
    arbitration_threshold: float = 30.0
    warn_threshold: float = 50.0
    min_warn_reviews: int = 10

    def __post_init__(self) -> None:
        if self.band_width <= 0:
            raise ValidationError("band_width must be positive")
        if self.pooling_size < 1:
            raise ValidationError("pooling_size must be at least 1")
        if self.arbitration_threshold < 0 or self.warn_threshold < 0:
            raise ValidationError("thresholds must be non-negative")
        if self.min_warn_reviews < 0:
            raise ValidationError("min_warn_reviews must be non-negative")


# ---------------------------------------------------------------------------
# result records
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GroupDeviation:
    """Disagreement measure for one author's review group.

    ``z`` is the value the course acts on: the band-pooled deviation for
    small groups, the group's own deviation otherwise.  ``raw_z`` always
    keeps the group's own deviation for audit.
    """

    task_id: str
    author_id: str
    z: float
    group_size: int
    pooled: bool
    raw_z: float

    def to_payload(self) -> dict:
        return {
            "task_id": self.task_id,
            "author_id": self.author_id,
            "z": round(self.z, 2),
            "group_size": self.group_size,
            "pooled": self.pooled,
            "raw_z": round(self.raw_z, 2),
        }


@dataclass(frozen=True)
class EstimationBand:
    """One mean-score band and the authors whose groups pooled into it."""

    lower: float
    upper: float
    author_ids: tuple[str, ...]


@dataclass(frozen=True)
class ConsensusReport:
    """Per-task ranking of review groups by disagreement, most divergent first."""

    task_id: str
    entries: tuple[GroupDeviation, ...]
    threshold: float | None = None
    flagged: tuple[GroupDeviation, ...] = ()
    snapshot_version: int = 0

    def to_payload(self) -> dict:
        return {
            "task_id": self.task_id,
            "snapshot_version": self.snapshot_version,
            "threshold": self.threshold,
            "entries": [e.to_payload() for e in self.entries],
            "flagged": [e.to_payload() for e in self.flagged],
        }


@dataclass(frozen=True)
class ReviewerRadicalness:
    """Accumulated per-reviewer deviation statistic; lower means more radical."""

    reviewer_id: str
    z_r: float
    review_count: int
    per_task_means: tuple[tuple[str, float], ...] = ()

    def to_payload(self) -> dict:
        return {
            "reviewer_id": self.reviewer_id,
            "z_r": round(self.z_r, 2),
            "review_count": self.review_count,
            "per_task_means": {t: round(m, 2) for t, m in self.per_task_means},
        }


@dataclass(frozen=True)
class RadicalnessReport:
    """Class-wide ranking of reviewers, most radical (lowest z_r) first."""

    entries: tuple[ReviewerRadicalness, ...]
    warn_threshold: float
    min_reviews: int
    warn_candidates: tuple[ReviewerRadicalness, ...] = ()
    snapshot_version: int = 0

    def to_payload(self) -> dict:
        return {
            "snapshot_version": self.snapshot_version,
            "warn_threshold": self.warn_threshold,
            "min_reviews": self.min_reviews,
            "entries": [e.to_payload() for e in self.entries],
            "warn_candidates": [e.reviewer_id for e in self.warn_candidates],
        }


# ---------------------------------------------------------------------------
# group deviation
# ---------------------------------------------------------------------------


def _population_sd(scores: Sequence[int]) -> float:
    m = len(scores)
    mean = sum(scores) / m
    return math.sqrt(sum((x - mean) ** 2 for x in scores) / m)


def group_sd(group: ReviewGroup) -> GroupDeviation:
    """Population standard deviation of one group's scores (size 1 gives 0)."""
    z = _population_sd(group.scores)
    return GroupDeviation(
        task_id=group.task_id,
        author_id=group.author_id,
        z=z,
        group_size=len(group.entries),
        pooled=False,
        raw_z=z,
    )


def _band_upper(mean: float, band_width: int) -> int:
    # Bands are (lower, upper] anchored at multiples of the width, with the
    # bottom band closed at 0, so e.g. width 5 puts means 86 and 90 together
    # in (85, 90].
    return band_width * max(1, math.ceil(mean / band_width))


def pooled_group_sd(
    groups: Sequence[ReviewGroup],
    band_width: int = 5,
    pooling_size: int = 4,
) -> list[GroupDeviation]:
    """Deviation per group, de-biased by pooling small groups within bands.

    A handful of scores makes a poor spread estimate, so groups of size up to
    ``pooling_size`` contribute their squared deviations (about their own
    mean) to the band their mean falls in, and read back the band-wide value
    sqrt(sum SS / sum m).  Larger groups keep their own deviation.  Returns
    one entry per input group, in input order.
    """
    band_ss: dict[int, float] = {}
    band_n: dict[int, int] = {}
    band_key: dict[int, int] = {}  # group index -> band upper bound
    for i, group in enumerate(groups):
        scores = group.scores
        if len(scores) > pooling_size:
            continue
        mean = sum(scores) / len(scores)
        key = _band_upper(mean, band_width)
        band_ss[key] = band_ss.get(key, 0.0) + sum((x - mean) ** 2 for x in scores)
        band_n[key] = band_n.get(key, 0) + len(scores)
        band_key[i] = key

    out = []
    for i, group in enumerate(groups):
        own = _population_sd(group.scores)
        pooled = i in band_key
        if pooled:
            key = band_key[i]
            z = math.sqrt(band_ss[key] / band_n[key])
        else:
            z = own
        out.append(
            GroupDeviation(
                task_id=group.task_id,
                author_id=group.author_id,
                z=z,
                group_size=len(group.scores),
                pooled=pooled,
                raw_z=own,
            )
        )
    return out


def estimation_bands(
    groups: Sequence[ReviewGroup],
    band_width: int = 5,
    pooling_size: int = 4,
) -> list[EstimationBand]:
    """The bands the small groups pooled into, lowest first."""
    members: dict[int, list[str]] = {}
    for group in groups:
        if len(group.scores) > pooling_size:
            continue
        mean = sum(group.scores) / len(group.scores)
        key = _band_upper(mean, band_width)
        members.setdefault(key, []).append(group.author_id)
    return [
        EstimationBand(
            lower=float(max(0, upper - band_width)),
            upper=float(min(100, upper)),
            author_ids=tuple(sorted(ids)),
        )
        for upper, ids in sorted(members.items())
    ]


def rank_groups(
    task_id: str,
    groups: Sequence[ReviewGroup],
    band_width: int = 5,
    pooling_size: int = 4,
    snapshot_version: int = 0,
) -> ConsensusReport:
    """Rank one task's review groups by pooled deviation, descending.

    Ties break by author id so the report is deterministic for a given
    snapshot.
    """
    for g in groups:
        if g.task_id != task_id:
            raise ValidationError(
                f"group for author {g.author_id!r} belongs to task {g.task_id!r}"
            )
    deviations = pooled_group_sd(groups, band_width, pooling_size)
    ordered = tuple(sorted(deviations, key=lambda d: (-d.z, d.author_id)))
    return ConsensusReport(
        task_id=task_id, entries=ordered, snapshot_version=snapshot_version
    )


def flag_arbitration(report: ConsensusReport, threshold: float = 30.0) -> ConsensusReport:
    """Mark every entry at or above the threshold for teacher arbitration."""
    if threshold < 0:
        raise ValidationError("threshold must be non-negative")
    flagged = tuple(e for e in report.entries if e.z >= threshold)
    return replace(report, threshold=threshold, flagged=flagged)


# ---------------------------------------------------------------------------
# reviewer radicalness
# ---------------------------------------------------------------------------


def reviewer_radicalness(
    reviewer_id: str, history: Mapping[str, Sequence[int]]
) -> ReviewerRadicalness:
    """How little this reviewer's scores spread around their own means.

    ``history`` maps task id to the scores the reviewer handed out in that
    task.  The statistic accumulates squared deviations from the reviewer's
    per-task mean over all tasks, divided by the total review count — no
    square root, matching how the watchlist is ranked.  A reviewer who gives
    everyone nearly the same score regardless of the program lands near 0.
    """
    total_ss = 0.0
    total_n = 0
    means: list[tuple[str, float]] = []
    for task_id in sorted(history):
        scores = history[task_id]
        if not scores:
            continue
        for s in scores:
            _check_score(s, f"review score by {reviewer_id!r}")
        mean = sum(scores) / len(scores)
        total_ss += sum((x - mean) ** 2 for x in scores)
        total_n += len(scores)
        means.append((task_id, mean))
    if total_n == 0:
        raise ValidationError(f"reviewer {reviewer_id!r} has no review history")
    return ReviewerRadicalness(
        reviewer_id=reviewer_id,
        z_r=total_ss / total_n,
        review_count=total_n,
        per_task_means=tuple(means),
    )


def build_radicalness_report(
    entries: Sequence[ReviewerRadicalness],
    warn_threshold: float = 50.0,
    min_reviews: int = 10,
    snapshot_version: int = 0,
) -> RadicalnessReport:
    """Sort reviewer entries ascending (most radical first) and pick warn
    candidates: low z_r with enough reviews to mean something."""
    ordered = tuple(sorted(entries, key=lambda e: (e.z_r, e.reviewer_id)))
    candidates = tuple(
        e for e in ordered if e.z_r < warn_threshold and e.review_count >= min_reviews
    )
    return RadicalnessReport(
        entries=ordered,
        warn_threshold=warn_threshold,
        min_reviews=min_reviews,
        warn_candidates=candidates,
        snapshot_version=snapshot_version,
    )


def rank_radicalness(
    histories: Mapping[str, Mapping[str, Sequence[int]]],
    warn_threshold: float = 50.0,
    min_reviews: int = 10,
    snapshot_version: int = 0,
) -> RadicalnessReport:
    """Compute and rank radicalness for a whole class of reviewers.

    ``histories`` maps reviewer id to that reviewer's task->scores history;
    reviewers with no reviews at all are left out (there is nothing to rank).
    """
    entries = [
        reviewer_radicalness(reviewer_id, history)
        for reviewer_id, history in histories.items()
        if any(len(v) for v in history.values())
    ]
    return build_radicalness_report(
        entries, warn_threshold, min_reviews, snapshot_version
    )
