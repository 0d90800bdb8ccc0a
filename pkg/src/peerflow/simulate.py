"""Monte-Carlo classroom: synthetic reviewers driving the real engine.

Reviewers come in four archetypes.  An honest reviewer scores a program near
its true quality; a radical one emits a near-constant number regardless of
the program; a low-competence one is noisy and biased low.  Some authors
write advanced programs that only a fraction of honest reviewers fully
comprehend — the rest underscore them by a fixed gap, which is exactly the
disagreement pattern the arbitration pipeline exists to catch.

Everything is driven through :class:`~peerflow.workflow.CourseEngine`, so a
simulated semester exercises the same code paths a live course would, and a
fixed (spec, seed) pair reproduces byte-identical outputs.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from datetime import datetime, timedelta, timezone

from .consensus import DetectorConfig
from .errors import ValidationError
from .scoring import DEFAULT_RUBRIC, Rubric
from .workflow import CourseEngine, FinalizeResult, RosterEntry

ARCHETYPES = ("honest", "radical_high", "radical_low", "low_competence")

_SIM_START = datetime(2026, 1, 5, 12, 0, 0, tzinfo=timezone.utc)


# ---------------------------------------------------------------------------
# specs and outputs
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ArchetypeSpec:
    """Class composition and noise model for one simulated course."""

    honest: int = 29
    radical_high: int = 1
    radical_low: int = 0
    low_competence: int = 0
    advanced_authors: int = 0
    sigma_h: float = 8.0
    sigma_r: float = 1.0
    bias: float = -20.0
    sigma_l: float = 15.0
    comprehension_prob: float = 0.2
    comprehension_gap: float = 30.0
    radical_high_score: float = 95.0
    radical_low_score: float = 30.0
    base_quality_mean: float = 75.0
    base_quality_sd: float = 8.0
    advanced_quality_mean: float = 92.0
    advanced_quality_sd: float = 3.0

    def __post_init__(self) -> None:
        counts = (self.honest, self.radical_high, self.radical_low, self.low_competence)
        if any(c < 0 for c in counts):
            raise ValidationError("archetype counts must be non-negative")
        if self.class_size == 0:
            raise ValidationError("class must have at least one student")
        if not self.sigma_h > self.sigma_r >= 0:
            raise ValidationError("noise must satisfy sigma_h > sigma_r >= 0")
        if self.sigma_l < 0:
            raise ValidationError("sigma_l must be non-negative")
        if not 0 <= self.comprehension_prob <= 1:
            raise ValidationError("comprehension_prob must be in [0, 1]")
        if not 0 <= self.advanced_authors <= self.class_size:
            raise ValidationError("advanced_authors must not exceed the class size")

    @property
    def class_size(self) -> int:
        return self.honest + self.radical_high + self.radical_low + self.low_competence


@dataclass(frozen=True)
class SyntheticClass:
    """A reproducible cast of students with per-task true program quality."""

    spec: ArchetypeSpec
    seed: int
    students: tuple[str, ...]
    archetypes: dict[str, str]
    advanced: frozenset[str]
    quality: tuple[dict[str, float], ...]  # one dict per task


@dataclass(frozen=True)
class ReviewEvent:
    """Ground truth behind one synthesized review.

    ``comprehended`` is None unless the reviewer was honest and the author's
    program advanced — the only case where comprehension is drawn.
    """

    task_id: str
    reviewer_id: str
    author_id: str
    given: int
    true_quality: float
    comprehended: bool | None


@dataclass
class SemesterOutputs:
    engine: CourseEngine
    results: list[FinalizeResult]
    review_log: list[ReviewEvent]


@dataclass(frozen=True)
class DetectionMetrics:
    """How well the detectors recovered the planted ground truth."""

    planted_radicals: tuple[str, ...]
    radicalness_precision: float | None
    radicalness_recall: float | None
    planted_ranks: tuple[tuple[str, int], ...]
    arbitration_rate_advanced: float | None
    arbitration_rate_regular: float | None
    comprehender_false_penalties: int

    def __post_init__(self) -> None:
        for value in (self.radicalness_precision, self.radicalness_recall):
            if value is not None and not 0 <= value <= 1:
                raise ValidationError("precision and recall must lie in [0, 1]")

    def to_payload(self) -> dict:
        return {
            "planted_radicals": list(self.planted_radicals),
            "radicalness_precision": self.radicalness_precision,
            "radicalness_recall": self.radicalness_recall,
            "planted_ranks": {s: r for s, r in self.planted_ranks},
            "arbitration_rate_advanced": self.arbitration_rate_advanced,
            "arbitration_rate_regular": self.arbitration_rate_regular,
            "comprehender_false_penalties": self.comprehender_false_penalties,
        }


# ---------------------------------------------------------------------------
# synthesis helpers
# ---------------------------------------------------------------------------


def _clamp(value: float) -> float:
    return min(100.0, max(0.0, value))


def deductions_for_score(target: int, rubric: Rubric | None = None) -> list[list]:
    """A deduction list valid under the rubric whose total is 100 - target.

    Greedy over items sorted by descending minimum so large remainders are
    absorbed first and any remainder >= 1 can land on a min-1 item.
    """
    rubric = rubric or DEFAULT_RUBRIC
    if not 0 <= target <= 100:
        raise ValidationError(f"target score {target} out of range")
    remaining = 100 - target
    plan = sorted(rubric.items, key=lambda i: -i.min_deduction)
    out: list[list] = []
    for item in plan:
        if remaining <= 0:
            break
        if remaining >= item.min_deduction:
            take = min(item.max_deduction, remaining)
            out.append([item.item_id, take])
            remaining -= take
    if remaining != 0:
        raise ValidationError(f"rubric cannot express a deduction of {100 - target}")
    return out


def _split_reverse(total: int) -> dict[str, int]:
    base, extra = divmod(total, 4)
    criteria = ("completeness", "constructiveness", "fairness", "clarity")
    return {c: base + (1 if i < extra else 0) for i, c in enumerate(criteria)}


def generate_class(spec: ArchetypeSpec, seed: int, task_count: int = 12) -> SyntheticClass:
    """Deterministically cast students, archetypes, and true program quality."""
    rng = random.Random(seed)
    students = tuple(f"s{i:02d}" for i in range(1, spec.class_size + 1))
    labels = (
        ["honest"] * spec.honest
        + ["radical_high"] * spec.radical_high
        + ["radical_low"] * spec.radical_low
        + ["low_competence"] * spec.low_competence
    )
    rng.shuffle(labels)
    archetypes = dict(zip(students, labels))
    advanced = frozenset(rng.sample(students, spec.advanced_authors))
    quality = tuple(
        {
            s: _clamp(
                rng.gauss(spec.advanced_quality_mean, spec.advanced_quality_sd)
                if s in advanced
                else rng.gauss(spec.base_quality_mean, spec.base_quality_sd)
            )
            for s in students
        }
        for _ in range(task_count)
    )
    return SyntheticClass(
        spec=spec,
        seed=seed,
        students=students,
        archetypes=archetypes,
        advanced=advanced,
        quality=quality,
    )


def _draw_review(
    rng: random.Random, spec: ArchetypeSpec, archetype: str, true: float, advanced: bool
) -> tuple[int, bool | None]:
    """One synthesized code score plus the comprehension flag, if drawn."""
    comprehended: bool | None = None
    if archetype == "honest":
        base = true
        if advanced:
            comprehended = rng.random() < spec.comprehension_prob
            if not comprehended:
                base = true - spec.comprehension_gap
        value = base + rng.gauss(0, spec.sigma_h)
    elif archetype == "radical_high":
        value = spec.radical_high_score + rng.gauss(0, spec.sigma_r)
    elif archetype == "radical_low":
        value = spec.radical_low_score + rng.gauss(0, spec.sigma_r)
    elif archetype == "low_competence":
        value = true + spec.bias + rng.gauss(0, spec.sigma_l)
    else:
        raise ValidationError(f"unknown archetype {archetype!r}")
    return int(round(_clamp(value))), comprehended


# ---------------------------------------------------------------------------
# semester runner
# ---------------------------------------------------------------------------


def run_semester(
    cls: SyntheticClass,
    task_count: int | None = None,
    k: int = 5,
    detector: DetectorConfig | None = None,
) -> SemesterOutputs:
    """Drive the full pipeline for every task, all submissions on time."""
    if task_count is None:
        task_count = len(cls.quality)
    if task_count > len(cls.quality):
        raise ValidationError(
            f"class was generated with {len(cls.quality)} tasks, not {task_count}"
        )
    spec = cls.spec
    rng = random.Random(cls.seed + 1)  # review noise; class casting used cls.seed
    engine = CourseEngine(detector=detector)
    engine.add_students(RosterEntry(s, f"Student {s[1:]}") for s in cls.students)

    results: list[FinalizeResult] = []
    review_log: list[ReviewEvent] = []
    for index in range(task_count):
        start = _SIM_START + timedelta(days=7 * index)
        task = engine.create_task(
            f"assignment {index + 1}",
            deadlines={
                "source": start + timedelta(days=1),
                "review": start + timedelta(days=3),
                "reverse": start + timedelta(days=5),
                "revision": start + timedelta(days=6),
            },
            fan_out_k=k,
        )
        tid = task.task_id
        engine.advance_task(tid)
        assignment = engine.assign_reviewers(tid, seed=cls.seed * 1000 + index)
        for student in cls.students:
            engine.submit_document(
                tid, "source", student, payload={"text": "code"}, now=start + timedelta(hours=6)
            )
        engine.advance_task(tid)
        truth = cls.quality[index]
        given_scores: dict[tuple[str, str], int] = {}
        for reviewer, author in assignment.pairs:
            given, comprehended = _draw_review(
                rng, spec, cls.archetypes[reviewer], truth[author], author in cls.advanced
            )
            engine.submit_document(
                tid,
                "review",
                reviewer,
                author,
                payload={"deductions": deductions_for_score(given)},
                now=start + timedelta(days=2),
            )
            given_scores[(reviewer, author)] = given
            review_log.append(
                ReviewEvent(
                    task_id=tid,
                    reviewer_id=reviewer,
                    author_id=author,
                    given=given,
                    true_quality=truth[author],
                    comprehended=comprehended,
                )
            )
        engine.advance_task(tid)
        for reviewer, author in assignment.pairs:
            # authors rate a review by how close it landed to the truth
            total = int(round(_clamp(100 - abs(given_scores[(reviewer, author)] - truth[author]))))
            engine.submit_document(
                tid,
                "reverse",
                author,
                reviewer,
                payload={"criterion_scores": _split_reverse(total)},
                now=start + timedelta(days=4),
            )
        for student in cls.students:
            engine.submit_document(
                tid, "revision", student, payload={"text": "v2"}, now=start + timedelta(days=4)
            )
        results.append(engine.finalize_task(tid, now=start + timedelta(days=7)))
    return SemesterOutputs(engine=engine, results=results, review_log=review_log)


# ---------------------------------------------------------------------------
# detection metrics
# ---------------------------------------------------------------------------


def evaluate_detection(outputs: SemesterOutputs, cls: SyntheticClass) -> DetectionMetrics:
    """Score the detectors against the planted ground truth."""
    planted = tuple(
        sorted(s for s, a in cls.archetypes.items() if a.startswith("radical"))
    )
    precision = recall = None
    ranks: tuple[tuple[str, int], ...] = ()
    report = outputs.engine.radicalness_report
    if planted and report is not None and report.entries:
        order = [e.reviewer_id for e in report.entries]
        missing = [s for s in planted if s not in order]
        if missing:
            raise ValidationError(
                f"planted reviewers absent from the radicalness report: {missing}"
            )
        top = set(order[: len(planted)])
        hits = len(top & set(planted))
        precision = hits / len(planted)
        recall = hits / len(planted)
        ranks = tuple((s, order.index(s) + 1) for s in planted)

    adv_total = adv_flagged = reg_total = reg_flagged = 0
    for result in outputs.results:
        flagged = {e.author_id for e in result.consensus.flagged}
        for entry in result.consensus.entries:
            if entry.author_id in cls.advanced:
                adv_total += 1
                adv_flagged += entry.author_id in flagged
            else:
                reg_total += 1
                reg_flagged += entry.author_id in flagged

    comprehenders: dict[str, list[ReviewEvent]] = {}
    for ev in outputs.review_log:
        if ev.comprehended is True:
            comprehenders.setdefault(ev.task_id, []).append(ev)
    false_penalties = 0
    engine = outputs.engine
    for result in outputs.results:
        task = result.task
        events = comprehenders.get(task.task_id)
        if not events:
            continue
        groups = engine._review_groups(task.task_id)
        deltas = engine._group_deltas(task, groups)
        delta_of = {
            (author, d.reviewer_id): d.delta
            for author, ds in deltas.items()
            for d in ds
        }
        false_penalties += sum(
            1
            for ev in events
            if delta_of.get((ev.author_id, ev.reviewer_id), 0.0) < 0
        )

    return DetectionMetrics(
        planted_radicals=planted,
        radicalness_precision=precision,
        radicalness_recall=recall,
        planted_ranks=ranks,
        arbitration_rate_advanced=(adv_flagged / adv_total) if adv_total else None,
        arbitration_rate_regular=(reg_flagged / reg_total) if reg_total else None,
        comprehender_false_penalties=false_penalties,
    )


def run_simulation(
    spec: ArchetypeSpec,
    seed: int,
    task_count: int = 12,
    k: int = 5,
    detector: DetectorConfig | None = None,
) -> tuple[SyntheticClass, SemesterOutputs, DetectionMetrics]:
    """Generate, run, and evaluate one simulated semester."""
    cls = generate_class(spec, seed, task_count=task_count)
    outputs = run_semester(cls, task_count=task_count, k=k, detector=detector)
    return cls, outputs, evaluate_detection(outputs, cls)
