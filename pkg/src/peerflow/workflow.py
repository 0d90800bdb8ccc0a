"""Task lifecycle for peer-assessed programming assignments.

One :class:`CourseEngine` owns the roster, the tasks, and everything derived
from them.  A task moves strictly forward through draft -> collecting ->
reviewing -> responding -> finalized; each document kind is only accepted
while its phase is open, and lateness is judged against the task's deadlines,
inclusive, in UTC.  Finalization runs the whole scoring pipeline: review-group
bonuses, consensus ranking with arbitration flags, per-student score sheets,
and the class-wide radicalness watchlist.
"""

from __future__ import annotations

import random
import threading
from dataclasses import dataclass
from datetime import datetime, timezone
from enum import Enum
from typing import Iterable, Mapping, Sequence

from .consensus import (
    ConsensusReport,
    DetectorConfig,
    RadicalnessReport,
    flag_arbitration,
    rank_groups,
    rank_radicalness,
)
from .errors import (
    AuthorizationError,
    NotFoundError,
    StateError,
    ValidationError,
)
from .scoring import (
    DEFAULT_RUBRIC,
    BonusDelta,
    MotivationParams,
    ReviewGroup,
    Rubric,
    ScoreSheet,
    WeightConfig,
    compute_bonus,
    overall_score,
    score_code_review,
    score_reverse_review,
)

# ---------------------------------------------------------------------------
# lifecycle vocabulary
# ---------------------------------------------------------------------------


class TaskState(str, Enum):
    DRAFT = "draft"
    COLLECTING = "collecting"
    REVIEWING = "reviewing"
    RESPONDING = "responding"
    FINALIZED = "finalized"


_STATE_ORDER = [
    TaskState.DRAFT,
    TaskState.COLLECTING,
    TaskState.REVIEWING,
    TaskState.RESPONDING,
    TaskState.FINALIZED,
]

KINDS = ("source", "review", "reverse", "revision")

# Which document kinds each state accepts.
_ADMITS = {
    TaskState.DRAFT: frozenset(),
    TaskState.COLLECTING: frozenset({"source"}),
    TaskState.REVIEWING: frozenset({"review"}),
    TaskState.RESPONDING: frozenset({"reverse", "revision"}),
    TaskState.FINALIZED: frozenset(),
}


def _utc(value: datetime) -> datetime:
    if value.tzinfo is None:
        return value.replace(tzinfo=timezone.utc)
    return value.astimezone(timezone.utc)


# ---------------------------------------------------------------------------
# records
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RosterEntry:
    student_id: str
    name: str
    role: str = "student"

    def __post_init__(self) -> None:
        if not self.student_id:
            raise ValidationError("student_id must be non-empty")
        if self.role not in ("student", "teacher"):
            raise ValidationError(f"unknown role {self.role!r}")


@dataclass
class Task:
    task_id: str
    title: str
    deadlines: dict[str, datetime]
    fan_out_k: int
    params: MotivationParams
    weights: WeightConfig
    state: TaskState = TaskState.DRAFT


@dataclass(frozen=True)
class Assignment:
    """Who reviews whom for one task; pairs are (reviewer, author)."""

    task_id: str
    seed: int
    pairs: tuple[tuple[str, str], ...]

    def authors_of(self, reviewer_id: str) -> list[str]:
        return [a for r, a in self.pairs if r == reviewer_id]

    def reviewers_of(self, author_id: str) -> list[str]:
        return [r for r, a in self.pairs if a == author_id]


@dataclass
class Submission:
    task_id: str
    kind: str
    submitter_id: str
    counterpart_id: str | None
    payload: dict
    submitted_at: datetime
    on_time: bool
    score: int | None = None  # code score for reviews, criterion total for reverses


@dataclass(frozen=True)
class Override:
    """One teacher decision inside an arbitration resolution.

    ``kind`` is "bonus" (replace the reviewer's delta from this group) or
    "code_score" (replace the score this reviewer gave the author).
    """

    reviewer_id: str
    kind: str
    value: float

    def __post_init__(self) -> None:
        if self.kind not in ("bonus", "code_score"):
            raise ValidationError(f"unknown override kind {self.kind!r}")
        if isinstance(self.value, bool) or not isinstance(self.value, (int, float)):
            raise ValidationError("override value must be a number")
        if self.kind == "code_score" and (
            not float(self.value).is_integer() or not 0 <= self.value <= 100
        ):
            raise ValidationError("code_score override must be an integer in [0, 100]")


@dataclass
class ArbitrationCase:
    case_id: str
    task_id: str
    author_id: str
    z_at_flag: float
    status: str = "open"  # open | resolved
    teacher_actions: tuple[Override, ...] = ()
    resolution_note: str = ""


@dataclass(frozen=True)
class WarningRecord:
    reviewer_id: str
    z_r: float
    note: str
    issued_at: datetime


@dataclass
class FinalizeResult:
    task: Task
    sheets: dict[str, ScoreSheet]
    consensus: ConsensusReport
    radicalness: RadicalnessReport
    new_cases: list[ArbitrationCase]


# ---------------------------------------------------------------------------
# engine
# ---------------------------------------------------------------------------


class CourseEngine:
    """All state for one course, mutated under a single lock.

    The engine never reads the wall clock on its own: callers pass ``now``
    (the HTTP/CLI layer defaults it to the current UTC time), which keeps
    every computation replayable.
    """

    def __init__(
        self,
        rubric: Rubric | None = None,
        detector: DetectorConfig | None = None,
        default_params: MotivationParams | None = None,
        default_weights: WeightConfig | None = None,
    ) -> None:
        self.rubric = rubric or DEFAULT_RUBRIC
        self.detector = detector or DetectorConfig()
        self.default_params = default_params or MotivationParams()
        self.default_weights = default_weights or WeightConfig()

        self.roster: dict[str, RosterEntry] = {}
        self.tasks: dict[str, Task] = {}
        self.assignments: dict[str, Assignment] = {}
        # task_id -> (kind, submitter, counterpart) -> Submission
        self.submissions: dict[str, dict[tuple[str, str, str | None], Submission]] = {}
        self.sheets: dict[str, dict[str, ScoreSheet]] = {}
        self.consensus_reports: dict[str, ConsensusReport] = {}
        self.radicalness_report: RadicalnessReport | None = None
        self.cases: dict[str, ArbitrationCase] = {}
        self.warnings: list[WarningRecord] = []

        self.version = 0
        self._task_seq = 0
        self._case_seq = 0
        self._lock = threading.RLock()

    # -- roster ------------------------------------------------------------

    def add_students(self, entries: Iterable[RosterEntry]) -> list[RosterEntry]:
        with self._lock:
            added = []
            seen = set(self.roster)
            for entry in entries:
                if entry.student_id in seen:
                    raise ValidationError(f"duplicate student id {entry.student_id!r}")
                seen.add(entry.student_id)
                added.append(entry)
            for entry in added:
                self.roster[entry.student_id] = entry
            self.version += 1
            return added

    def student_ids(self) -> list[str]:
        return sorted(
            sid for sid, e in self.roster.items() if e.role == "student"
        )

    # -- task lifecycle ------------------------------------------------------

    def create_task(
        self,
        title: str,
        deadlines: Mapping[str, datetime],
        fan_out_k: int,
        params: MotivationParams | None = None,
        weights: WeightConfig | None = None,
    ) -> Task:
        if fan_out_k < 1:
            raise ValidationError("fan_out_k must be at least 1")
        missing = [k for k in KINDS if k not in deadlines]
        if missing:
            raise ValidationError(f"missing deadlines: {', '.join(missing)}")
        dl = {k: _utc(deadlines[k]) for k in KINDS}
        if not dl["source"] < dl["review"] < min(dl["reverse"], dl["revision"]):
            raise ValidationError(
                "deadlines must satisfy source < review < min(reverse, revision)"
            )
        with self._lock:
            self._task_seq += 1
            task = Task(
                task_id=f"t{self._task_seq}",
                title=title,
                deadlines=dl,
                fan_out_k=fan_out_k,
                params=params or self.default_params,
                weights=weights or self.default_weights,
            )
            self.tasks[task.task_id] = task
            self.submissions[task.task_id] = {}
            self.version += 1
            return task

    def get_task(self, task_id: str) -> Task:
        try:
            return self.tasks[task_id]
        except KeyError:
            raise NotFoundError(f"no task {task_id!r}") from None

    def advance_task(self, task_id: str) -> Task:
        """Move a task one state forward (finalized is reached only through
        finalize_task)."""
        with self._lock:
            task = self.get_task(task_id)
            idx = _STATE_ORDER.index(task.state)
            if task.state in (TaskState.RESPONDING, TaskState.FINALIZED):
                raise StateError(
                    f"cannot advance task {task_id!r} from {task.state.value}"
                )
            task.state = _STATE_ORDER[idx + 1]
            self.version += 1
            return task

    # -- assignment ----------------------------------------------------------

    def assign_reviewers(self, task_id: str, seed: int) -> Assignment:
        """Deterministic ring assignment: shuffle the roster with the seed,
        then student i reviews the next k students around the ring."""
        with self._lock:
            task = self.get_task(task_id)
            if task.state == TaskState.DRAFT:
                raise StateError("task must be collecting before assignment")
            if task.state == TaskState.FINALIZED:
                raise StateError("task already finalized")
            if task_id in self.assignments:
                raise StateError(f"task {task_id!r} already has an assignment")
            students = self.student_ids()
            n = len(students)
            if n <= task.fan_out_k:
                raise ValidationError(
                    f"need more than k={task.fan_out_k} students, have {n}"
                )
            ring = list(students)
            random.Random(seed).shuffle(ring)
            pairs = tuple(
                (ring[i], ring[(i + j) % n])
                for i in range(n)
                for j in range(1, task.fan_out_k + 1)
            )
            assignment = Assignment(task_id=task_id, seed=seed, pairs=pairs)
            self.assignments[task_id] = assignment
            self.version += 1
            return assignment

    def get_assignment(self, task_id: str) -> Assignment:
        self.get_task(task_id)
        try:
            return self.assignments[task_id]
        except KeyError:
            raise NotFoundError(f"task {task_id!r} has no assignment") from None

    # -- submissions ----------------------------------------------------------

    def _find(self, task_id, kind, submitter, counterpart) -> Submission | None:
        return self.submissions[task_id].get((kind, submitter, counterpart))

    def submit_document(
        self,
        task_id: str,
        kind: str,
        submitter_id: str,
        counterpart_id: str | None = None,
        payload: Mapping | None = None,
        now: datetime | None = None,
    ) -> Submission:
        """Accept one document into its slot.

        Sources and revisions have no counterpart; a review names the author
        under review and a reverse review names the reviewer being assessed.
        A slot may be resubmitted freely until its deadline (the new upload
        replaces the old); after the deadline a first submission is stored as
        late, but replacing an existing one is rejected.
        """
        if kind not in KINDS:
            raise ValidationError(f"unknown document kind {kind!r}")
        payload = dict(payload or {})
        now = _utc(now or datetime.now(timezone.utc))
        with self._lock:
            task = self.get_task(task_id)
            if kind not in _ADMITS[task.state]:
                raise StateError(
                    f"task {task_id!r} in state {task.state.value!r} does not "
                    f"accept {kind!r} submissions"
                )
            entry = self.roster.get(submitter_id)
            if entry is None or entry.role != "student":
                raise NotFoundError(f"no student {submitter_id!r} in roster")

            score: int | None = None
            if kind in ("source", "revision"):
                if counterpart_id is not None:
                    raise ValidationError(f"{kind} submissions take no counterpart")
                if kind == "revision" and not self._find(
                    task_id, "source", submitter_id, None
                ):
                    raise ValidationError(
                        f"{submitter_id!r} has no source submission to revise"
                    )
            elif kind == "review":
                assignment = self.get_assignment(task_id)
                if counterpart_id is None:
                    raise ValidationError("review submissions must name the author")
                if (submitter_id, counterpart_id) not in assignment.pairs:
                    raise AuthorizationError(
                        f"{submitter_id!r} is not assigned to review {counterpart_id!r}"
                    )
                if not self._find(task_id, "source", counterpart_id, None):
                    raise ValidationError(
                        f"author {counterpart_id!r} has not submitted a source"
                    )
                try:
                    deductions = [(str(i), p) for i, p in payload.get("deductions", [])]
                except (TypeError, ValueError):
                    raise ValidationError(
                        "deductions must be a list of [item_id, points] pairs"
                    ) from None
                score = score_code_review(deductions, self.rubric)
                payload = {
                    "deductions": [[i, p] for i, p in deductions],
                    "comments": str(payload.get("comments", "")),
                }
            else:  # reverse
                assignment = self.get_assignment(task_id)
                if counterpart_id is None:
                    raise ValidationError(
                        "reverse reviews must name the reviewer being assessed"
                    )
                if (counterpart_id, submitter_id) not in assignment.pairs:
                    raise AuthorizationError(
                        f"{counterpart_id!r} is not a reviewer of {submitter_id!r}"
                    )
                if not self._find(task_id, "review", counterpart_id, submitter_id):
                    raise ValidationError(
                        f"{counterpart_id!r} has not reviewed {submitter_id!r} yet"
                    )
                try:
                    criterion_scores = dict(payload.get("criterion_scores", {}))
                except (TypeError, ValueError):
                    raise ValidationError(
                        "criterion_scores must map criterion ids to points"
                    ) from None
                score = score_reverse_review(criterion_scores, self.rubric)
                payload = {"criterion_scores": criterion_scores}

            deadline = task.deadlines[kind]
            key = (kind, submitter_id, counterpart_id)
            if key in self.submissions[task_id] and now > deadline:
                raise StateError(
                    f"slot {key} already submitted; resubmission past the deadline"
                )
            submission = Submission(
                task_id=task_id,
                kind=kind,
                submitter_id=submitter_id,
                counterpart_id=counterpart_id,
                payload=payload,
                submitted_at=now,
                on_time=now <= deadline,
                score=score,
            )
            self.submissions[task_id][key] = submission
            self.version += 1
            return submission

    # -- finalization ----------------------------------------------------------

    def _review_groups(self, task_id: str) -> list[ReviewGroup]:
        """One group per author who received at least one review, with any
        resolved code-score overrides already applied."""
        overrides = self._score_overrides(task_id)
        by_author: dict[str, list[tuple[str, int]]] = {}
        for (kind, submitter, counterpart), sub in self.submissions[task_id].items():
            if kind != "review":
                continue
            score = overrides.get((counterpart, submitter), sub.score)
            by_author.setdefault(counterpart, []).append((submitter, score))
        return [
            ReviewGroup(task_id=task_id, author_id=author, entries=tuple(sorted(entries)))
            for author, entries in sorted(by_author.items())
        ]

    def _score_overrides(self, task_id: str) -> dict[tuple[str, str], int]:
        """(author, reviewer) -> replacement code score, from resolved cases."""
        out: dict[tuple[str, str], int] = {}
        for case in self.cases.values():
            if case.task_id != task_id or case.status != "resolved":
                continue
            for action in case.teacher_actions:
                if action.kind == "code_score":
                    out[(case.author_id, action.reviewer_id)] = int(action.value)
        return out

    def _bonus_overrides(self, task_id: str) -> dict[tuple[str, str], float]:
        """(author, reviewer) -> replacement bonus delta, from resolved cases."""
        out: dict[tuple[str, str], float] = {}
        for case in self.cases.values():
            if case.task_id != task_id or case.status != "resolved":
                continue
            for action in case.teacher_actions:
                if action.kind == "bonus":
                    out[(case.author_id, action.reviewer_id)] = float(action.value)
        return out

    def _group_deltas(
        self, task: Task, groups: Sequence[ReviewGroup]
    ) -> dict[str, list[BonusDelta]]:
        """author -> deltas for that author's group, teacher overrides applied."""
        bonus_overrides = self._bonus_overrides(task.task_id)
        out: dict[str, list[BonusDelta]] = {}
        for group in groups:
            deltas = compute_bonus(group, task.params)
            out[group.author_id] = [
                BonusDelta(
                    d.reviewer_id,
                    bonus_overrides.get((group.author_id, d.reviewer_id), d.delta),
                )
                for d in deltas
            ]
        return out

    def _build_sheets(self, task: Task) -> dict[str, ScoreSheet]:
        task_id = task.task_id
        assignment = self.assignments[task_id]
        groups = self._review_groups(task_id)
        group_of = {g.author_id: g for g in groups}
        deltas = self._group_deltas(task, groups)
        subs = self.submissions[task_id]

        def done(kind, submitter, counterpart=None) -> bool:
            sub = subs.get((kind, submitter, counterpart))
            return bool(sub and sub.on_time)

        sheets: dict[str, ScoreSheet] = {}
        for student in self.student_ids():
            sheet = ScoreSheet(student_id=student, task_id=task_id)
            sheet.source_done = done("source", student)
            sheet.revision_done = done("revision", student)
            sheet.review_done = [
                done("review", student, author)
                for author in assignment.authors_of(student)
            ]
            # Reverse duties exist only for reviews that actually arrived:
            # an author cannot assess a review that was never written.
            received = [
                r
                for r in sorted(assignment.reviewers_of(student))
                if ("review", r, student) in subs
            ]
            sheet.reverse_done = [done("reverse", student, r) for r in received]
            own_group = group_of.get(student)
            sheet.code_scores_received = (
                [s for _, s in own_group.entries] if own_group else []
            )
            sheet.review_scores_received = [
                sub.score
                for (kind, submitter, counterpart), sub in sorted(subs.items())
                if kind == "reverse" and counterpart == student
            ]
            sheet.review_bonuses = [
                d
                for author in sorted(deltas)
                for d in deltas[author]
                if d.reviewer_id == student
            ]
            sheet.overall = overall_score(sheet, task.weights, strict=False)
            sheets[student] = sheet
        return sheets

    def _review_histories(self) -> dict[str, dict[str, list[int]]]:
        """reviewer -> task -> scores given, over all finalized tasks."""
        histories: dict[str, dict[str, list[int]]] = {}
        for task_id in sorted(self.tasks):
            if self.tasks[task_id].state != TaskState.FINALIZED:
                continue
            for (kind, submitter, counterpart), sub in sorted(
                self.submissions[task_id].items()
            ):
                if kind != "review":
                    continue
                histories.setdefault(submitter, {}).setdefault(task_id, []).append(
                    sub.score
                )
        return histories

    def finalize_task(
        self,
        task_id: str,
        now: datetime | None = None,
        force: bool = False,
    ) -> FinalizeResult:
        """Close a task and compute everything that hangs off it.

        Requires every deadline to be in the past unless the teacher forces
        it.  Missing submissions are not scored 0 into the means — they are
        simply absent — but every missing duty stays False in the process
        flags.
        """
        now = _utc(now or datetime.now(timezone.utc))
        with self._lock:
            task = self.get_task(task_id)
            if task.state == TaskState.FINALIZED:
                raise StateError(f"task {task_id!r} already finalized")
            if task_id not in self.assignments:
                raise StateError(f"task {task_id!r} has no assignment")
            if not force and now <= max(task.deadlines.values()):
                raise StateError(
                    f"task {task_id!r} deadlines have not all passed; "
                    "use force to finalize early"
                )
            if not any(
                kind == "source" for kind, _, _ in self.submissions[task_id]
            ):
                raise StateError(f"task {task_id!r} has zero source submissions")

            self.version += 1
            groups = self._review_groups(task_id)
            report = rank_groups(
                task_id,
                groups,
                band_width=self.detector.band_width,
                pooling_size=self.detector.pooling_size,
                snapshot_version=self.version,
            )
            report = flag_arbitration(report, self.detector.arbitration_threshold)
            self.consensus_reports[task_id] = report

            new_cases = []
            existing = {
                (c.task_id, c.author_id) for c in self.cases.values()
            }
            for entry in report.flagged:
                if (task_id, entry.author_id) in existing:
                    continue
                self._case_seq += 1
                case = ArbitrationCase(
                    case_id=f"c{self._case_seq}",
                    task_id=task_id,
                    author_id=entry.author_id,
                    z_at_flag=entry.z,
                )
                self.cases[case.case_id] = case
                new_cases.append(case)

            task.state = TaskState.FINALIZED
            self.sheets[task_id] = self._build_sheets(task)
            self.radicalness_report = rank_radicalness(
                self._review_histories(),
                warn_threshold=self.detector.warn_threshold,
                min_reviews=self.detector.min_warn_reviews,
                snapshot_version=self.version,
            )
            return FinalizeResult(
                task=task,
                sheets=self.sheets[task_id],
                consensus=report,
                radicalness=self.radicalness_report,
                new_cases=new_cases,
            )

    # -- arbitration -------------------------------------------------------

    def get_case(self, case_id: str) -> ArbitrationCase:
        try:
            return self.cases[case_id]
        except KeyError:
            raise NotFoundError(f"no arbitration case {case_id!r}") from None

    def resolve_arbitration(
        self,
        case_id: str,
        overrides: Sequence[Override],
        note: str,
    ) -> dict[str, ScoreSheet]:
        """Apply teacher decisions to a flagged group and recompute scores.

        Overrides may replace a reviewer's bonus delta or the code score they
        gave; either way the teacher's value wins over the computed one from
        now on.  An empty override list with a note resolves the case as-is.
        """
        if not note or not note.strip():
            raise ValidationError("a resolution note is required")
        with self._lock:
            case = self.get_case(case_id)
            if case.status != "open":
                raise StateError(f"case {case_id!r} already resolved")
            reviewers = {
                submitter
                for (kind, submitter, counterpart) in self.submissions[case.task_id]
                if kind == "review" and counterpart == case.author_id
            }
            for o in overrides:
                if o.reviewer_id not in reviewers:
                    raise ValidationError(
                        f"{o.reviewer_id!r} did not review {case.author_id!r} "
                        f"in task {case.task_id!r}"
                    )
            case.teacher_actions = tuple(overrides)
            case.resolution_note = note
            case.status = "resolved"
            self.version += 1
            task = self.get_task(case.task_id)
            self.sheets[case.task_id] = self._build_sheets(task)
            return self.sheets[case.task_id]

    def open_cases(self) -> list[ArbitrationCase]:
        return sorted(
            (c for c in self.cases.values() if c.status == "open"),
            key=lambda c: c.case_id,
        )

    def under_arbitration(self, task_id: str, student_id: str) -> bool:
        """True while the student's score for this task may still move: they
        authored a flagged group, or reviewed one, and the case is open."""
        for case in self.cases.values():
            if case.task_id != task_id or case.status != "open":
                continue
            if case.author_id == student_id:
                return True
            if ("review", student_id, case.author_id) in self.submissions[task_id]:
                return True
        return False

    # -- warnings ------------------------------------------------------

    def issue_warning(
        self, reviewer_id: str, note: str, now: datetime | None = None
    ) -> WarningRecord:
        """Record a radical-scoring warning against a reviewer.

        The reviewer must appear in the current radicalness report — warnings
        always reference a computed entry, never a hunch.
        """
        with self._lock:
            report = self.radicalness_report
            entry = None
            if report is not None:
                entry = next(
                    (e for e in report.entries if e.reviewer_id == reviewer_id), None
                )
            if entry is None:
                raise ValidationError(
                    f"{reviewer_id!r} is not in the current radicalness report"
                )
            record = WarningRecord(
                reviewer_id=reviewer_id,
                z_r=entry.z_r,
                note=note,
                issued_at=_utc(now or datetime.now(timezone.utc)),
            )
            self.warnings.append(record)
            self.version += 1
            return record

    def warnings_for(self, reviewer_id: str) -> list[WarningRecord]:
        return [w for w in self.warnings if w.reviewer_id == reviewer_id]

    # -- views ------------------------------------------------------

    def get_sheet(self, task_id: str, student_id: str) -> ScoreSheet:
        self.get_task(task_id)
        if student_id not in self.roster:
            raise NotFoundError(f"no student {student_id!r} in roster")
        try:
            return self.sheets[task_id][student_id]
        except KeyError:
            raise NotFoundError(
                f"no sheet for {student_id!r} in task {task_id!r} (not finalized?)"
            ) from None

    def score_rows(self, task_id: str) -> list[dict]:
        """Flat per-student score rows for one finalized task."""
        task = self.get_task(task_id)
        if task.state != TaskState.FINALIZED:
            raise StateError(f"task {task_id!r} is not finalized")
        rows = []
        for student in self.student_ids():
            sheet = self.sheets[task_id][student]
            rows.append(
                {
                    "student_id": student,
                    "task_id": task_id,
                    "source_done": sheet.source_done,
                    "revision_done": sheet.revision_done,
                    "reviews_done": sum(sheet.review_done),
                    "reviews_assigned": len(sheet.review_done),
                    "reverses_done": sum(sheet.reverse_done),
                    "reverses_expected": len(sheet.reverse_done),
                    "code_score_mean": (
                        round(
                            sum(sheet.code_scores_received)
                            / len(sheet.code_scores_received),
                            2,
                        )
                        if sheet.code_scores_received
                        else None
                    ),
                    "review_score_mean": (
                        round(
                            sum(sheet.review_scores_received)
                            / len(sheet.review_scores_received),
                            2,
                        )
                        if sheet.review_scores_received
                        else None
                    ),
                    "review_bonus_total": round(
                        sum(b.delta for b in sheet.review_bonuses), 2
                    ),
                    "overall": round(sheet.overall, 2),
                    "under_arbitration": self.under_arbitration(task_id, student),
                }
            )
        return rows
