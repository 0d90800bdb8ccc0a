"""Shared fixtures for driving the engine in tests."""

from __future__ import annotations

from datetime import datetime, timedelta, timezone

from peerflow.consensus import DetectorConfig
from peerflow.workflow import CourseEngine, RosterEntry

BASE = datetime(2026, 3, 2, 12, 0, 0, tzinfo=timezone.utc)

DEADLINES = {
    "source": BASE + timedelta(days=1),
    "review": BASE + timedelta(days=3),
    "reverse": BASE + timedelta(days=5),
    "revision": BASE + timedelta(days=6),
}

AFTER_ALL = BASE + timedelta(days=7)

# Greedy deduction plans: order matters so that any remainder can always be
# absorbed by an item whose minimum is 1.
_PLAN = [
    ("proven_nonworking", 20, 40),
    ("suspected_nonworking", 15, 25),
    ("naming", 1, 20),
    ("layout", 1, 20),
    ("header_comment", 2, 10),
    ("block_comment", 2, 10),
    ("line_comment", 2, 10),
]


def deductions_for_score(target: int) -> list[tuple[str, int]]:
    """A valid deduction list under the default rubric totalling 100-target."""
    remaining = 100 - target
    out = []
    for item, lo, hi in _PLAN:
        if remaining <= 0:
            break
        if remaining >= lo:
            take = min(hi, remaining)
            out.append((item, take))
            remaining -= take
    if remaining != 0:
        raise AssertionError(f"no deduction plan for target {target}")
    return out


def flat_reverse(total: int = 80) -> dict[str, int]:
    """Four criterion scores summing to ``total`` (0..100)."""
    base, extra = divmod(total, 4)
    scores = {}
    for i, cid in enumerate(["completeness", "constructiveness", "fairness", "clarity"]):
        scores[cid] = base + (1 if i < extra else 0)
    return scores


def make_engine(n_students: int = 6, **kwargs) -> CourseEngine:
    engine = CourseEngine(**kwargs)
    engine.add_students(
        RosterEntry(f"s{i:02d}", f"Student {i}") for i in range(1, n_students + 1)
    )
    return engine


def run_full_task(
    engine: CourseEngine,
    k: int = 5,
    seed: int = 7,
    review_score: int = 80,
    reverse_total: int = 80,
):
    """Create one task and drive it through a fully on-time semester step."""
    task = engine.create_task("assignment", DEADLINES, fan_out_k=k)
    tid = task.task_id
    engine.advance_task(tid)  # collecting
    assignment = engine.assign_reviewers(tid, seed=seed)
    t_src = BASE + timedelta(hours=6)
    for student in engine.student_ids():
        engine.submit_document(tid, "source", student, payload={"text": "code"}, now=t_src)
    engine.advance_task(tid)  # reviewing
    t_rev = BASE + timedelta(days=2)
    for reviewer, author in assignment.pairs:
        engine.submit_document(
            tid,
            "review",
            reviewer,
            author,
            payload={"deductions": deductions_for_score(review_score), "comments": "ok"},
            now=t_rev,
        )
    engine.advance_task(tid)  # responding
    t_resp = BASE + timedelta(days=4)
    for reviewer, author in assignment.pairs:
        engine.submit_document(
            tid,
            "reverse",
            author,
            reviewer,
            payload={"criterion_scores": flat_reverse(reverse_total)},
            now=t_resp,
        )
    for student in engine.student_ids():
        engine.submit_document(tid, "revision", student, payload={"text": "v2"}, now=t_resp)
    return task, assignment


def run_finalized_task(
    engine: CourseEngine,
    k: int = 2,
    seed: int = 7,
    review_score: int = 80,
    reverse_total: int = 80,
):
    """One fully on-time task, finalized after all deadlines."""
    task, _ = run_full_task(
        engine, k=k, seed=seed, review_score=review_score, reverse_total=reverse_total
    )
    return engine.finalize_task(task.task_id, now=AFTER_ALL)


def build_divergent_course(threshold: float = 13.0):
    """Six students, k=5: s01's program gets {95, 60, 58, 62, 61}.

    Returns (engine, finalize result, id of the reviewer who scored 95).
    """
    engine = make_engine(6, detector=DetectorConfig(arbitration_threshold=threshold))
    task = engine.create_task("a1", DEADLINES, fan_out_k=5)
    tid = task.task_id
    engine.advance_task(tid)
    assignment = engine.assign_reviewers(tid, seed=5)
    for s in engine.student_ids():
        engine.submit_document(tid, "source", s, now=BASE + timedelta(hours=1))
    engine.advance_task(tid)
    divergent = dict(
        zip(
            sorted(r for r, a in assignment.pairs if a == "s01"),
            [95, 60, 58, 62, 61],
        )
    )
    for reviewer, author in assignment.pairs:
        score = divergent[reviewer] if author == "s01" else 80
        engine.submit_document(
            tid,
            "review",
            reviewer,
            author,
            payload={"deductions": deductions_for_score(score)},
            now=BASE + timedelta(days=2),
        )
    engine.advance_task(tid)
    for reviewer, author in assignment.pairs:
        engine.submit_document(
            tid,
            "reverse",
            author,
            reviewer,
            payload={"criterion_scores": flat_reverse()},
            now=BASE + timedelta(days=4),
        )
    for s in engine.student_ids():
        engine.submit_document(tid, "revision", s, now=BASE + timedelta(days=4))
    result = engine.finalize_task(tid, now=AFTER_ALL)
    outlier = next(r for r, s in divergent.items() if s == 95)
    return engine, result, outlier
