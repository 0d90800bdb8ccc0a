#!/usr/bin/env python3
"""Start a peerflow service preloaded for the UI end-to-end tests.

The fixture course has six students and two finished tasks:

* ``t1`` is finalized with two open arbitration cases.  The review groups for
  s01 and s02 were chosen so their score spreads round to 35.42 and 32.29 —
  both above the default arbitration threshold of 30 — while every other
  group scored a flat 80 and stays quiet.
* ``t2`` is live in the reviewing state with deadlines a day out, so student
  tokens can keep posting reviews and the tests can compare the client-side
  preview against the server's authoritative score.

Prints ``READY <port>`` on stdout once the server is listening.
"""

from __future__ import annotations

import argparse
import math
import socket
import sys
from datetime import datetime, timedelta, timezone

import uvicorn

from peerflow import CourseEngine, RosterEntry
from peerflow.api import Principal, create_app
from peerflow.simulate import deductions_for_score

BASE = datetime(2026, 3, 2, 12, 0, tzinfo=timezone.utc)

# Five-score groups whose population spread rounds to the published values.
CASE_SCORES = {
    "s01": (100, 0, 7, 30, 30),  # sd 35.4153 -> 35.42
    "s02": (100, 0, 36, 37, 37),  # sd 32.2924 -> 32.29
}
FLAT_REVERSE = {
    "completeness": 20,
    "constructiveness": 20,
    "fairness": 20,
    "clarity": 20,
}

STUDENTS = [f"s{i:02d}" for i in range(1, 7)]

TOKENS = {
    "e2e-teacher": Principal(role="teacher"),
    **{f"e2e-{s}": Principal(role="student", student_id=s) for s in STUDENTS},
}


def _spread(scores) -> float:
    mean = sum(scores) / len(scores)
    return math.sqrt(sum((x - mean) ** 2 for x in scores) / len(scores))


def _deadlines(start: datetime) -> dict[str, datetime]:
    return {
        "source": start + timedelta(days=1),
        "review": start + timedelta(days=3),
        "reverse": start + timedelta(days=5),
        "revision": start + timedelta(days=6),
    }


def build_engine() -> CourseEngine:
    for author, scores in CASE_SCORES.items():
        rounded = round(_spread(scores), 2)
        expected = {"s01": 35.42, "s02": 32.29}[author]
        assert rounded == expected, f"{author}: spread {rounded} != {expected}"

    engine = CourseEngine()
    engine.add_students([RosterEntry(s, f"Student {s[1:]}") for s in STUDENTS])

    # t1: full past lifecycle, finalized with the two seeded cases.
    t1 = engine.create_task(title="sorting kata", deadlines=_deadlines(BASE), fan_out_k=5)
    engine.advance_task(t1.task_id)
    now = BASE + timedelta(hours=1)
    for s in STUDENTS:
        engine.submit_document(t1.task_id, "source", s, payload={"text": f"code by {s}"}, now=now)
    engine.advance_task(t1.task_id)
    assignment = engine.assign_reviewers(t1.task_id, seed=7)
    now = BASE + timedelta(days=2)
    for author in STUDENTS:
        reviewers = sorted(assignment.reviewers_of(author))
        scores = CASE_SCORES.get(author, (80,) * len(reviewers))
        for reviewer, score in zip(reviewers, scores):
            engine.submit_document(
                t1.task_id,
                "review",
                reviewer,
                counterpart_id=author,
                payload={"deductions": [list(d) for d in deductions_for_score(score)]},
                now=now,
            )
    engine.advance_task(t1.task_id)
    now = BASE + timedelta(days=4)
    for author in STUDENTS:
        for reviewer in sorted(assignment.reviewers_of(author)):
            engine.submit_document(
                t1.task_id,
                "reverse",
                author,
                counterpart_id=reviewer,
                payload={"criterion_scores": dict(FLAT_REVERSE)},
                now=now,
            )
        engine.submit_document(
            t1.task_id, "revision", author, payload={"text": "revised"}, now=now
        )
    result = engine.finalize_task(t1.task_id, now=BASE + timedelta(days=7))
    assert len(result.new_cases) == 2, f"expected 2 cases, got {len(result.new_cases)}"

    # t2: live reviewing-state task the tests submit against over HTTP.
    start = datetime.now(timezone.utc)
    t2 = engine.create_task(title="graph kata", deadlines=_deadlines(start), fan_out_k=5)
    engine.advance_task(t2.task_id)
    for s in STUDENTS:
        engine.submit_document(t2.task_id, "source", s, payload={"text": f"code by {s}"})
    engine.advance_task(t2.task_id)
    engine.assign_reviewers(t2.task_id, seed=7)
    return engine


def pick_port() -> int:
    with socket.socket() as sock:
        sock.bind(("127.0.0.1", 0))
        return sock.getsockname()[1]


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--port", type=int, default=0, help="0 picks a free port")
    args = parser.parse_args()
    port = args.port or pick_port()
    app = create_app(build_engine(), TOKENS)
    print(f"READY {port}", flush=True)
    uvicorn.run(app, host="127.0.0.1", port=port, log_level="warning")


if __name__ == "__main__":
    sys.exit(main())
