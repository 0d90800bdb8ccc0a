"""HTTP service over the course engine.

Authentication is a static token table: every request carries an
``X-Auth-Token`` header that maps to either the teacher or one student.
Teachers drive the lifecycle (tasks, assignments, finalization, arbitration,
warnings); students submit documents into their own slots and read their own
sheets.  Every successful mutation is snapshotted to disk when the app is
constructed with a snapshot path, so a restart resumes where the course
left off.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from datetime import datetime
from pathlib import Path

from fastapi import Depends, FastAPI, Header, HTTPException
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field

from .errors import (
    AuthorizationError,
    NotFoundError,
    PeerFlowError,
    StateError,
    ValidationError,
)
from .scoring import MotivationParams, ScoreSheet, WeightConfig
from .storage import save_snapshot
from .workflow import ArbitrationCase, CourseEngine, Override, Submission, Task

# ---------------------------------------------------------------------------
# authentication
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Principal:
    """Resolved identity of one request: the teacher or a single student."""

    role: str
    student_id: str | None = None

    def __post_init__(self) -> None:
        if self.role not in ("teacher", "student"):
            raise ValidationError(f"unknown principal role {self.role!r}")
        if self.role == "student" and not self.student_id:
            raise ValidationError("student principals need a student_id")


def load_tokens(path: str | Path) -> dict[str, Principal]:
    """Read a token table: {"<token>": {"role": ..., "student_id": ...}}."""
    with open(path, encoding="utf-8") as fh:
        raw = json.load(fh)
    return {
        token: Principal(role=spec["role"], student_id=spec.get("student_id"))
        for token, spec in raw.items()
    }


# ---------------------------------------------------------------------------
# request bodies
# ---------------------------------------------------------------------------


class TaskBody(BaseModel):
    title: str
    deadlines: dict[str, datetime]
    fan_out_k: int = Field(ge=1)
    params: dict | None = None
    weights: dict | None = None


class AssignBody(BaseModel):
    seed: int


class SubmissionBody(BaseModel):
    kind: str
    counterpart_id: str | None = None
    payload: dict = Field(default_factory=dict)


class FinalizeBody(BaseModel):
    force: bool = False


class OverrideBody(BaseModel):
    reviewer_id: str
    kind: str
    value: float


class ResolveBody(BaseModel):
    overrides: list[OverrideBody] = Field(default_factory=list)
    note: str


class WarnBody(BaseModel):
    reviewer_id: str
    note: str


# ---------------------------------------------------------------------------
# payload builders
# ---------------------------------------------------------------------------


def task_payload(task: Task, has_assignment: bool = False) -> dict:
    return {
        "task_id": task.task_id,
        "title": task.title,
        "state": task.state.value,
        "fan_out_k": task.fan_out_k,
        "deadlines": {k: v.isoformat() for k, v in task.deadlines.items()},
        "has_assignment": has_assignment,
    }


def submission_payload(sub: Submission) -> dict:
    return {
        "task_id": sub.task_id,
        "kind": sub.kind,
        "submitter_id": sub.submitter_id,
        "counterpart_id": sub.counterpart_id,
        "submitted_at": sub.submitted_at.isoformat(),
        "on_time": sub.on_time,
        "score": sub.score,
    }


def sheet_payload(sheet: ScoreSheet) -> dict:
    return {
        "student_id": sheet.student_id,
        "task_id": sheet.task_id,
        "source_done": sheet.source_done,
        "revision_done": sheet.revision_done,
        "review_done": list(sheet.review_done),
        "reverse_done": list(sheet.reverse_done),
        "code_scores_received": list(sheet.code_scores_received),
        "review_scores_received": list(sheet.review_scores_received),
        "review_bonuses": [round(b.delta, 2) for b in sheet.review_bonuses],
        "review_bonus_total": round(sum(b.delta for b in sheet.review_bonuses), 2),
        "overall": round(sheet.overall, 2) if sheet.overall is not None else None,
    }


def _case_payload(engine: CourseEngine, case: ArbitrationCase) -> dict:
    task = engine.get_task(case.task_id)
    groups = engine._review_groups(case.task_id)
    deltas = engine._group_deltas(task, groups)
    group = next((g for g in groups if g.author_id == case.author_id), None)
    entries = []
    if group is not None:
        by_reviewer = {d.reviewer_id: d.delta for d in deltas[group.author_id]}
        entries = [
            {
                "reviewer_id": reviewer,
                "score": score,
                "delta": round(by_reviewer[reviewer], 2),
            }
            for reviewer, score in group.entries
        ]
    return {
        "case_id": case.case_id,
        "task_id": case.task_id,
        "author_id": case.author_id,
        "z_at_flag": round(case.z_at_flag, 2),
        "status": case.status,
        "resolution_note": case.resolution_note,
        "overrides": [
            {"reviewer_id": o.reviewer_id, "kind": o.kind, "value": o.value}
            for o in case.teacher_actions
        ],
        "group": entries,
    }


# ---------------------------------------------------------------------------
# application factory
# ---------------------------------------------------------------------------


def create_app(
    engine: CourseEngine,
    tokens: dict[str, Principal],
    snapshot_path: str | Path | None = None,
) -> FastAPI:
    app = FastAPI(title="peerflow", version="0.1.0")
    app.state.engine = engine
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )

    def persist() -> None:
        if snapshot_path is not None:
            save_snapshot(engine, snapshot_path)

    def principal(x_auth_token: str | None = Header(default=None)) -> Principal:
        if x_auth_token is None or x_auth_token not in tokens:
            raise HTTPException(status_code=401, detail="missing or unknown token")
        return tokens[x_auth_token]

    def teacher(caller: Principal = Depends(principal)) -> Principal:
        if caller.role != "teacher":
            raise HTTPException(status_code=403, detail="teacher token required")
        return caller

    def student(caller: Principal = Depends(principal)) -> Principal:
        if caller.role != "student":
            raise HTTPException(status_code=403, detail="student token required")
        return caller

    @app.exception_handler(PeerFlowError)
    def _domain_error(request, exc: PeerFlowError):
        if isinstance(exc, NotFoundError):
            code = 404
        elif isinstance(exc, StateError):
            code = 409
        elif isinstance(exc, AuthorizationError):
            code = 403
        else:
            code = 400
        return JSONResponse(status_code=code, content={"detail": str(exc)})

    # -- health / reference data (read-only) -------------------------------

    @app.get("/health")
    def health():
        return {"status": "ok", "version": engine.version}

    @app.get("/rubric")
    def rubric(caller: Principal = Depends(principal)):
        return engine.rubric.to_dict()

    # -- tasks ---------------------------------------------------------------

    @app.post("/tasks", status_code=201)
    def create_task(body: TaskBody, caller: Principal = Depends(teacher)):
        try:
            params = MotivationParams(**body.params) if body.params else None
            weights = WeightConfig(**body.weights) if body.weights else None
        except TypeError as exc:
            raise ValidationError(str(exc)) from None
        task = engine.create_task(
            title=body.title,
            deadlines=body.deadlines,
            fan_out_k=body.fan_out_k,
            params=params,
            weights=weights,
        )
        persist()
        return task_payload(task)

    @app.get("/tasks")
    def list_tasks(caller: Principal = Depends(principal)):
        return {
            "tasks": [
                task_payload(t, has_assignment=t.task_id in engine.assignments)
                for _, t in sorted(engine.tasks.items())
            ]
        }

    @app.get("/tasks/{task_id}")
    def get_task(task_id: str, caller: Principal = Depends(principal)):
        task = engine.get_task(task_id)
        return task_payload(task, has_assignment=task_id in engine.assignments)

    @app.post("/tasks/{task_id}/advance")
    def advance_task(task_id: str, caller: Principal = Depends(teacher)):
        task = engine.advance_task(task_id)
        persist()
        return task_payload(task, has_assignment=task_id in engine.assignments)

    @app.post("/tasks/{task_id}/assignments", status_code=201)
    def assign(task_id: str, body: AssignBody, caller: Principal = Depends(teacher)):
        assignment = engine.assign_reviewers(task_id, seed=body.seed)
        persist()
        return {
            "task_id": assignment.task_id,
            "seed": assignment.seed,
            "pairs": [[r, a] for r, a in assignment.pairs],
        }

    @app.post("/tasks/{task_id}/submissions", status_code=201)
    def submit(task_id: str, body: SubmissionBody, caller: Principal = Depends(student)):
        sub = engine.submit_document(
            task_id=task_id,
            kind=body.kind,
            submitter_id=caller.student_id,
            counterpart_id=body.counterpart_id,
            payload=body.payload,
        )
        persist()
        return submission_payload(sub)

    @app.get("/tasks/{task_id}/slots")
    def slots(task_id: str, caller: Principal = Depends(student)):
        """The caller's work for one task: review slots and reviews received."""
        me = caller.student_id
        task = engine.get_task(task_id)
        subs = engine.submissions[task_id]
        assignment = engine.assignments.get(task_id)
        review_slots = []
        reverse_slots = []
        if assignment is not None:
            for author in assignment.authors_of(me):
                review = subs.get(("review", me, author))
                review_slots.append(
                    {
                        "author_id": author,
                        "source_submitted": ("source", author, None) in subs,
                        "review_submitted": review is not None,
                        "score": review.score if review else None,
                    }
                )
            for reviewer in sorted(assignment.reviewers_of(me)):
                review = subs.get(("review", reviewer, me))
                if review is None:
                    continue
                reverse_slots.append(
                    {
                        "reviewer_id": reviewer,
                        "review": review.payload | {"score": review.score},
                        "reverse_submitted": ("reverse", me, reviewer) in subs,
                    }
                )
        return {
            "task_id": task_id,
            "state": task.state.value,
            "source_submitted": ("source", me, None) in subs,
            "revision_submitted": ("revision", me, None) in subs,
            "review_slots": review_slots,
            "reverse_slots": reverse_slots,
        }

    @app.post("/tasks/{task_id}/finalize")
    def finalize(
        task_id: str,
        body: FinalizeBody | None = None,
        caller: Principal = Depends(teacher),
    ):
        result = engine.finalize_task(task_id, force=body.force if body else False)
        persist()
        return {
            "task": task_payload(result.task, has_assignment=True),
            "new_cases": [_case_payload(engine, c) for c in result.new_cases],
            "consensus": result.consensus.to_payload(),
            "radicalness": result.radicalness.to_payload(),
        }

    @app.get("/tasks/{task_id}/scores")
    def scores(task_id: str, caller: Principal = Depends(teacher)):
        return {"task_id": task_id, "rows": engine.score_rows(task_id)}

    @app.get("/tasks/{task_id}/consensus")
    def consensus(task_id: str, caller: Principal = Depends(teacher)):
        engine.get_task(task_id)
        report = engine.consensus_reports.get(task_id)
        if report is None:
            raise NotFoundError(f"task {task_id!r} has no consensus report yet")
        return report.to_payload()

    # -- reports / arbitration / warnings ----------------------------------

    @app.get("/radicalness")
    def radicalness(caller: Principal = Depends(teacher)):
        report = engine.radicalness_report
        if report is None:
            return {
                "snapshot_version": engine.version,
                "warn_threshold": engine.detector.warn_threshold,
                "min_reviews": engine.detector.min_warn_reviews,
                "entries": [],
                "warn_candidates": [],
            }
        return report.to_payload()

    @app.get("/arbitrations")
    def arbitrations(status: str = "open", caller: Principal = Depends(teacher)):
        if status not in ("open", "resolved", "all"):
            raise ValidationError(f"unknown status filter {status!r}")
        cases = sorted(engine.cases.values(), key=lambda c: c.case_id)
        if status != "all":
            cases = [c for c in cases if c.status == status]
        return {"cases": [_case_payload(engine, c) for c in cases]}

    @app.post("/arbitrations/{case_id}/resolve")
    def resolve(case_id: str, body: ResolveBody, caller: Principal = Depends(teacher)):
        overrides = [
            Override(reviewer_id=o.reviewer_id, kind=o.kind, value=o.value)
            for o in body.overrides
        ]
        engine.resolve_arbitration(case_id, overrides, note=body.note)
        persist()
        case = engine.get_case(case_id)
        return {
            "case": _case_payload(engine, case),
            "rows": engine.score_rows(case.task_id),
        }

    @app.post("/warnings", status_code=201)
    def warn(body: WarnBody, caller: Principal = Depends(teacher)):
        record = engine.issue_warning(body.reviewer_id, body.note)
        persist()
        return {
            "reviewer_id": record.reviewer_id,
            "z_r": round(record.z_r, 2),
            "note": record.note,
            "issued_at": record.issued_at.isoformat(),
        }

    # -- sheets ------------------------------------------------------------

    @app.get("/students/{student_id}/sheet")
    def sheet(task: str, student_id: str, caller: Principal = Depends(principal)):
        if caller.role != "teacher" and caller.student_id != student_id:
            raise HTTPException(
                status_code=403, detail="students may only read their own sheet"
            )
        found = engine.get_sheet(task, student_id)
        payload = sheet_payload(found)
        payload["under_arbitration"] = engine.under_arbitration(task, student_id)
        return payload

    return app


def run_server(
    engine: CourseEngine,
    tokens: dict[str, Principal],
    snapshot_path: str | Path | None = None,
    host: str = "127.0.0.1",
    port: int = 8000,
) -> None:
    """Serve the API with uvicorn (blocking)."""
    import uvicorn

    app = create_app(engine, tokens, snapshot_path=snapshot_path)
    uvicorn.run(app, host=host, port=port, log_level="warning")
