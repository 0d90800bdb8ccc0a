"""Snapshot persistence and CSV import/export for the course engine.

All state lives in one JSON document written atomically (temp file in the
same directory, fsync, rename), so a crash mid-write never leaves a torn
snapshot behind.  Timestamps are stored as ISO 8601 UTC strings and floats
round-trip exactly through JSON's shortest-repr encoding, which makes a
save/load cycle structurally lossless.
"""

from __future__ import annotations

import csv
import json
import os
import tempfile
from dataclasses import asdict
from datetime import datetime
from pathlib import Path

from .consensus import (
    ConsensusReport,
    DetectorConfig,
    GroupDeviation,
    RadicalnessReport,
    ReviewerRadicalness,
)
from .errors import ValidationError
from .scoring import (
    BonusDelta,
    MotivationParams,
    Rubric,
    ScoreSheet,
    WeightConfig,
)
from .workflow import (
    ArbitrationCase,
    Assignment,
    CourseEngine,
    Override,
    RosterEntry,
    Submission,
    Task,
    TaskState,
    WarningRecord,
)

SCHEMA_VERSION = 1


# ---------------------------------------------------------------------------
# encoding
# ---------------------------------------------------------------------------


def _iso(value: datetime) -> str:
    return value.isoformat()


def _encode_task(task: Task) -> dict:
    return {
        "task_id": task.task_id,
        "title": task.title,
        "deadlines": {k: _iso(v) for k, v in task.deadlines.items()},
        "fan_out_k": task.fan_out_k,
        "params": asdict(task.params),
        "weights": asdict(task.weights),
        "state": task.state.value,
    }


def _encode_submission(sub: Submission) -> dict:
    return {
        "task_id": sub.task_id,
        "kind": sub.kind,
        "submitter_id": sub.submitter_id,
        "counterpart_id": sub.counterpart_id,
        "payload": sub.payload,
        "submitted_at": _iso(sub.submitted_at),
        "on_time": sub.on_time,
        "score": sub.score,
    }


def _encode_sheet(sheet: ScoreSheet) -> dict:
    return {
        "student_id": sheet.student_id,
        "task_id": sheet.task_id,
        "source_done": sheet.source_done,
        "revision_done": sheet.revision_done,
        "review_done": list(sheet.review_done),
        "reverse_done": list(sheet.reverse_done),
        "code_scores_received": list(sheet.code_scores_received),
        "review_scores_received": list(sheet.review_scores_received),
        "review_bonuses": [[b.reviewer_id, b.delta] for b in sheet.review_bonuses],
        "overall": sheet.overall,
    }


def _encode_deviation(dev: GroupDeviation) -> dict:
    return {
        "task_id": dev.task_id,
        "author_id": dev.author_id,
        "z": dev.z,
        "group_size": dev.group_size,
        "pooled": dev.pooled,
        "raw_z": dev.raw_z,
    }


def _encode_consensus(report: ConsensusReport) -> dict:
    return {
        "task_id": report.task_id,
        "entries": [_encode_deviation(e) for e in report.entries],
        "threshold": report.threshold,
        "flagged": [_encode_deviation(e) for e in report.flagged],
        "snapshot_version": report.snapshot_version,
    }


def _encode_radicalness_entry(entry: ReviewerRadicalness) -> dict:
    return {
        "reviewer_id": entry.reviewer_id,
        "z_r": entry.z_r,
        "review_count": entry.review_count,
        "per_task_means": [[t, m] for t, m in entry.per_task_means],
    }


def _encode_radicalness(report: RadicalnessReport) -> dict:
    return {
        "entries": [_encode_radicalness_entry(e) for e in report.entries],
        "warn_threshold": report.warn_threshold,
        "min_reviews": report.min_reviews,
        "warn_candidates": [_encode_radicalness_entry(e) for e in report.warn_candidates],
        "snapshot_version": report.snapshot_version,
    }


def _encode_case(case: ArbitrationCase) -> dict:
    return {
        "case_id": case.case_id,
        "task_id": case.task_id,
        "author_id": case.author_id,
        "z_at_flag": case.z_at_flag,
        "status": case.status,
        "teacher_actions": [asdict(a) for a in case.teacher_actions],
        "resolution_note": case.resolution_note,
    }


def snapshot_engine(engine: CourseEngine) -> dict:
    """Serialize the whole engine into a JSON-safe dictionary."""
    with engine._lock:
        return {
            "schema_version": SCHEMA_VERSION,
            "version": engine.version,
            "task_seq": engine._task_seq,
            "case_seq": engine._case_seq,
            "rubric": engine.rubric.to_dict(),
            "detector": asdict(engine.detector),
            "default_params": asdict(engine.default_params),
            "default_weights": asdict(engine.default_weights),
            "roster": [asdict(e) for e in engine.roster.values()],
            "tasks": [_encode_task(t) for t in engine.tasks.values()],
            "assignments": [
                {
                    "task_id": a.task_id,
                    "seed": a.seed,
                    "pairs": [[r, au] for r, au in a.pairs],
                }
                for a in engine.assignments.values()
            ],
            "submissions": {
                task_id: [_encode_submission(s) for s in subs.values()]
                for task_id, subs in engine.submissions.items()
            },
            "sheets": {
                task_id: {
                    student: _encode_sheet(sheet)
                    for student, sheet in sheets.items()
                }
                for task_id, sheets in engine.sheets.items()
            },
            "consensus_reports": {
                task_id: _encode_consensus(r)
                for task_id, r in engine.consensus_reports.items()
            },
            "radicalness_report": (
                _encode_radicalness(engine.radicalness_report)
                if engine.radicalness_report is not None
                else None
            ),
            "cases": [_encode_case(c) for c in engine.cases.values()],
            "warnings": [
                {
                    "reviewer_id": w.reviewer_id,
                    "z_r": w.z_r,
                    "note": w.note,
                    "issued_at": _iso(w.issued_at),
                }
                for w in engine.warnings
            ],
        }


# ---------------------------------------------------------------------------
# decoding
# ---------------------------------------------------------------------------


def _decode_sheet(data: dict) -> ScoreSheet:
    return ScoreSheet(
        student_id=data["student_id"],
        task_id=data["task_id"],
        source_done=data["source_done"],
        revision_done=data["revision_done"],
        review_done=list(data["review_done"]),
        reverse_done=list(data["reverse_done"]),
        code_scores_received=list(data["code_scores_received"]),
        review_scores_received=list(data["review_scores_received"]),
        review_bonuses=[BonusDelta(r, d) for r, d in data["review_bonuses"]],
        overall=data["overall"],
    )


def _decode_deviation(data: dict) -> GroupDeviation:
    return GroupDeviation(
        task_id=data["task_id"],
        author_id=data["author_id"],
        z=data["z"],
        group_size=data["group_size"],
        pooled=data["pooled"],
        raw_z=data["raw_z"],
    )


def _decode_consensus(data: dict) -> ConsensusReport:
    return ConsensusReport(
        task_id=data["task_id"],
        entries=tuple(_decode_deviation(e) for e in data["entries"]),
        threshold=data["threshold"],
        flagged=tuple(_decode_deviation(e) for e in data["flagged"]),
        snapshot_version=data["snapshot_version"],
    )


def _decode_radicalness_entry(data: dict) -> ReviewerRadicalness:
    return ReviewerRadicalness(
        reviewer_id=data["reviewer_id"],
        z_r=data["z_r"],
        review_count=data["review_count"],
        per_task_means=tuple((t, m) for t, m in data["per_task_means"]),
    )


def _decode_radicalness(data: dict) -> RadicalnessReport:
    return RadicalnessReport(
        entries=tuple(_decode_radicalness_entry(e) for e in data["entries"]),
        warn_threshold=data["warn_threshold"],
        min_reviews=data["min_reviews"],
        warn_candidates=tuple(
            _decode_radicalness_entry(e) for e in data["warn_candidates"]
        ),
        snapshot_version=data["snapshot_version"],
    )


def restore_engine(data: dict) -> CourseEngine:
    """Rebuild a :class:`CourseEngine` from :func:`snapshot_engine` output."""
    found = data.get("schema_version")
    if found != SCHEMA_VERSION:
        raise ValidationError(
            f"snapshot schema {found!r} is not supported (expected {SCHEMA_VERSION})"
        )
    engine = CourseEngine(
        rubric=Rubric.from_dict(data["rubric"]),
        detector=DetectorConfig(**data["detector"]),
        default_params=MotivationParams(**data["default_params"]),
        default_weights=WeightConfig(**data["default_weights"]),
    )
    engine.version = data["version"]
    engine._task_seq = data["task_seq"]
    engine._case_seq = data["case_seq"]
    engine.roster = {
        e["student_id"]: RosterEntry(**e) for e in data["roster"]
    }
    for t in data["tasks"]:
        engine.tasks[t["task_id"]] = Task(
            task_id=t["task_id"],
            title=t["title"],
            deadlines={
                k: datetime.fromisoformat(v) for k, v in t["deadlines"].items()
            },
            fan_out_k=t["fan_out_k"],
            params=MotivationParams(**t["params"]),
            weights=WeightConfig(**t["weights"]),
            state=TaskState(t["state"]),
        )
    for a in data["assignments"]:
        engine.assignments[a["task_id"]] = Assignment(
            task_id=a["task_id"],
            seed=a["seed"],
            pairs=tuple((r, au) for r, au in a["pairs"]),
        )
    for task_id, subs in data["submissions"].items():
        slot = engine.submissions.setdefault(task_id, {})
        for s in subs:
            sub = Submission(
                task_id=s["task_id"],
                kind=s["kind"],
                submitter_id=s["submitter_id"],
                counterpart_id=s["counterpart_id"],
                payload=s["payload"],
                submitted_at=datetime.fromisoformat(s["submitted_at"]),
                on_time=s["on_time"],
                score=s["score"],
            )
            slot[(sub.kind, sub.submitter_id, sub.counterpart_id)] = sub
    engine.sheets = {
        task_id: {
            student: _decode_sheet(sheet) for student, sheet in sheets.items()
        }
        for task_id, sheets in data["sheets"].items()
    }
    engine.consensus_reports = {
        task_id: _decode_consensus(r)
        for task_id, r in data["consensus_reports"].items()
    }
    if data["radicalness_report"] is not None:
        engine.radicalness_report = _decode_radicalness(data["radicalness_report"])
    for c in data["cases"]:
        engine.cases[c["case_id"]] = ArbitrationCase(
            case_id=c["case_id"],
            task_id=c["task_id"],
            author_id=c["author_id"],
            z_at_flag=c["z_at_flag"],
            status=c["status"],
            teacher_actions=tuple(Override(**a) for a in c["teacher_actions"]),
            resolution_note=c["resolution_note"],
        )
    engine.warnings = [
        WarningRecord(
            reviewer_id=w["reviewer_id"],
            z_r=w["z_r"],
            note=w["note"],
            issued_at=datetime.fromisoformat(w["issued_at"]),
        )
        for w in data["warnings"]
    ]
    return engine


# ---------------------------------------------------------------------------
# files
# ---------------------------------------------------------------------------


def save_snapshot(engine: CourseEngine, path: str | Path) -> Path:
    """Write the engine state to ``path`` atomically and return the path."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    data = snapshot_engine(engine)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            json.dump(data, fh, indent=2)
            fh.write("\n")
            fh.flush()
            os.fsync(fh.fileno())
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except FileNotFoundError:
            pass
        raise
    return path


def load_snapshot(path: str | Path) -> CourseEngine:
    """Load an engine from a snapshot file written by :func:`save_snapshot`."""
    with open(path, encoding="utf-8") as fh:
        data = json.load(fh)
    return restore_engine(data)


# ---------------------------------------------------------------------------
# CSV import / export
# ---------------------------------------------------------------------------

_ROSTER_FIELDS = ("student_id", "name", "role")


def import_class(engine: CourseEngine, path: str | Path) -> list[RosterEntry]:
    """Load a class roster from a CSV file with header student_id,name[,role]."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        missing = [f for f in ("student_id", "name") if f not in header]
        if missing:
            raise ValidationError(
                f"roster csv is missing columns: {', '.join(missing)}"
            )
        entries = [
            RosterEntry(
                student_id=(row["student_id"] or "").strip(),
                name=(row["name"] or "").strip(),
                role=(row.get("role") or "student").strip() or "student",
            )
            for row in reader
        ]
    return engine.add_students(entries)


def export_scores(engine: CourseEngine, path: str | Path) -> int:
    """Write one CSV row per student per finalized task; returns the row count."""
    finalized = [
        task_id
        for task_id in sorted(engine.tasks)
        if engine.tasks[task_id].state == TaskState.FINALIZED
    ]
    rows = [row for task_id in finalized for row in engine.score_rows(task_id)]
    fieldnames = [
        "student_id",
        "task_id",
        "source_done",
        "revision_done",
        "reviews_done",
        "reviews_assigned",
        "reverses_done",
        "reverses_expected",
        "code_score_mean",
        "review_score_mean",
        "review_bonus_total",
        "overall",
        "under_arbitration",
    ]
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.DictWriter(fh, fieldnames=fieldnames)
        writer.writeheader()
        writer.writerows(rows)
    return len(rows)
