"""Administrative command line over one snapshot file.

Every command loads the course from ``--state``, applies one operation, and
writes the snapshot back.  Documents themselves are submitted over HTTP (see
``peerflow serve``); the CLI covers the teacher-side lifecycle, reports, and
the simulator.
"""

from __future__ import annotations

import functools
import json
from datetime import datetime
from pathlib import Path

import click

from .api import load_tokens, run_server
from .consensus import DetectorConfig
from .errors import PeerFlowError
from .simulate import ArchetypeSpec, run_simulation
from .storage import export_scores, import_class, load_snapshot, save_snapshot
from .workflow import CourseEngine, Override


class IsoDateTime(click.ParamType):
    name = "iso-datetime"

    def convert(self, value, param, ctx):
        try:
            return datetime.fromisoformat(value)
        except ValueError:
            self.fail(f"{value!r} is not an ISO 8601 datetime", param, ctx)


ISO = IsoDateTime()


def forward_errors(fn):
    """Turn domain errors into clean messages with a nonzero exit code."""

    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except PeerFlowError as exc:
            raise click.ClickException(str(exc)) from exc

    return wrapper


def _load(path: Path, must_exist: bool = True) -> CourseEngine:
    if path.exists():
        return load_snapshot(path)
    if must_exist:
        raise click.ClickException(f"no course state at {path}")
    return CourseEngine()


@click.group()
@click.option(
    "--state",
    "state_path",
    type=click.Path(path_type=Path),
    default=Path("course.json"),
    show_default=True,
    help="Snapshot file holding all course state.",
)
@click.pass_context
def main(ctx: click.Context, state_path: Path) -> None:
    """Peer-assessment course administration."""
    ctx.obj = state_path


@main.command("import-class")
@click.argument("roster", type=click.Path(exists=True, path_type=Path))
@click.pass_obj
@forward_errors
def import_class_cmd(state_path: Path, roster: Path) -> None:
    """Add roster entries from a CSV file (student_id,name[,role])."""
    engine = _load(state_path, must_exist=False)
    added = import_class(engine, roster)
    save_snapshot(engine, state_path)
    click.echo(f"imported {len(added)} roster entries")


@main.command("create-task")
@click.option("--title", required=True)
@click.option("--source", type=ISO, required=True, help="Source-code deadline.")
@click.option("--review", type=ISO, required=True, help="Code-review deadline.")
@click.option("--reverse", type=ISO, required=True, help="Reverse-review deadline.")
@click.option("--revision", type=ISO, required=True, help="Revision deadline.")
@click.option("--k", "fan_out_k", type=int, default=5, show_default=True,
              help="Reviewers per submission.")
@click.pass_obj
@forward_errors
def create_task_cmd(state_path, title, source, review, reverse, revision, fan_out_k):
    """Create a task (it starts in draft; advance it to open collection)."""
    engine = _load(state_path, must_exist=False)
    task = engine.create_task(
        title,
        deadlines={
            "source": source,
            "review": review,
            "reverse": reverse,
            "revision": revision,
        },
        fan_out_k=fan_out_k,
    )
    save_snapshot(engine, state_path)
    click.echo(f"created {task.task_id} ({task.state.value})")


@main.command("advance")
@click.argument("task_id")
@click.pass_obj
@forward_errors
def advance_cmd(state_path: Path, task_id: str) -> None:
    """Move a task to its next phase."""
    engine = _load(state_path)
    task = engine.advance_task(task_id)
    save_snapshot(engine, state_path)
    click.echo(f"{task.task_id} is now {task.state.value}")


@main.command("assign")
@click.argument("task_id")
@click.option("--seed", type=int, required=True, help="Shuffle seed; same seed, same pairs.")
@click.pass_obj
@forward_errors
def assign_cmd(state_path: Path, task_id: str, seed: int) -> None:
    """Assign k reviewers to every student's submission."""
    engine = _load(state_path)
    assignment = engine.assign_reviewers(task_id, seed=seed)
    save_snapshot(engine, state_path)
    click.echo(f"assigned {len(assignment.pairs)} review pairs for {task_id}")


@main.command("finalize")
@click.argument("task_id")
@click.option("--force", is_flag=True, help="Finalize before all deadlines have passed.")
@click.pass_obj
@forward_errors
def finalize_cmd(state_path: Path, task_id: str, force: bool) -> None:
    """Close a task: compute bonuses, sheets, reports, and open cases."""
    engine = _load(state_path)
    result = engine.finalize_task(task_id, force=force)
    save_snapshot(engine, state_path)
    click.echo(f"finalized {task_id}: {len(result.sheets)} sheets")
    for case in result.new_cases:
        click.echo(
            f"  opened {case.case_id}: author {case.author_id}, z={case.z_at_flag:.2f}"
        )


@main.command("consensus")
@click.argument("task_id")
@click.pass_obj
@forward_errors
def consensus_cmd(state_path: Path, task_id: str) -> None:
    """Print a task's review-group disagreement report as JSON."""
    engine = _load(state_path)
    engine.get_task(task_id)
    report = engine.consensus_reports.get(task_id)
    if report is None:
        raise click.ClickException(f"task {task_id!r} has no consensus report yet")
    click.echo(json.dumps(report.to_payload(), indent=2))


@main.command("radicalness")
@click.pass_obj
@forward_errors
def radicalness_cmd(state_path: Path) -> None:
    """Print the class-wide reviewer radicalness report as JSON."""
    engine = _load(state_path)
    report = engine.radicalness_report
    if report is None:
        raise click.ClickException("no radicalness report yet (finalize a task first)")
    click.echo(json.dumps(report.to_payload(), indent=2))


def _parse_override(text: str) -> tuple[str, str, float]:
    parts = text.split(":")
    if len(parts) != 3:
        raise click.BadParameter(f"{text!r} (expected reviewer:kind:value)")
    reviewer, kind, raw = parts
    try:
        value = float(raw)
    except ValueError:
        raise click.BadParameter(f"{raw!r} is not a number") from None
    return reviewer, kind, value


@main.command("resolve")
@click.argument("case_id")
@click.option("--note", required=True, help="Resolution note (required).")
@click.option(
    "--override",
    "overrides",
    multiple=True,
    help="reviewer:kind:value, e.g. s05:bonus:2 or s05:code_score:90; repeatable.",
)
@click.pass_obj
@forward_errors
def resolve_cmd(state_path: Path, case_id: str, note: str, overrides: tuple[str, ...]):
    """Resolve an arbitration case, optionally overriding scores or bonuses."""
    engine = _load(state_path)
    parsed = [
        Override(reviewer_id=r, kind=k, value=v)
        for r, k, v in (_parse_override(o) for o in overrides)
    ]
    engine.resolve_arbitration(case_id, parsed, note=note)
    save_snapshot(engine, state_path)
    case = engine.get_case(case_id)
    click.echo(f"resolved {case_id} ({case.task_id}, author {case.author_id})")


@main.command("warn")
@click.argument("reviewer_id")
@click.option("--note", required=True, help="What the reviewer is being warned about.")
@click.pass_obj
@forward_errors
def warn_cmd(state_path: Path, reviewer_id: str, note: str) -> None:
    """Record a radical-scoring warning against a reviewer."""
    engine = _load(state_path)
    record = engine.issue_warning(reviewer_id, note)
    save_snapshot(engine, state_path)
    click.echo(f"warned {reviewer_id} (z_r={record.z_r:.2f})")


@main.command("export")
@click.argument("out", type=click.Path(path_type=Path))
@click.pass_obj
@forward_errors
def export_cmd(state_path: Path, out: Path) -> None:
    """Write per-student, per-task score rows to a CSV file."""
    engine = _load(state_path)
    count = export_scores(engine, out)
    click.echo(f"wrote {count} rows to {out}")


@main.command("simulate")
@click.option("--honest", type=int, default=29, show_default=True)
@click.option("--radical-high", type=int, default=1, show_default=True)
@click.option("--radical-low", type=int, default=0, show_default=True)
@click.option("--low-competence", type=int, default=0, show_default=True)
@click.option("--advanced-authors", type=int, default=0, show_default=True)
@click.option("--sigma-h", type=float, default=8.0, show_default=True)
@click.option("--sigma-r", type=float, default=1.0, show_default=True)
@click.option("--bias", type=float, default=-20.0, show_default=True)
@click.option("--sigma-l", type=float, default=15.0, show_default=True)
@click.option("--comprehension-prob", type=float, default=0.2, show_default=True)
@click.option("--comprehension-gap", type=float, default=30.0, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--tasks", "task_count", type=int, default=12, show_default=True)
@click.option("--k", type=int, default=5, show_default=True)
@click.option("--arbitration-threshold", type=float, default=30.0, show_default=True)
@click.option("--metrics-out", type=click.Path(path_type=Path), default=None,
              help="Also write the metrics JSON to this file.")
@click.option("--scores-out", type=click.Path(path_type=Path), default=None,
              help="Also write the simulated score rows to this CSV file.")
@click.pass_obj
@forward_errors
def simulate_cmd(
    state_path,
    honest,
    radical_high,
    radical_low,
    low_competence,
    advanced_authors,
    sigma_h,
    sigma_r,
    bias,
    sigma_l,
    comprehension_prob,
    comprehension_gap,
    seed,
    task_count,
    k,
    arbitration_threshold,
    metrics_out,
    scores_out,
):
    """Run one synthetic semester and print detection metrics as JSON."""
    spec = ArchetypeSpec(
        honest=honest,
        radical_high=radical_high,
        radical_low=radical_low,
        low_competence=low_competence,
        advanced_authors=advanced_authors,
        sigma_h=sigma_h,
        sigma_r=sigma_r,
        bias=bias,
        sigma_l=sigma_l,
        comprehension_prob=comprehension_prob,
        comprehension_gap=comprehension_gap,
    )
    detector = DetectorConfig(arbitration_threshold=arbitration_threshold)
    _, outputs, metrics = run_simulation(
        spec, seed=seed, task_count=task_count, k=k, detector=detector
    )
    save_snapshot(outputs.engine, state_path)
    payload = json.dumps(metrics.to_payload(), indent=2)
    click.echo(payload)
    if metrics_out is not None:
        metrics_out.parent.mkdir(parents=True, exist_ok=True)
        metrics_out.write_text(payload + "\n")
    if scores_out is not None:
        export_scores(outputs.engine, scores_out)


@main.command("serve")
@click.option("--tokens", "tokens_path", type=click.Path(exists=True, path_type=Path),
              required=True, help="JSON token table: {token: {role, student_id?}}.")
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", type=int, default=8000, show_default=True)
@click.pass_obj
@forward_errors
def serve_cmd(state_path: Path, tokens_path: Path, host: str, port: int) -> None:
    """Serve the HTTP API; every mutation is snapshotted back to --state."""
    engine = _load(state_path)
    tokens = load_tokens(tokens_path)
    click.echo(f"serving {state_path} on http://{host}:{port}")
    run_server(engine, tokens, snapshot_path=state_path, host=host, port=port)


if __name__ == "__main__":
    main()
