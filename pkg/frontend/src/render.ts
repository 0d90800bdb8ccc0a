/** Pure HTML-string renderers for every page fragment.
 *
 * Each function maps server payloads to markup and nothing else: no fetching,
 * no DOM access, no state.  Interactive elements carry `data-*` attributes
 * the app shell wires up with delegated listeners.  All dynamic text passes
 * through `escapeHtml`.
 */

import type {
  ArbitrationCase,
  Deduction,
  RadicalnessReport,
  ReverseSlot,
  Rubric,
  ScoreRow,
  SlotsView,
  TaskInfo,
} from "./types.js";

export function escapeHtml(value: unknown): string {
  return String(value)
    .replaceAll("&", "&amp;")
    .replaceAll("<", "&lt;")
    .replaceAll(">", "&gt;")
    .replaceAll('"', "&quot;")
    .replaceAll("'", "&#39;");
}

function fmt(value: number | null | undefined, digits = 2): string {
  return value === null || value === undefined ? "—" : value.toFixed(digits);
}

function deadlineCell(iso: string | undefined): string {
  if (!iso) return "—";
  return escapeHtml(iso.replace("T", " ").replace("+00:00", "Z"));
}

// ---------------------------------------------------------------------------
// task dashboard
// ---------------------------------------------------------------------------

const STATE_ACTIONS: Record<string, string> = {
  draft: "advance",
  collecting: "advance",
  reviewing: "advance",
  responding: "finalize",
};

export function renderTaskDashboard(tasks: TaskInfo[], teacher: boolean): string {
  if (tasks.length === 0) {
    return '<p class="empty">No tasks yet.</p>';
  }
  const rows = tasks
    .map((t) => {
      const action = STATE_ACTIONS[t.state];
      const buttons: string[] = [];
      if (teacher && action) {
        buttons.push(
          `<button data-action="${action}" data-task="${escapeHtml(t.task_id)}">${action}</button>`,
        );
      }
      if (teacher && !t.has_assignment && t.state !== "draft") {
        buttons.push(
          `<button data-action="assign" data-task="${escapeHtml(t.task_id)}">assign</button>`,
        );
      }
      buttons.push(
        `<button data-action="open-task" data-task="${escapeHtml(t.task_id)}">open</button>`,
      );
      return `<tr data-task-row="${escapeHtml(t.task_id)}">
        <td>${escapeHtml(t.task_id)}</td>
        <td>${escapeHtml(t.title)}</td>
        <td><span class="state state-${escapeHtml(t.state)}">${escapeHtml(t.state)}</span></td>
        <td>${t.fan_out_k}</td>
        <td>${deadlineCell(t.deadlines["source"])}</td>
        <td>${deadlineCell(t.deadlines["revision"])}</td>
        <td>${t.has_assignment ? "yes" : "no"}</td>
        <td>${buttons.join(" ")}</td>
      </tr>`;
    })
    .join("\n");
  return `<table class="tasks">
    <thead><tr><th>id</th><th>title</th><th>state</th><th>k</th>
    <th>source due</th><th>revision due</th><th>assigned</th><th></th></tr></thead>
    <tbody>${rows}</tbody>
  </table>`;
}

// ---------------------------------------------------------------------------
// student work queue
// ---------------------------------------------------------------------------

export function renderWorkQueue(slots: SlotsView): string {
  const reviews =
    slots.review_slots.length === 0
      ? '<p class="empty">No review assignments yet.</p>'
      : `<ul class="review-slots">${slots.review_slots
          .map(
            (s) => `<li data-review-slot="${escapeHtml(s.author_id)}">
              program by <strong>${escapeHtml(s.author_id)}</strong> —
              ${
                s.source_submitted
                  ? s.review_submitted
                    ? `reviewed (score ${fmt(s.score, 0)})`
                    : "awaiting your review"
                  : "author has not submitted"
              }
              ${
                s.source_submitted
                  ? `<button data-action="edit-review" data-author="${escapeHtml(s.author_id)}">${
                      s.review_submitted ? "revise review" : "write review"
                    }</button>`
                  : ""
              }
            </li>`,
          )
          .join("\n")}</ul>`;
  const reverses =
    slots.reverse_slots.length === 0
      ? '<p class="empty">No reviews to answer yet.</p>'
      : `<ul class="reverse-slots">${slots.reverse_slots
          .map(
            (s) => `<li data-reverse-slot="${escapeHtml(s.reviewer_id)}">
              review by <strong>${escapeHtml(s.reviewer_id)}</strong>
              (scored you ${fmt(s.review.score, 0)}) —
              ${s.reverse_submitted ? "answered" : "awaiting your answer"}
              <button data-action="edit-reverse" data-reviewer="${escapeHtml(s.reviewer_id)}">${
                s.reverse_submitted ? "revise answer" : "answer"
              }</button>
            </li>`,
          )
          .join("\n")}</ul>`;
  return `<section class="work-queue" data-task="${escapeHtml(slots.task_id)}">
    <p>task <strong>${escapeHtml(slots.task_id)}</strong> · state ${escapeHtml(slots.state)} ·
      source ${slots.source_submitted ? "submitted" : "missing"} ·
      revision ${slots.revision_submitted ? "submitted" : "missing"}</p>
    <h3>Reviews to write</h3>${reviews}
    <h3>Reviews to answer</h3>${reverses}
  </section>`;
}

// ---------------------------------------------------------------------------
// review editor
// ---------------------------------------------------------------------------

export function renderReviewEditor(
  authorId: string,
  rubric: Rubric,
  existing?: { deductions: Deduction[]; comments: string },
): string {
  const taken = new Map<string, number>();
  for (const [itemId, points] of existing?.deductions ?? []) {
    taken.set(itemId, (taken.get(itemId) ?? 0) + points);
  }
  const rows = rubric.items
    .map((item) => {
      const current = taken.get(item.item_id);
      const checked = current !== undefined ? "checked" : "";
      const value = current ?? item.min_deduction;
      return `<tr>
        <td><label><input type="checkbox" data-item="${escapeHtml(item.item_id)}" ${checked}>
          ${escapeHtml(item.label)}</label></td>
        <td><input type="number" data-points-for="${escapeHtml(item.item_id)}"
          min="${item.min_deduction}" max="${item.max_deduction}" step="1"
          value="${value}" ${checked ? "" : "disabled"}></td>
        <td class="range">−${item.min_deduction}…−${item.max_deduction}</td>
      </tr>`;
    })
    .join("\n");
  return `<form class="review-editor" data-role="review-editor" data-author="${escapeHtml(authorId)}">
    <h3>Review program by ${escapeHtml(authorId)}</h3>
    <table class="rubric">${rows}</table>
    <label>Comments
      <textarea data-role="comments" rows="4">${escapeHtml(existing?.comments ?? "")}</textarea>
    </label>
    <p class="preview">Score preview:
      <output data-role="preview">100</output> / 100 <em>(server value shown after submit)</em></p>
    <button type="submit" data-action="submit-review">Submit review</button>
  </form>`;
}

// ---------------------------------------------------------------------------
// reverse-review form
// ---------------------------------------------------------------------------

export function renderReverseForm(slot: ReverseSlot, rubric: Rubric): string {
  const deductionList =
    slot.review.deductions.length === 0
      ? "<li>no deductions</li>"
      : slot.review.deductions
          .map(([item, points]) => `<li>−${points} ${escapeHtml(item)}</li>`)
          .join("\n");
  const inputs = rubric.reverse_criteria
    .map(
      (c) => `<tr>
        <td><label for="rv-${escapeHtml(c.criterion_id)}">${escapeHtml(c.label)}</label></td>
        <td><input id="rv-${escapeHtml(c.criterion_id)}" type="range"
          data-criterion="${escapeHtml(c.criterion_id)}" min="0" max="${c.max_points}"
          step="1" value="0">
          <output data-value-for="${escapeHtml(c.criterion_id)}">0</output> / ${c.max_points}</td>
      </tr>`,
    )
    .join("\n");
  return `<form class="reverse-form" data-role="reverse-form" data-reviewer="${escapeHtml(slot.reviewer_id)}">
    <h3>Answer the review by ${escapeHtml(slot.reviewer_id)}</h3>
    <p>They scored your program ${fmt(slot.review.score, 0)}:</p>
    <ul class="received-deductions">${deductionList}</ul>
    ${slot.review.comments ? `<blockquote>${escapeHtml(slot.review.comments)}</blockquote>` : ""}
    <table class="criteria">${inputs}</table>
    <p class="preview">Total: <output data-role="sum">0</output> / 100</p>
    <button type="submit" data-action="submit-reverse">Submit answer</button>
  </form>`;
}

// ---------------------------------------------------------------------------
// arbitration queue
// ---------------------------------------------------------------------------

export function renderArbitrationQueue(cases: ArbitrationCase[]): string {
  const open = cases.filter((c) => c.status === "open");
  if (open.length === 0) {
    return '<p class="empty">No open arbitration cases.</p>';
  }
  const ordered = [...open].sort(
    (a, b) => b.z_at_flag - a.z_at_flag || a.case_id.localeCompare(b.case_id),
  );
  const cards = ordered
    .map((c) => {
      const rows = c.group
        .map(
          (entry) => `<tr data-group-row="${escapeHtml(entry.reviewer_id)}">
            <td>${escapeHtml(entry.reviewer_id)}</td>
            <td>${entry.score}</td>
            <td>${entry.delta >= 0 ? "+" : ""}${entry.delta}</td>
            <td>
              <select data-override-kind data-reviewer="${escapeHtml(entry.reviewer_id)}">
                <option value="">keep</option>
                <option value="bonus">bonus</option>
                <option value="code_score">code score</option>
              </select>
              <input type="number" data-override-value data-reviewer="${escapeHtml(entry.reviewer_id)}" value="0">
            </td>
          </tr>`,
        )
        .join("\n");
      return `<article class="case" data-case-id="${escapeHtml(c.case_id)}" data-z="${c.z_at_flag.toFixed(2)}">
        <header>
          <strong>${escapeHtml(c.case_id)}</strong> · task ${escapeHtml(c.task_id)} ·
          program by ${escapeHtml(c.author_id)} ·
          spread <span class="z">${c.z_at_flag.toFixed(2)}</span>
        </header>
        <table class="group">
          <thead><tr><th>reviewer</th><th>score</th><th>delta</th><th>override</th></tr></thead>
          <tbody>${rows}</tbody>
        </table>
        <label>Resolution note <input type="text" data-role="note" required></label>
        <button data-action="resolve" data-case="${escapeHtml(c.case_id)}">Resolve</button>
      </article>`;
    })
    .join("\n");
  return `<div class="arbitration-queue">${cards}</div>`;
}

// ---------------------------------------------------------------------------
// radicalness watchlist
// ---------------------------------------------------------------------------

export function renderWatchlist(report: RadicalnessReport): string {
  if (report.entries.length === 0) {
    return '<p class="empty">No review history yet.</p>';
  }
  const candidates = new Set(report.warn_candidates);
  const ordered = [...report.entries].sort(
    (a, b) => a.z_r - b.z_r || a.reviewer_id.localeCompare(b.reviewer_id),
  );
  const rows = ordered
    .map(
      (e) => `<tr data-watch-row="${escapeHtml(e.reviewer_id)}"
        class="${candidates.has(e.reviewer_id) ? "candidate" : ""}">
        <td>${escapeHtml(e.reviewer_id)}</td>
        <td>${e.z_r.toFixed(2)}</td>
        <td>${e.review_count}</td>
        <td>${
          candidates.has(e.reviewer_id)
            ? `<button data-action="warn" data-reviewer="${escapeHtml(e.reviewer_id)}">warn</button>`
            : ""
        }</td>
      </tr>`,
    )
    .join("\n");
  return `<table class="watchlist">
    <caption>Scores-everything-the-same watchlist (lowest spread first;
      flagged below ${report.warn_threshold} with ≥ ${report.min_reviews} reviews)</caption>
    <thead><tr><th>reviewer</th><th>spread</th><th>reviews</th><th></th></tr></thead>
    <tbody>${rows}</tbody>
  </table>`;
}

// ---------------------------------------------------------------------------
// score table
// ---------------------------------------------------------------------------

export function renderScoreTable(rows: ScoreRow[]): string {
  if (rows.length === 0) {
    return '<p class="empty">No scores yet.</p>';
  }
  const body = rows
    .map(
      (r) => `<tr data-score-row="${escapeHtml(r.student_id)}">
        <td>${escapeHtml(r.student_id)}</td>
        <td>${r.source_done ? "✓" : "·"}</td>
        <td>${r.revision_done ? "✓" : "·"}</td>
        <td>${r.reviews_done}/${r.reviews_assigned}</td>
        <td>${r.reverses_done}/${r.reverses_expected}</td>
        <td>${fmt(r.code_score_mean)}</td>
        <td>${fmt(r.review_score_mean)}</td>
        <td>${r.review_bonus_total >= 0 ? "+" : ""}${r.review_bonus_total}</td>
        <td>${fmt(r.overall)}</td>
        <td>${r.under_arbitration ? '<span class="flag">in arbitration</span>' : ""}</td>
      </tr>`,
    )
    .join("\n");
  return `<table class="scores">
    <thead><tr><th>student</th><th>src</th><th>rev</th><th>reviews</th>
    <th>answers</th><th>code mean</th><th>review mean</th><th>bonus</th>
    <th>overall</th><th></th></tr></thead>
    <tbody>${body}</tbody>
  </table>`;
}
