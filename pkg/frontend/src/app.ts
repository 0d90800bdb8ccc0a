/** Application shell: token entry, tab navigation, polling, and event wiring.
 *
 * All authoritative numbers come from the service; the shell re-fetches after
 * every successful mutation instead of patching local state, and form
 * previews are clearly labeled as previews.
 */

import { ApiClient, ApiError } from "./api.js";
import { PreviewError, reviewPreview, reverseSum } from "./preview.js";
import {
  renderArbitrationQueue,
  renderReviewEditor,
  renderReverseForm,
  renderScoreTable,
  renderTaskDashboard,
  renderWatchlist,
  renderWorkQueue,
  escapeHtml,
} from "./render.js";
import type { Deduction, Rubric } from "./types.js";

type Tab = "tasks" | "work" | "arbitration" | "watchlist" | "scores";

interface AppOptions {
  baseUrl?: string;
  pollMs?: number;
}

interface AppHandle {
  stop(): void;
}

interface AppState {
  client: ApiClient | null;
  teacher: boolean;
  rubric: Rubric | null;
  tab: Tab;
  taskId: string | null;
  message: string;
}

export function mountApp(root: HTMLElement, options: AppOptions = {}): AppHandle {
  const doc = root.ownerDocument;
  const baseUrl = options.baseUrl ?? "";
  const pollMs = options.pollMs ?? 5000;
  const state: AppState = {
    client: null,
    teacher: false,
    rubric: null,
    tab: "tasks",
    taskId: null,
    message: "",
  };
  let pollTimer: ReturnType<typeof setInterval> | null = null;
  let stopped = false;

  function say(message: string): void {
    state.message = message;
    const banner = root.querySelector("[data-role=message]");
    if (banner) banner.textContent = message;
  }

  function contentEl(): HTMLElement {
    return root.querySelector("[data-role=content]") as HTMLElement;
  }

  function renderLogin(): void {
    root.innerHTML = `<main class="login">
      <h1>peerflow</h1>
      <form data-role="login">
        <label>Access token <input type="password" data-role="token" autofocus></label>
        <button type="submit">Connect</button>
      </form>
      <p data-role="message" class="message"></p>
    </main>`;
  }

  function renderShell(): void {
    const tabs: [Tab, string][] = state.teacher
      ? [
          ["tasks", "Tasks"],
          ["arbitration", "Arbitration"],
          ["watchlist", "Watchlist"],
          ["scores", "Scores"],
        ]
      : [
          ["tasks", "Tasks"],
          ["work", "My work"],
        ];
    const buttons = tabs
      .map(
        ([tab, label]) =>
          `<button data-action="tab" data-tab="${tab}"
            class="${state.tab === tab ? "active" : ""}">${label}</button>`,
      )
      .join(" ");
    root.innerHTML = `<main class="app">
      <header><h1>peerflow</h1><nav>${buttons}</nav></header>
      <p data-role="message" class="message">${escapeHtml(state.message)}</p>
      <section data-role="content"></section>
    </main>`;
  }

  async function refresh(): Promise<void> {
    const client = state.client;
    if (!client || stopped) return;
    const content = contentEl();
    try {
      if (state.tab === "tasks") {
        const { tasks } = await client.tasks();
        content.innerHTML = renderTaskDashboard(tasks, state.teacher);
      } else if (state.tab === "work") {
        content.innerHTML = await renderWork(client);
      } else if (state.tab === "arbitration") {
        const { cases } = await client.arbitrations("open");
        content.innerHTML = renderArbitrationQueue(cases);
      } else if (state.tab === "watchlist") {
        content.innerHTML = renderWatchlist(await client.radicalness());
      } else {
        content.innerHTML = await renderScores(client);
      }
    } catch (err) {
      say(describe(err));
    }
  }

  async function renderWork(client: ApiClient): Promise<string> {
    const { tasks } = await client.tasks();
    const active = tasks.filter((t) => t.state !== "draft");
    if (state.taskId === null && active.length > 0) {
      state.taskId = active[active.length - 1]!.task_id;
    }
    if (state.taskId === null) return '<p class="empty">No active tasks.</p>';
    const picker = `<label>Task
      <select data-role="task-picker">${active
        .map(
          (t) =>
            `<option value="${escapeHtml(t.task_id)}" ${
              t.task_id === state.taskId ? "selected" : ""
            }>${escapeHtml(t.task_id)} · ${escapeHtml(t.title)}</option>`,
        )
        .join("")}</select></label>`;
    const slots = await client.slots(state.taskId);
    return picker + renderWorkQueue(slots);
  }

  async function renderScores(client: ApiClient): Promise<string> {
    const { tasks } = await client.tasks();
    const finalized = tasks.filter((t) => t.state === "finalized");
    if (finalized.length === 0) return '<p class="empty">No finalized tasks yet.</p>';
    const parts: string[] = [];
    for (const t of finalized) {
      const { rows } = await client.scores(t.task_id);
      parts.push(`<h3>${escapeHtml(t.task_id)} · ${escapeHtml(t.title)}</h3>`);
      parts.push(renderScoreTable(rows));
    }
    return parts.join("\n");
  }

  async function connect(token: string): Promise<void> {
    const client = new ApiClient(baseUrl, token);
    const rubric = await client.rubric(); // also validates the token
    let teacher = true;
    try {
      await client.arbitrations("open");
    } catch (err) {
      if (err instanceof ApiError && err.status === 403) teacher = false;
      else throw err;
    }
    state.client = client;
    state.rubric = rubric;
    state.teacher = teacher;
    state.tab = teacher ? "tasks" : "work";
    renderShell();
    await refresh();
    if (teacher && pollMs > 0) {
      pollTimer = setInterval(() => {
        if (state.tab === "arbitration" || state.tab === "watchlist") void refresh();
      }, pollMs);
    }
  }

  function describe(err: unknown): string {
    if (err instanceof ApiError) return `server: ${err.message}`;
    if (err instanceof PreviewError) return err.message;
    if (err instanceof Error) return err.message;
    return String(err);
  }

  function collectDeductions(form: HTMLElement): Deduction[] {
    const deductions: Deduction[] = [];
    for (const box of form.querySelectorAll<HTMLInputElement>("input[data-item]")) {
      if (!box.checked) continue;
      const itemId = box.dataset["item"]!;
      const input = form.querySelector<HTMLInputElement>(
        `input[data-points-for="${itemId}"]`,
      )!;
      deductions.push([itemId, Number(input.value)]);
    }
    return deductions;
  }

  function updateReviewPreview(form: HTMLElement): void {
    const output = form.querySelector("output[data-role=preview]")!;
    try {
      output.textContent = String(reviewPreview(collectDeductions(form), state.rubric!));
      say("");
    } catch (err) {
      output.textContent = "–";
      say(describe(err));
    }
  }

  function collectCriteria(form: HTMLElement): Record<string, number> {
    const scores: Record<string, number> = {};
    for (const input of form.querySelectorAll<HTMLInputElement>("input[data-criterion]")) {
      scores[input.dataset["criterion"]!] = Number(input.value);
    }
    return scores;
  }

  function updateReverseSum(form: HTMLElement): void {
    const output = form.querySelector("output[data-role=sum]")!;
    try {
      output.textContent = String(reverseSum(collectCriteria(form), state.rubric!));
      say("");
    } catch (err) {
      output.textContent = "–";
      say(describe(err));
    }
  }

  function openReviewEditor(authorId: string): void {
    const content = contentEl();
    content.innerHTML = renderReviewEditor(authorId, state.rubric!);
    updateReviewPreview(content.querySelector("[data-role=review-editor]")!);
  }

  async function openReverseForm(client: ApiClient, reviewerId: string): Promise<void> {
    const slots = await client.slots(state.taskId!);
    const slot = slots.reverse_slots.find((s) => s.reviewer_id === reviewerId);
    if (!slot) {
      say(`no review by ${reviewerId} to answer`);
      return;
    }
    contentEl().innerHTML = renderReverseForm(slot, state.rubric!);
  }

  async function handleAction(target: HTMLElement): Promise<void> {
    const client = state.client;
    if (!client) return;
    const action = target.dataset["action"]!;
    try {
      if (action === "tab") {
        state.tab = target.dataset["tab"] as Tab;
        renderShell();
        await refresh();
      } else if (action === "advance") {
        await client.advance(target.dataset["task"]!);
        await refresh();
      } else if (action === "assign") {
        await client.assign(target.dataset["task"]!, Date.now() % 100000);
        say("reviewers assigned");
        await refresh();
      } else if (action === "finalize") {
        const result = await client.finalize(target.dataset["task"]!, true);
        say(`finalized ${result.task.task_id}; ${result.new_cases.length} new case(s)`);
        await refresh();
      } else if (action === "open-task") {
        state.taskId = target.dataset["task"]!;
        state.tab = state.teacher ? "scores" : "work";
        renderShell();
        await refresh();
      } else if (action === "edit-review") {
        openReviewEditor(target.dataset["author"]!);
      } else if (action === "edit-reverse") {
        await openReverseForm(client, target.dataset["reviewer"]!);
      } else if (action === "resolve") {
        await resolveCase(client, target);
      } else if (action === "warn") {
        const reviewerId = target.dataset["reviewer"]!;
        const note =
          doc.defaultView?.prompt?.("Warning note:", "scores vary too little across programs") ??
          "scores vary too little across programs";
        const warning = await client.warn(reviewerId, note);
        say(`warned ${warning.reviewer_id} (spread ${warning.z_r})`);
        await refresh();
      }
    } catch (err) {
      say(describe(err));
    }
  }

  async function resolveCase(client: ApiClient, button: HTMLElement): Promise<void> {
    const card = button.closest("[data-case-id]") as HTMLElement;
    const note = card.querySelector<HTMLInputElement>("input[data-role=note]")!.value;
    const overrides = [];
    for (const select of card.querySelectorAll<HTMLSelectElement>("select[data-override-kind]")) {
      if (!select.value) continue;
      const reviewerId = select.dataset["reviewer"]!;
      const value = card.querySelector<HTMLInputElement>(
        `input[data-override-value][data-reviewer="${reviewerId}"]`,
      )!.value;
      overrides.push({
        reviewer_id: reviewerId,
        kind: select.value as "bonus" | "code_score",
        value: Number(value),
      });
    }
    await client.resolve(card.dataset["caseId"]!, overrides, note);
    say(`resolved ${card.dataset["caseId"]}`);
    await refresh();
  }

  async function handleSubmit(form: HTMLElement): Promise<void> {
    const client = state.client;
    if (!client || !state.taskId) return;
    try {
      if (form.dataset["role"] === "review-editor") {
        const comments =
          form.querySelector<HTMLTextAreaElement>("textarea[data-role=comments]")!.value;
        const sub = await client.submitReview(
          state.taskId,
          form.dataset["author"]!,
          collectDeductions(form),
          comments,
        );
        say(`review submitted — server scored it ${sub.score}`);
      } else if (form.dataset["role"] === "reverse-form") {
        const sub = await client.submitReverse(
          state.taskId,
          form.dataset["reviewer"]!,
          collectCriteria(form),
        );
        say(`answer submitted — total ${sub.score}`);
      } else {
        return;
      }
      state.tab = "work";
      renderShell();
      await refresh();
    } catch (err) {
      say(describe(err));
    }
  }

  root.addEventListener("click", (event) => {
    const target = (event.target as HTMLElement).closest<HTMLElement>("[data-action]");
    if (!target || !root.contains(target)) return;
    if (target.dataset["action"] !== "tab" && (target as HTMLButtonElement).type === "submit") {
      return; // handled by the submit listener
    }
    void handleAction(target);
  });

  root.addEventListener("submit", (event) => {
    event.preventDefault();
    const form = event.target as HTMLElement;
    if (form.matches("form[data-role=login]")) {
      const token = form.querySelector<HTMLInputElement>("input[data-role=token]")!.value;
      connect(token).catch((err) => say(describe(err)));
      return;
    }
    void handleSubmit(form);
  });

  root.addEventListener("input", (event) => {
    const target = event.target as HTMLElement;
    const editor = target.closest<HTMLElement>("form[data-role=review-editor]");
    if (editor) {
      if (target.matches("input[data-item]")) {
        const box = target as HTMLInputElement;
        const points = editor.querySelector<HTMLInputElement>(
          `input[data-points-for="${box.dataset["item"]}"]`,
        )!;
        points.disabled = !box.checked;
      }
      updateReviewPreview(editor);
      return;
    }
    const reverse = target.closest<HTMLElement>("form[data-role=reverse-form]");
    if (reverse) {
      if (target.matches("input[data-criterion]")) {
        const slider = target as HTMLInputElement;
        const label = reverse.querySelector(
          `output[data-value-for="${slider.dataset["criterion"]}"]`,
        );
        if (label) label.textContent = slider.value;
      }
      updateReverseSum(reverse);
      return;
    }
    if (target.matches("select[data-role=task-picker]")) {
      state.taskId = (target as HTMLSelectElement).value;
      void refresh();
    }
  });

  renderLogin();

  return {
    stop(): void {
      stopped = true;
      if (pollTimer !== null) clearInterval(pollTimer);
    },
  };
}
