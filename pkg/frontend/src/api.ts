/** Thin fetch client for the peerflow service.
 *
 * Every call sends the static token in `X-Auth-Token` and resolves to the
 * parsed JSON body; non-2xx responses reject with an `ApiError` carrying the
 * HTTP status and the server's detail message.
 */

import type {
  ArbitrationCase,
  ConsensusReport,
  Deduction,
  OverrideSpec,
  RadicalnessReport,
  Rubric,
  ScoreRow,
  SheetView,
  SlotsView,
  SubmissionInfo,
  TaskInfo,
  WarningInfo,
} from "./types.js";

export class ApiError extends Error {
  constructor(
    public readonly status: number,
    message: string,
  ) {
    super(message);
    this.name = "ApiError";
  }
}

async function detailOf(res: Response): Promise<string> {
  try {
    const body = (await res.json()) as { detail?: unknown };
    if (typeof body.detail === "string") return body.detail;
    if (body.detail !== undefined) return JSON.stringify(body.detail);
  } catch {
    /* non-JSON error body */
  }
  return `${res.status} ${res.statusText}`;
}

export class ApiClient {
  constructor(
    private readonly baseUrl: string,
    private readonly token: string,
  ) {
    this.baseUrl = baseUrl.replace(/\/+$/, "");
  }

  private async req<T>(method: string, path: string, body?: unknown): Promise<T> {
    const headers: Record<string, string> = { "X-Auth-Token": this.token };
    let payload: string | undefined;
    if (body !== undefined) {
      headers["Content-Type"] = "application/json";
      payload = JSON.stringify(body);
    }
    const res = await fetch(this.baseUrl + path, { method, headers, body: payload });
    if (!res.ok) throw new ApiError(res.status, await detailOf(res));
    return (await res.json()) as T;
  }

  health(): Promise<{ status: string }> {
    return this.req("GET", "/health");
  }

  rubric(): Promise<Rubric> {
    return this.req("GET", "/rubric");
  }

  tasks(): Promise<{ tasks: TaskInfo[] }> {
    return this.req("GET", "/tasks");
  }

  task(taskId: string): Promise<TaskInfo> {
    return this.req("GET", `/tasks/${taskId}`);
  }

  advance(taskId: string): Promise<TaskInfo> {
    return this.req("POST", `/tasks/${taskId}/advance`);
  }

  assign(taskId: string, seed: number): Promise<{ task_id: string; seed: number; pairs: [string, string][] }> {
    return this.req("POST", `/tasks/${taskId}/assignments`, { seed });
  }

  submitSource(taskId: string, text: string): Promise<SubmissionInfo> {
    return this.req("POST", `/tasks/${taskId}/submissions`, {
      kind: "source",
      payload: { text },
    });
  }

  submitReview(
    taskId: string,
    authorId: string,
    deductions: Deduction[],
    comments: string,
  ): Promise<SubmissionInfo> {
    return this.req("POST", `/tasks/${taskId}/submissions`, {
      kind: "review",
      counterpart_id: authorId,
      payload: { deductions, comments },
    });
  }

  submitReverse(
    taskId: string,
    reviewerId: string,
    criterionScores: Record<string, number>,
  ): Promise<SubmissionInfo> {
    return this.req("POST", `/tasks/${taskId}/submissions`, {
      kind: "reverse",
      counterpart_id: reviewerId,
      payload: { criterion_scores: criterionScores },
    });
  }

  submitRevision(taskId: string, text: string): Promise<SubmissionInfo> {
    return this.req("POST", `/tasks/${taskId}/submissions`, {
      kind: "revision",
      payload: { text },
    });
  }

  slots(taskId: string): Promise<SlotsView> {
    return this.req("GET", `/tasks/${taskId}/slots`);
  }

  finalize(taskId: string, force = false): Promise<{ task: TaskInfo; new_cases: ArbitrationCase[] }> {
    return this.req("POST", `/tasks/${taskId}/finalize`, { force });
  }

  scores(taskId: string): Promise<{ task_id: string; rows: ScoreRow[] }> {
    return this.req("GET", `/tasks/${taskId}/scores`);
  }

  consensus(taskId: string): Promise<ConsensusReport> {
    return this.req("GET", `/tasks/${taskId}/consensus`);
  }

  radicalness(): Promise<RadicalnessReport> {
    return this.req("GET", "/radicalness");
  }

  arbitrations(status: "open" | "resolved" | "all" = "open"): Promise<{ cases: ArbitrationCase[] }> {
    return this.req("GET", `/arbitrations?status=${status}`);
  }

  resolve(
    caseId: string,
    overrides: OverrideSpec[],
    note: string,
  ): Promise<{ case: ArbitrationCase; rows: ScoreRow[] }> {
    return this.req("POST", `/arbitrations/${caseId}/resolve`, { overrides, note });
  }

  warn(reviewerId: string, note: string): Promise<WarningInfo> {
    return this.req("POST", "/warnings", { reviewer_id: reviewerId, note });
  }

  sheet(studentId: string, taskId: string): Promise<SheetView> {
    return this.req("GET", `/students/${studentId}/sheet?task=${taskId}`);
  }
}
