/** End-to-end: drive a real peerflow service over HTTP.
 *
 * `scripts/e2e_server.py` starts the service with two open arbitration cases
 * whose spreads are 35.42 and 32.29, plus a live reviewing-state task.  The
 * test talks to it exactly the way the app does: through ApiClient, the
 * renderers, and the preview functions.
 */

import { spawn, type ChildProcess } from "node:child_process";
import { createInterface } from "node:readline";
import { fileURLToPath } from "node:url";
import path from "node:path";

import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { ApiClient } from "../src/api.js";
import { reviewPreview } from "../src/preview.js";
import { renderArbitrationQueue } from "../src/render.js";
import type { Deduction, Rubric } from "../src/types.js";

const HERE = path.dirname(fileURLToPath(import.meta.url));
const SERVER = path.join(HERE, "..", "scripts", "e2e_server.py");
const SRC = path.join(HERE, "..", "..", "src");

let proc: ChildProcess;
let baseUrl: string;
let teacher: ApiClient;
let student: ApiClient;

beforeAll(async () => {
  proc = spawn("python3", [SERVER], {
    env: { ...process.env, PYTHONPATH: SRC + (process.env["PYTHONPATH"] ? `:${process.env["PYTHONPATH"]}` : "") },
    stdio: ["ignore", "pipe", "pipe"],
  });
  const errors: string[] = [];
  proc.stderr && createInterface({ input: proc.stderr }).on("line", (l) => errors.push(l));
  const port = await new Promise<number>((resolve, reject) => {
    const timer = setTimeout(
      () => reject(new Error(`server never became ready\n${errors.join("\n")}`)),
      30_000,
    );
    createInterface({ input: proc.stdout! }).on("line", (line) => {
      const match = /^READY (\d+)$/.exec(line);
      if (match) {
        clearTimeout(timer);
        resolve(Number(match[1]));
      }
    });
    proc.on("exit", (code) => {
      clearTimeout(timer);
      reject(new Error(`server exited with ${code}\n${errors.join("\n")}`));
    });
  });
  baseUrl = `http://127.0.0.1:${port}`;
  teacher = new ApiClient(baseUrl, "e2e-teacher");
  student = new ApiClient(baseUrl, "e2e-s01");
  for (let i = 0; ; i++) {
    try {
      await teacher.health();
      break;
    } catch (err) {
      if (i > 100) throw err;
      await new Promise((r) => setTimeout(r, 100));
    }
  }
}, 60_000);

afterAll(() => {
  proc?.kill();
});

// Deterministic pseudo-random deduction sets, all within rubric bounds.
function makeRng(seed: number): () => number {
  let s = seed >>> 0;
  return () => {
    s = (s * 1664525 + 1013904223) >>> 0;
    return s;
  };
}

function randomDeductions(rubric: Rubric, rand: () => number): Deduction[] {
  const deductions: Deduction[] = [];
  for (const item of rubric.items) {
    if (rand() % 2 === 0) continue;
    const span = item.max_deduction - item.min_deduction + 1;
    deductions.push([item.item_id, item.min_deduction + (rand() % span)]);
    if (rand() % 4 === 0) {
      // same defect found twice: one entry per violation is allowed
      deductions.push([item.item_id, item.min_deduction + (rand() % span)]);
    }
  }
  return deductions;
}

describe("arbitration queue against the live service", () => {
  it("starts with the two seeded cases rendered in descending spread order", async () => {
    const { cases } = await teacher.arbitrations("open");
    expect(cases).toHaveLength(2);
    expect(cases.map((c) => c.z_at_flag).sort((a, b) => b - a)).toEqual([35.42, 32.29]);

    const html = renderArbitrationQueue(cases);
    const i3542 = html.indexOf("35.42");
    const i3229 = html.indexOf("32.29");
    expect(i3542).toBeGreaterThan(-1);
    expect(i3229).toBeGreaterThan(-1);
    expect(i3542).toBeLessThan(i3229);
  });

  it("resolving the top case removes it from the queue and refreshes scores", async () => {
    const { cases } = await teacher.arbitrations("open");
    const top = [...cases].sort((a, b) => b.z_at_flag - a.z_at_flag)[0]!;
    expect(top.z_at_flag).toBe(35.42);

    const before = await teacher.scores(top.task_id);
    const authorBefore = before.rows.find((r) => r.student_id === top.author_id)!;
    expect(authorBefore.under_arbitration).toBe(true);

    // The teacher decides the 0-scorer misjudged the program and re-grades it.
    const harsh = top.group.find((g) => g.score === 0)!;
    const result = await teacher.resolve(
      top.case_id,
      [{ reviewer_id: harsh.reviewer_id, kind: "code_score", value: 80 }],
      "re-graded by hand after reading the submission",
    );
    expect(result.case.status).toBe("resolved");

    const { cases: openAfter } = await teacher.arbitrations("open");
    expect(openAfter).toHaveLength(1);
    expect(openAfter[0]!.z_at_flag).toBe(32.29);
    expect(renderArbitrationQueue(openAfter)).not.toContain(top.case_id);

    const after = await teacher.scores(top.task_id);
    const authorAfter = after.rows.find((r) => r.student_id === top.author_id)!;
    // With k = 5 over six students everyone reviewed s02's still-open group,
    // so the author stays marked until that case resolves too.
    expect(authorAfter.under_arbitration).toBe(true);
    expect(authorAfter.code_score_mean!).toBeGreaterThan(authorBefore.code_score_mean!);
    expect(authorAfter.overall!).toBeGreaterThan(authorBefore.overall!);
  });
});

describe("review editor preview against the live service", () => {
  it("matches the server's score for 20 random deduction sets", async () => {
    const rubric = await student.rubric();
    const slots = await student.slots("t2");
    const authors = slots.review_slots
      .filter((s) => s.source_submitted)
      .map((s) => s.author_id);
    expect(authors.length).toBeGreaterThan(0);

    const rand = makeRng(20260814);
    for (let i = 0; i < 20; i++) {
      const deductions = randomDeductions(rubric, rand);
      const preview = reviewPreview(deductions, rubric);
      const submitted = await student.submitReview(
        "t2",
        authors[i % authors.length]!,
        deductions,
        `pass ${i}`,
      );
      expect(submitted.score).toBe(preview);
    }
  }, 30_000);
});
