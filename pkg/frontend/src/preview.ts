/** Client-side form previews.
 *
 * These exist so the review editor and reverse form can show a live number
 * while the student types.  They mirror the server's validation and scoring
 * exactly but are never authoritative — after submitting, the UI displays
 * the score the server returned, not the preview.
 */

import type { Deduction, Rubric, RubricItem } from "./types.js";

export class PreviewError extends Error {
  constructor(message: string) {
    super(message);
    this.name = "PreviewError";
  }
}

function itemById(rubric: Rubric, itemId: string): RubricItem {
  const item = rubric.items.find((i) => i.item_id === itemId);
  if (!item) throw new PreviewError(`unknown rubric item ${JSON.stringify(itemId)}`);
  return item;
}

/** Preview of a code-review score: 100 minus all deductions, floored at 0.
 *
 * Each deduction must name a rubric item and sit inside that item's allowed
 * range; the same item may appear more than once (one entry per violation).
 */
export function reviewPreview(deductions: Deduction[], rubric: Rubric): number {
  let total = 0;
  for (const [itemId, points] of deductions) {
    const item = itemById(rubric, itemId);
    if (!Number.isInteger(points)) {
      throw new PreviewError(`deduction for ${JSON.stringify(itemId)} must be an integer`);
    }
    if (points < item.min_deduction || points > item.max_deduction) {
      throw new PreviewError(
        `deduction ${points} for ${JSON.stringify(itemId)} outside ` +
          `[${item.min_deduction}, ${item.max_deduction}]`,
      );
    }
    total += points;
  }
  return Math.max(0, 100 - total);
}

/** Preview of a reverse-review total: the sum of all criterion points.
 *
 * All rubric criteria must be present, each within [0, max_points].
 */
export function reverseSum(scores: Record<string, number>, rubric: Rubric): number {
  let total = 0;
  for (const criterion of rubric.reverse_criteria) {
    const points = scores[criterion.criterion_id];
    if (points === undefined) {
      throw new PreviewError(`missing reverse criterion ${JSON.stringify(criterion.criterion_id)}`);
    }
    if (!Number.isInteger(points) || points < 0 || points > criterion.max_points) {
      throw new PreviewError(
        `points ${points} for ${JSON.stringify(criterion.criterion_id)} outside ` +
          `[0, ${criterion.max_points}]`,
      );
    }
    total += points;
  }
  for (const id of Object.keys(scores)) {
    if (!rubric.reverse_criteria.some((c) => c.criterion_id === id)) {
      throw new PreviewError(`unknown reverse criterion ${JSON.stringify(id)}`);
    }
  }
  return total;
}

/** Clamp a raw input value into a rubric item's deduction range. */
export function clampDeduction(item: RubricItem, value: number): number {
  const n = Math.round(value);
  return Math.min(item.max_deduction, Math.max(item.min_deduction, n));
}
