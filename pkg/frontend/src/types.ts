/** Payload shapes returned by the peerflow HTTP service.
 *
 * These mirror the server's JSON exactly; the client never reshapes or
 * recomputes authoritative values, it only displays them.
 */

export interface RubricItem {
  item_id: string;
  label: string;
  min_deduction: number;
  max_deduction: number;
}

export interface ReverseCriterion {
  criterion_id: string;
  label: string;
  max_points: number;
}

export interface Rubric {
  items: RubricItem[];
  reverse_criteria: ReverseCriterion[];
}

/** One deduction line in a code review: [rubric item id, points taken]. */
export type Deduction = [string, number];

export interface TaskInfo {
  task_id: string;
  title: string;
  state: string;
  fan_out_k: number;
  deadlines: Record<string, string>;
  has_assignment: boolean;
}

export interface SubmissionInfo {
  task_id: string;
  kind: string;
  submitter_id: string;
  counterpart_id: string | null;
  submitted_at: string;
  on_time: boolean;
  score: number | null;
}

export interface ReviewSlot {
  author_id: string;
  source_submitted: boolean;
  review_submitted: boolean;
  score: number | null;
}

export interface ReverseSlot {
  reviewer_id: string;
  review: { deductions: Deduction[]; comments: string; score: number };
  reverse_submitted: boolean;
}

export interface SlotsView {
  task_id: string;
  state: string;
  source_submitted: boolean;
  revision_submitted: boolean;
  review_slots: ReviewSlot[];
  reverse_slots: ReverseSlot[];
}

export interface CaseGroupEntry {
  reviewer_id: string;
  score: number;
  delta: number;
}

export interface OverrideSpec {
  reviewer_id: string;
  kind: "bonus" | "code_score";
  value: number;
}

export interface ArbitrationCase {
  case_id: string;
  task_id: string;
  author_id: string;
  z_at_flag: number;
  status: "open" | "resolved";
  resolution_note: string | null;
  overrides: OverrideSpec[];
  group: CaseGroupEntry[];
}

export interface ScoreRow {
  student_id: string;
  task_id: string;
  source_done: boolean;
  revision_done: boolean;
  reviews_done: number;
  reviews_assigned: number;
  reverses_done: number;
  reverses_expected: number;
  code_score_mean: number | null;
  review_score_mean: number | null;
  review_bonus_total: number;
  overall: number | null;
  under_arbitration: boolean;
}

export interface ConsensusEntry {
  task_id: string;
  author_id: string;
  z: number;
  group_size: number;
  pooled: boolean;
  raw_z: number;
}

export interface ConsensusReport {
  task_id: string;
  snapshot_version: number;
  threshold: number;
  entries: ConsensusEntry[];
  flagged: ConsensusEntry[];
}

export interface RadicalnessEntry {
  reviewer_id: string;
  z_r: number;
  review_count: number;
  per_task_means: Record<string, number>;
}

export interface RadicalnessReport {
  snapshot_version: number;
  warn_threshold: number;
  min_reviews: number;
  entries: RadicalnessEntry[];
  /** Reviewer ids eligible for a warning (low spread, enough reviews). */
  warn_candidates: string[];
}

export interface SheetView {
  student_id: string;
  task_id: string;
  source_done: boolean;
  revision_done: boolean;
  review_done: boolean[];
  reverse_done: boolean[];
  code_scores_received: number[];
  review_scores_received: number[];
  review_bonuses: number[];
  review_bonus_total: number;
  overall: number | null;
  under_arbitration: boolean;
}

export interface WarningInfo {
  reviewer_id: string;
  z_r: number;
  note: string;
  issued_at: string;
}
