/** Validation workflow: judge each question of a leased task.
 *
 * A question is judged once it is either marked invalid or given at
 * least one highlighted answer; marking invalid clears any spans and
 * disables further highlighting for that question.  Submission stays
 * locked until every question is judged.  Answers given to distinct
 * questions must not overlap, mirroring the server's rules.
 */

import type { ApiClient } from "./api.js";
import type { JudgmentPayload, Span, ValidationResult, ValidationTask } from "./types.js";
import { SpanBoard, type SelectResult } from "./spans.js";

interface Draft {
  invalid: boolean;
}

export class ValidationView {
  readonly board: SpanBoard;
  private drafts: Draft[];
  error: string | null = null;

  constructor(
    private readonly api: ApiClient,
    readonly task: ValidationTask,
  ) {
    this.board = new SpanBoard(task.tokens.length);
    this.drafts = task.questions.map(() => ({ invalid: false }));
  }

  get questionCount(): number {
    return this.task.questions.length;
  }

  isInvalid(question: number): boolean {
    return this.drafts[question]?.invalid ?? false;
  }

  spansFor(question: number): Span[] {
    return this.board.forQuestion(question);
  }

  /** Mark a question unanswerable, discarding any highlighted spans. */
  markInvalid(question: number): void {
    const draft = this.draft(question);
    draft.invalid = true;
    this.board.clearQuestion(question);
  }

  markValid(question: number): void {
    this.draft(question).invalid = false;
  }

  addSpan(question: number, from: number, to: number): SelectResult {
    if (this.draft(question).invalid) {
      throw new Error("question is marked invalid; un-mark it before highlighting");
    }
    return this.board.select(question, from, to);
  }

  judged(question: number): boolean {
    return this.isInvalid(question) || this.board.forQuestion(question).length > 0;
  }

  get canSubmit(): boolean {
    return this.drafts.every((_, i) => this.judged(i));
  }

  payload(): JudgmentPayload[] {
    return this.drafts.map((draft, i) => ({
      isValid: !draft.invalid,
      spans: this.board.forQuestion(i),
    }));
  }

  async submit(worker: string): Promise<ValidationResult> {
    if (!this.canSubmit) {
      throw new Error("every question needs a judgment before submitting");
    }
    return this.api.submitValidation(this.task.taskId, worker, this.payload());
  }

  private draft(question: number): Draft {
    const draft = this.drafts[question];
    if (!draft) throw new Error(`no question ${question} on this task`);
    return draft;
  }
}
