/** Slot-by-slot question composition against the server's grammar.
 *
 * The composer never invents slot values: every selectable option comes
 * from the autocomplete endpoint, so illegal continuations cannot be
 * clicked, and accepting a suggestion fills all seven slots from a
 * server-rendered question.  A failed fetch leaves all state in place
 * and flips `error`, so the UI can offer retry without losing work.
 */

import type { ApiClient } from "./api.js";
import { Dropdown } from "./dropdown.js";
import { SpanBoard } from "./spans.js";
import type {
  Completion,
  GenerationTask,
  QaPairPayload,
  SlotValue,
  Span,
  Suggestion,
  WireSlots,
} from "./types.js";
import {
  SLOT_COUNT,
  sameSlots,
  slotsToValues,
  valueKey,
  valuesToSlots,
} from "./types.js";

export interface CommittedQuestion {
  slots: WireSlots;
  spans: Span[];
  /** How the question was built; both paths are server-approved. */
  via: "steps" | "suggestion";
  /** For "steps": the completion list each slot value was chosen from. */
  trail: Completion[][];
}

export class Composer {
  readonly dropdown = new Dropdown();
  /** Answer highlights, keyed by question index (committed count). */
  readonly board: SpanBoard;
  values: SlotValue[] = [];
  completions: Completion[] = [];
  suggestions: Suggestion[] = [];
  committed: CommittedQuestion[] = [];
  error: string | null = null;

  private trail: Completion[][] = [];
  private seenSuggestions: Suggestion[] = [];

  constructor(
    private readonly api: ApiClient,
    readonly task: GenerationTask,
  ) {
    this.board = new SpanBoard(task.tokens.length);
  }

  get verb(): string {
    return this.task.inflections.stem;
  }

  get complete(): boolean {
    return this.values.length === SLOT_COUNT;
  }

  /** Fetch completions and suggestions for the current prefix. */
  async refresh(): Promise<void> {
    try {
      const response = await this.api.autocomplete(
        this.verb,
        this.values,
        this.committed.map((q) => q.slots),
      );
      this.completions = response.completions;
      this.suggestions = response.suggestions;
      for (const s of response.suggestions) {
        if (!this.seenSuggestions.some((p) => sameSlots(p.slots, s.slots))) {
          this.seenSuggestions.push(s);
        }
      }
      this.error = null;
      this.dropdown.setItems(
        this.suggestions.map((s) => s.rendered),
        this.completions.map((c) => c.display),
      );
    } catch (err) {
      this.error = err instanceof Error ? err.message : String(err);
    }
  }

  /** Re-issue the failed fetch; composer state is untouched in between. */
  async retry(): Promise<void> {
    await this.refresh();
  }

  /** Select one completion for the current slot. */
  choose(value: SlotValue): void {
    if (this.complete) {
      throw new Error("question already has all slots");
    }
    const match = this.completions.find(
      (c) => valueKey(c.value) === valueKey(value),
    );
    if (!match) {
      throw new Error(`value not offered for slot ${this.values.length}`);
    }
    this.values.push(match.value);
    this.trail.push(this.completions);
  }

  /** Accept a server suggestion, filling every slot at once. */
  acceptSuggestion(index: number): void {
    const suggestion = this.suggestions[index];
    if (!suggestion) {
      throw new Error(`no suggestion ${index}`);
    }
    this.values = slotsToValues(suggestion.slots);
    this.trail = [];
  }

  /** Pick whatever the drop-down's active row is. */
  chooseActive(): void {
    const item = this.dropdown.active();
    if (!item) return;
    if (item.kind === "suggestion") {
      this.acceptSuggestion(item.index);
    } else {
      const completion = this.completions[item.index];
      if (completion) this.choose(completion.value);
    }
  }

  /** Clear the last slot (backspace through the question). */
  undo(): void {
    if (this.values.length === 0) return;
    this.values.pop();
    if (this.trail.length > this.values.length) this.trail.pop();
  }

  /**
   * Commit the fully composed question with its answer spans.
   *
   * Re-checks that the question came from the server's grammar: either
   * every slot value was drawn from a fetched completion list, or the
   * whole tuple matches a fetched suggestion.
   */
  commit(spans: Span[]): CommittedQuestion {
    if (!this.complete) {
      throw new Error("cannot commit a partial question");
    }
    if (spans.length === 0) {
      throw new Error("a question needs at least one answer span");
    }
    const slots = valuesToSlots(this.values);
    const viaSteps =
      this.trail.length === SLOT_COUNT &&
      this.values.every((value, i) =>
        this.trail[i]?.some((c) => valueKey(c.value) === valueKey(value)),
      );
    const viaSuggestion = this.seenSuggestions.some((s) =>
      sameSlots(s.slots, slots),
    );
    if (!viaSteps && !viaSuggestion) {
      throw new Error("question was not built from server-offered values");
    }
    const question: CommittedQuestion = {
      slots,
      spans: [...spans],
      via: viaSteps ? "steps" : "suggestion",
      trail: viaSteps ? this.trail : [],
    };
    this.committed.push(question);
    this.values = [];
    this.trail = [];
    return question;
  }

  payload(): QaPairPayload[] {
    return this.committed.map((q) => ({ slots: q.slots, spans: q.spans }));
  }

  async submit(worker: string) {
    return this.api.submitGeneration(this.task.taskId, worker, this.payload());
  }
}
