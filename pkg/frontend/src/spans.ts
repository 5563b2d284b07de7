/** Answer-span highlighting with live non-overlap enforcement.
 *
 * Spans belong to numbered questions.  A drag that would cross another
 * question's answer is rejected and the conflict reported so the UI
 * can flash it; answers of the same question may overlap, matching the
 * service's rules.  Clicking an existing span of the active question
 * removes it.
 */

import type { Span } from "./types.js";
import { sameSpan, spansOverlap } from "./types.js";

export type SelectResult =
  | { ok: true; span: Span; removed: boolean }
  | { ok: false; reason: "out-of-range" }
  | { ok: false; reason: "conflict"; question: number; span: Span };

export class SpanBoard {
  private spans = new Map<number, Span[]>();
  private dragStart: number | null = null;

  constructor(readonly tokenCount: number) {}

  forQuestion(question: number): Span[] {
    return [...(this.spans.get(question) ?? [])];
  }

  all(): Array<{ question: number; span: Span }> {
    const out: Array<{ question: number; span: Span }> = [];
    for (const [question, spans] of this.spans) {
      for (const span of spans) out.push({ question, span });
    }
    return out;
  }

  beginDrag(token: number): void {
    this.dragStart = token;
  }

  endDrag(question: number, token: number): SelectResult {
    const start = this.dragStart ?? token;
    this.dragStart = null;
    return this.select(question, start, token);
  }

  /** Add (or toggle off) a span for a question; drags may run backwards. */
  select(question: number, from: number, to: number): SelectResult {
    const span: Span = from <= to ? [from, to] : [to, from];
    if (span[0] < 0 || span[1] >= this.tokenCount) {
      return { ok: false, reason: "out-of-range" };
    }
    const mine = this.spans.get(question) ?? [];
    const existing = mine.find((s) => sameSpan(s, span));
    if (existing) {
      this.spans.set(
        question,
        mine.filter((s) => !sameSpan(s, span)),
      );
      return { ok: true, span, removed: true };
    }
    for (const [other, spans] of this.spans) {
      if (other === question) continue;
      for (const taken of spans) {
        if (spansOverlap(span, taken)) {
          return { ok: false, reason: "conflict", question: other, span: taken };
        }
      }
    }
    this.spans.set(question, [...mine, span]);
    return { ok: true, span, removed: false };
  }

  clearQuestion(question: number): void {
    this.spans.delete(question);
  }
}
