/** Structural checks for exported sentence records.
 *
 * These mirror the service's record rules closely enough to validate an
 * export client-side: token/tag alignment, verb ordering and tagging,
 * slot shape, judgment/answer consistency, span bounds, and the rule
 * that one annotator's answers to distinct questions never overlap.
 * Full question grammar checking stays on the server; the client only
 * verifies shape.
 */

import type {
  Span,
  WireJudgment,
  WireQaPair,
  WireSentenceRecord,
  WireSlots,
  WireVerbEntry,
} from "./types.js";

const DOMAINS = ["wikipedia", "wikinews", "science", "other"];
const SOURCES = ["generation", "expansion", "parser"];
const SLOT_KEYS: Array<keyof WireSlots> = [
  "wh",
  "aux",
  "subj",
  "verbForm",
  "auxChain",
  "obj",
  "prep",
  "misc",
];

function overlaps(a: Span, b: Span): boolean {
  return a[0] <= b[1] && b[0] <= a[1];
}

function checkSlots(slots: WireSlots, where: string, errors: string[]): void {
  for (const key of SLOT_KEYS) {
    const value = slots[key];
    if (typeof value !== "string") {
      errors.push(`${where}: slot ${key} is not a string`);
    }
  }
  if (!slots.wh) errors.push(`${where}: empty wh slot`);
  if (!slots.verbForm) errors.push(`${where}: empty verb form`);
}

function checkJudgment(
  j: WireJudgment,
  lastToken: number,
  where: string,
  errors: string[],
): void {
  if (!j.workerId) errors.push(`${where}: judgment without a worker id`);
  if (j.isValid !== (j.spans.length > 0)) {
    errors.push(`${where}: worker ${j.workerId}: spans must be non-empty exactly when valid`);
  }
  for (const span of j.spans) {
    if (!(0 <= span[0] && span[0] <= span[1])) {
      errors.push(`${where}: bad span (${span[0]}, ${span[1]})`);
    } else if (span[1] > lastToken) {
      errors.push(`${where}: span (${span[0]}, ${span[1]}) beyond final token ${lastToken}`);
    }
  }
}

function checkPair(
  pair: WireQaPair,
  lastToken: number,
  where: string,
  errors: string[],
): void {
  if (!SOURCES.includes(pair.source)) {
    errors.push(`${where}: unknown source ${JSON.stringify(pair.source)}`);
  }
  checkSlots(pair.slots, where, errors);
  if (pair.source === "generation") {
    const writer = pair.judgments[0];
    if (!writer || writer.spans.length === 0) {
      errors.push(`${where}: generation question needs the writer's spans first`);
    }
  }
  for (const j of pair.judgments) checkJudgment(j, lastToken, where, errors);
}

function checkEntry(
  record: WireSentenceRecord,
  entry: WireVerbEntry,
  errors: string[],
): void {
  const sid = record.sentenceId;
  const v = entry.verbIndex;
  const lastToken = record.tokens.length - 1;
  if (!(0 <= v && v <= lastToken)) {
    errors.push(`${sid}: verb index ${v} out of range`);
    return;
  }
  const tag = record.posTags[v] ?? "";
  if (!tag.startsWith("VB")) {
    errors.push(`${sid}: token ${v} tagged ${tag}, not VB*`);
  }
  const byWorker = new Map<string, Array<{ question: number; span: Span }>>();
  entry.qaPairs.forEach((pair, qi) => {
    checkPair(pair, lastToken, `${sid}: verb ${v}: question ${qi}`, errors);
    for (const j of pair.judgments) {
      const seen = byWorker.get(j.workerId) ?? [];
      for (const span of j.spans) seen.push({ question: qi, span });
      byWorker.set(j.workerId, seen);
    }
  });
  for (const [worker, given] of byWorker) {
    for (let i = 0; i < given.length; i++) {
      for (let k = i + 1; k < given.length; k++) {
        const a = given[i]!;
        const b = given[k]!;
        if (a.question !== b.question && overlaps(a.span, b.span)) {
          errors.push(
            `${sid}: worker ${worker} gave overlapping spans ` +
              `(${a.span[0]},${a.span[1]}) and (${b.span[0]},${b.span[1]}) ` +
              `to distinct questions of verb ${v}`,
          );
        }
      }
    }
  }
}

/** Every violated record rule, as human-readable messages; empty when clean. */
export function checkRecord(record: WireSentenceRecord): string[] {
  const errors: string[] = [];
  const sid = record.sentenceId;
  if (!sid) errors.push("record without a sentence id");
  if (!DOMAINS.includes(record.domain)) {
    errors.push(`${sid}: unknown domain ${JSON.stringify(record.domain)}`);
  }
  if (record.tokens.length === 0) {
    errors.push(`${sid}: empty token list`);
    return errors;
  }
  if (record.posTags.length !== record.tokens.length) {
    errors.push(`${sid}: ${record.posTags.length} tags for ${record.tokens.length} tokens`);
  }
  const indices = record.verbEntries.map((e) => e.verbIndex);
  const ordered = indices.every((x, i) => i === 0 || x > (indices[i - 1] ?? -1));
  if (!ordered) errors.push(`${sid}: verb indices not strictly increasing`);
  for (const entry of record.verbEntries) checkEntry(record, entry, errors);
  return errors;
}
