import { describe, expect, it } from "vitest";

import { ApiClient } from "../src/api.js";
import { Composer } from "../src/composer.js";
import { checkRecord } from "../src/invariants.js";
import { ValidationView } from "../src/validation.js";
import type { SlotValue } from "../src/types.js";
import { ReplayTransport, loadFixture } from "./replay.js";

const fixture = loadFixture("e2e_session.json");

describe("scripted annotation session", () => {
  it("produces an exported record that passes every check", async () => {
    const transport = new ReplayTransport(fixture.entries);
    const api = new ApiClient(transport);

    // Lease the generation task for the bare sentence.
    const task = await api.nextTask("gen-1", "generation");
    if (task.kind !== "generation") throw new Error("expected a generation task");
    expect(task.tokens).toContain("blamed");

    // Question 1, slot by slot, exactly along the recorded walk.
    const composer = new Composer(api, task);
    await composer.refresh();
    for (const entry of fixture.entries.slice(2, 9)) {
      const prefix = (entry.params as { prefix: SlotValue[] }).prefix;
      composer.choose(prefix[prefix.length - 1]!);
      await composer.refresh();
    }
    expect(composer.complete).toBe(true);
    expect(composer.completions).toEqual([]); // nothing left to fill

    expect(composer.board.select(0, 0, 0).ok).toBe(true); // "Kim"
    const first = composer.commit(composer.board.forQuestion(0));
    expect(first.via).toBe("steps");

    // Question 2 from the suggestion list, which now excludes the
    // argument question 1 already covers.
    await composer.refresh();
    const index = composer.suggestions.findIndex(
      (s) => s.rendered === "Who did someone blame?",
    );
    expect(index).toBeGreaterThanOrEqual(0);
    composer.acceptSuggestion(index);
    expect(composer.board.select(1, 2, 2).ok).toBe(true); // "Pat"
    const second = composer.commit(composer.board.forQuestion(1));
    expect(second.via).toBe("suggestion");

    const generation = await composer.submit("gen-1");
    expect(generation.accepted).toBe(true);
    expect(generation.payment).toBe(10); // 5c + 5c for two questions

    // Two validators judge both questions valid with the same answers.
    for (const [n, worker] of ["val-1", "val-2"].entries()) {
      const leased = await api.nextTask(worker, "validation");
      if (leased.kind !== "validation") throw new Error("expected a validation task");
      expect(leased.questions).toHaveLength(2);

      const view = new ValidationView(api, leased);
      expect(view.canSubmit).toBe(false);
      expect(view.addSpan(0, 0, 0).ok).toBe(true);
      expect(view.addSpan(1, 2, 2).ok).toBe(true);
      expect(view.canSubmit).toBe(true);
      const result = await view.submit(worker);
      expect(result.accepted).toBe(true);
      expect(result.payment).toBe(8); // flat rate, two questions
      expect(result.complete).toBe(n === 1);
    }

    // The export holds one finished record that passes every invariant.
    const records = await api.exportCorpus();
    expect(transport.exhausted).toBe(true);
    expect(records).toHaveLength(1);
    const record = records[0]!;
    expect(checkRecord(record)).toEqual([]);

    const entry = record.verbEntries[0]!;
    expect(entry.qaPairs).toHaveLength(2);
    for (const pair of entry.qaPairs) {
      expect(pair.source).toBe("generation");
      expect(pair.judgments.map((j) => j.workerId)).toEqual([
        "gen-1",
        "val-1",
        "val-2",
      ]);
      for (const judgment of pair.judgments) {
        expect(judgment.isValid).toBe(true);
        expect(judgment.spans.length).toBeGreaterThan(0);
      }
    }
    expect(entry.qaPairs[0]!.slots.wh).toBe("who");
    expect(entry.qaPairs[0]!.judgments[0]!.spans).toEqual([[0, 0]]);
    expect(entry.qaPairs[1]!.judgments[0]!.spans).toEqual([[2, 2]]);
  });

  it("rejects a record where one worker's answers to two questions overlap", () => {
    const record = JSON.parse(fixture.entries[15]!.text!.split("\n")[0]!);
    record.verbEntries[0].qaPairs[1].judgments[1].spans = [[0, 0]];
    const errors = checkRecord(record);
    expect(errors.some((e) => e.includes("overlapping spans"))).toBe(true);
  });
});
