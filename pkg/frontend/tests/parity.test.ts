import { describe, expect, it } from "vitest";

import { ApiClient } from "../src/api.js";
import { Composer } from "../src/composer.js";
import type {
  AutocompleteResponse,
  GenerationTask,
  SlotValue,
} from "../src/types.js";
import { ReplayTransport, loadFixture } from "./replay.js";

const fixture = loadFixture("autocomplete_parity.json");

function taskFor(stem: string): GenerationTask {
  return {
    taskId: "parity",
    kind: "generation",
    sentenceId: "parity",
    verbIndex: 0,
    requiredJudgments: 2,
    state: "assigned",
    tokens: [stem],
    inflections: {
      stem,
      presentSingular3rd: stem,
      presentParticiple: stem,
      past: stem,
      pastParticiple: stem,
    },
  };
}

describe("drop-down parity with the server", () => {
  it("holds byte-for-byte on 100 recorded reachable prefixes", async () => {
    expect(fixture.entries).toHaveLength(100);
    const verbs = new Set<string>();

    for (const entry of fixture.entries) {
      const params = entry.params as { verb: string; prefix: SlotValue[] };
      const response = entry.response as AutocompleteResponse;
      verbs.add(params.verb);

      const composer = new Composer(
        new ApiClient(new ReplayTransport([entry])),
        taskFor(params.verb),
      );
      composer.values = [...params.prefix];
      await composer.refresh();
      expect(composer.error).toBeNull();

      const expected = [
        ...response.suggestions.map((s) => s.rendered),
        ...response.completions.map((c) => c.display),
      ];
      const shown = composer.dropdown.labels();
      expect(JSON.stringify(shown)).toBe(JSON.stringify(expected));

      const kinds = composer.dropdown.visible().map((item) => item.kind);
      for (let i = 0; i < kinds.length; i++) {
        expect(kinds[i]).toBe(
          i < response.suggestions.length ? "suggestion" : "completion",
        );
      }
    }

    // The walk covered several verbs, not just one inflection table.
    expect(verbs.size).toBeGreaterThanOrEqual(3);
  });

  it("covers prefixes at every composable depth", () => {
    const depths = new Set(
      fixture.entries.map(
        (entry) => (entry.params as { prefix: SlotValue[] }).prefix.length,
      ),
    );
    expect(depths.has(0)).toBe(true);
    expect(Math.max(...depths)).toBeGreaterThanOrEqual(5);
  });
});
