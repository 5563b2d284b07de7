import { describe, expect, it } from "vitest";

import { SpanBoard } from "../src/spans.js";

describe("SpanBoard", () => {
  it("adds a span over free tokens", () => {
    const board = new SpanBoard(10);
    const result = board.select(0, 3, 5);
    expect(result).toEqual({ ok: true, span: [3, 5], removed: false });
    expect(board.forQuestion(0)).toEqual([[3, 5]]);
  });

  it("normalizes a backwards drag", () => {
    const board = new SpanBoard(10);
    expect(board.select(0, 5, 3)).toEqual({ ok: true, span: [3, 5], removed: false });
  });

  it("rejects a drag crossing another question's answer, naming it", () => {
    const board = new SpanBoard(10);
    board.select(1, 4, 6);
    const result = board.select(0, 3, 5);
    expect(result).toEqual({ ok: false, reason: "conflict", question: 1, span: [4, 6] });
    expect(board.forQuestion(0)).toEqual([]);
  });

  it("allows overlapping answers inside one question", () => {
    const board = new SpanBoard(10);
    expect(board.select(0, 2, 5).ok).toBe(true);
    expect(board.select(0, 4, 7).ok).toBe(true);
    expect(board.forQuestion(0)).toHaveLength(2);
  });

  it("toggles an existing span off on re-selection", () => {
    const board = new SpanBoard(10);
    board.select(0, 3, 5);
    const result = board.select(0, 3, 5);
    expect(result).toEqual({ ok: true, span: [3, 5], removed: true });
    expect(board.forQuestion(0)).toEqual([]);
  });

  it("re-adding after a toggle works again", () => {
    const board = new SpanBoard(10);
    board.select(0, 3, 5);
    board.select(0, 3, 5);
    expect(board.select(0, 3, 5).ok).toBe(true);
    expect(board.forQuestion(0)).toEqual([[3, 5]]);
  });

  it("bounds selections to the sentence", () => {
    const board = new SpanBoard(4);
    expect(board.select(0, 2, 4)).toEqual({ ok: false, reason: "out-of-range" });
    expect(board.select(0, -1, 2)).toEqual({ ok: false, reason: "out-of-range" });
    expect(board.select(0, 0, 3).ok).toBe(true);
  });

  it("adjacent spans of different questions do not conflict", () => {
    const board = new SpanBoard(10);
    board.select(0, 0, 2);
    expect(board.select(1, 3, 4).ok).toBe(true);
  });

  it("drag bookkeeping resolves to an inclusive selection", () => {
    const board = new SpanBoard(10);
    board.beginDrag(6);
    const result = board.endDrag(2, 4);
    expect(result).toEqual({ ok: true, span: [4, 6], removed: false });
  });

  it("clearing a question frees its tokens for others", () => {
    const board = new SpanBoard(10);
    board.select(0, 1, 8);
    expect(board.select(1, 2, 3).ok).toBe(false);
    board.clearQuestion(0);
    expect(board.select(1, 2, 3).ok).toBe(true);
  });

  it("lists every highlight with its owner", () => {
    const board = new SpanBoard(10);
    board.select(0, 0, 1);
    board.select(1, 5, 6);
    expect(board.all()).toEqual([
      { question: 0, span: [0, 1] },
      { question: 1, span: [5, 6] },
    ]);
  });
});
