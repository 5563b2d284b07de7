/** Browser wiring for the annotation screens.
 *
 * All decisions live in the state machines (Composer, SpanBoard,
 * ValidationView); this module only paints them and forwards events.
 * Interaction is keyboard-first: the filter input drives the drop-down
 * with arrow keys and enter, backspace steps back a slot, and token
 * drags highlight answers.
 */

import { ApiClient, ApiError } from "./api.js";
import { Composer } from "./composer.js";
import type { Dropdown } from "./dropdown.js";
import { ValidationView } from "./validation.js";
import type { GenerationTask, Span, ValidationTask } from "./types.js";
import { renderQuestion, valueKey } from "./types.js";

export function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className = "",
  text = "",
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text) node.textContent = text;
  return node;
}

/** Sentence tokens with drag-to-select; selection is reported inclusive. */
export class TokenStrip {
  readonly root = el("div", "tokens");
  private cells: HTMLSpanElement[] = [];
  private dragFrom: number | null = null;
  onSelect: (from: number, to: number) => void = () => {};

  constructor(tokens: string[]) {
    tokens.forEach((token, i) => {
      const cell = el("span", "token", token);
      cell.dataset["index"] = String(i);
      cell.addEventListener("mousedown", (event) => {
        event.preventDefault();
        this.dragFrom = i;
      });
      cell.addEventListener("mouseup", () => {
        if (this.dragFrom === null) return;
        const from = this.dragFrom;
        this.dragFrom = null;
        this.onSelect(from, i);
      });
      this.cells.push(cell);
      this.root.appendChild(cell);
    });
  }

  /** Repaint span highlights; each entry gets `span-q<question>`. */
  paint(spans: Array<{ question: number; span: Span }>): void {
    for (const cell of this.cells) {
      cell.className = "token";
    }
    for (const { question, span } of spans) {
      for (let i = span[0]; i <= span[1]; i++) {
        this.cells[i]?.classList.add("highlight", `span-q${question % 6}`);
      }
    }
  }

  /** Briefly mark a conflicting span so the rejection is visible. */
  flashConflict(span: Span): void {
    const marked: HTMLSpanElement[] = [];
    for (let i = span[0]; i <= span[1]; i++) {
      const cell = this.cells[i];
      if (cell) {
        cell.classList.add("conflict");
        marked.push(cell);
      }
    }
    window.setTimeout(() => {
      for (const cell of marked) cell.classList.remove("conflict");
    }, 800);
  }
}

function paintDropdown(list: HTMLUListElement, dropdown: Dropdown): void {
  list.textContent = "";
  dropdown.visible().forEach((item, row) => {
    const li = el("li", item.kind === "suggestion" ? "suggestion" : "completion");
    li.textContent = item.label;
    if (row === dropdown.activeIndex) li.classList.add("active");
    list.appendChild(li);
  });
}

function errorBanner(message: string, onRetry: () => void): HTMLDivElement {
  const banner = el("div", "error");
  banner.appendChild(el("span", "", message));
  const retry = el("button", "", "Retry");
  retry.addEventListener("click", onRetry);
  banner.appendChild(retry);
  return banner;
}

/** Compose questions and highlight their answers for a generation task. */
export class GenerationScreen {
  readonly root = el("section", "screen");
  private readonly composer: Composer;
  private readonly strip: TokenStrip;
  private readonly committedList = el("ol", "committed");
  private readonly slotsLine = el("div", "slots-line");
  private readonly filter = el("input");
  private readonly list = el("ul", "dropdown");
  private readonly status = el("div", "status");
  private readonly errorBox = el("div");

  constructor(
    api: ApiClient,
    task: GenerationTask,
    private readonly worker: string,
    private readonly onDone: (message: string) => void,
  ) {
    this.composer = new Composer(api, task);
    this.strip = new TokenStrip(task.tokens);
    this.strip.onSelect = (from, to) => this.selectSpan(from, to);

    this.filter.placeholder = "type to filter; arrows + enter to pick; backspace steps back";
    this.filter.addEventListener("keydown", (event) => this.onKey(event));
    this.filter.addEventListener("input", () => {
      this.composer.dropdown.setFilter(this.filter.value);
      this.paint();
    });

    const commit = el("button", "", "Commit question");
    commit.addEventListener("click", () => this.commit());
    const submit = el("button", "", "Submit task");
    submit.addEventListener("click", () => void this.submit());

    this.root.append(
      el("h2", "", `Write questions about “${task.inflections.stem}”`),
      this.strip.root,
      this.committedList,
      this.slotsLine,
      this.filter,
      this.list,
      el("div", "buttons"),
      this.status,
      this.errorBox,
    );
    this.root.querySelector(".buttons")?.append(commit, submit);
    void this.refresh();
  }

  private get questionIndex(): number {
    return this.composer.committed.length;
  }

  private async refresh(): Promise<void> {
    await this.composer.refresh();
    this.filter.value = "";
    this.paint();
  }

  private onKey(event: KeyboardEvent): void {
    if (event.key === "ArrowDown" || event.key === "ArrowUp") {
      event.preventDefault();
      this.composer.dropdown.move(event.key === "ArrowDown" ? 1 : -1);
      this.paint();
    } else if (event.key === "Enter") {
      event.preventDefault();
      if (this.composer.complete) return;
      try {
        this.composer.chooseActive();
      } catch (err) {
        this.note(err instanceof Error ? err.message : String(err));
        return;
      }
      void this.refresh();
    } else if (event.key === "Backspace" && this.filter.value === "") {
      event.preventDefault();
      this.composer.undo();
      void this.refresh();
    }
  }

  private selectSpan(from: number, to: number): void {
    if (!this.composer.complete) {
      this.note("finish the question before highlighting answers");
      return;
    }
    const result = this.composer.board.select(this.questionIndex, from, to);
    if (!result.ok && result.reason === "conflict") {
      this.strip.flashConflict(result.span);
      this.note(`overlaps an answer of question ${result.question + 1}`);
      return;
    }
    this.paintSpans();
  }

  private commit(): void {
    try {
      this.composer.commit(this.composer.board.forQuestion(this.questionIndex));
    } catch (err) {
      this.note(err instanceof Error ? err.message : String(err));
      return;
    }
    void this.refresh();
  }

  private async submit(): Promise<void> {
    try {
      const count = this.composer.committed.length;
      const result = await this.composer.submit(this.worker);
      this.onDone(`submitted ${count} questions for ${result.payment}c`);
    } catch (err) {
      this.note(err instanceof ApiError ? err.message : String(err));
    }
  }

  private note(message: string): void {
    this.status.textContent = message;
  }

  private paintSpans(): void {
    this.strip.paint(this.composer.board.all());
  }

  private paint(): void {
    this.committedList.textContent = "";
    for (const q of this.composer.committed) {
      this.committedList.appendChild(
        el("li", "", renderQuestion(q.slots, this.composer.task.inflections)),
      );
    }
    this.slotsLine.textContent = this.composer.values.map(valueKey).join(" · ");
    paintDropdown(this.list, this.composer.dropdown);
    this.errorBox.textContent = "";
    if (this.composer.error !== null) {
      this.errorBox.appendChild(
        errorBanner(this.composer.error, () => void this.retry()),
      );
    }
    this.status.textContent = this.composer.complete
      ? "drag over the sentence to highlight answers, then commit"
      : "";
    this.paintSpans();
  }

  private async retry(): Promise<void> {
    await this.composer.retry();
    this.paint();
  }
}

/** Judge every question of a validation task. */
export class ValidationScreen {
  readonly root = el("section", "screen");
  private readonly view: ValidationView;
  private readonly strip: TokenStrip;
  private readonly rows: HTMLLIElement[] = [];
  private readonly status = el("div", "status");
  private active = 0;

  constructor(
    api: ApiClient,
    task: ValidationTask,
    private readonly worker: string,
    private readonly onDone: (message: string) => void,
  ) {
    this.view = new ValidationView(api, task);
    this.strip = new TokenStrip(task.tokens);
    this.strip.onSelect = (from, to) => this.selectSpan(from, to);

    const questionList = el("ol", "questions");
    task.questions.forEach((q, i) => {
      const row = el("li");
      row.appendChild(el("span", "qtext", renderQuestion(q.slots, task.inflections)));
      const invalid = el("button", "", "Invalid");
      invalid.addEventListener("click", () => {
        if (this.view.isInvalid(i)) this.view.markValid(i);
        else this.view.markInvalid(i);
        this.paint();
      });
      row.appendChild(invalid);
      row.addEventListener("click", () => {
        this.active = i;
        this.paint();
      });
      this.rows.push(row);
      questionList.appendChild(row);
    });

    const submit = el("button", "", "Submit judgments");
    submit.addEventListener("click", () => void this.submit());

    this.root.append(
      el("h2", "", "Judge each question"),
      this.strip.root,
      questionList,
      submit,
      this.status,
    );
    this.paint();
  }

  private selectSpan(from: number, to: number): void {
    if (this.view.isInvalid(this.active)) {
      this.status.textContent = "question is marked invalid";
      return;
    }
    const result = this.view.addSpan(this.active, from, to);
    if (!result.ok && result.reason === "conflict") {
      this.strip.flashConflict(result.span);
      this.status.textContent = `overlaps an answer of question ${result.question + 1}`;
      return;
    }
    this.paint();
  }

  private async submit(): Promise<void> {
    if (!this.view.canSubmit) {
      this.status.textContent = "every question needs a judgment first";
      return;
    }
    try {
      const result = await this.view.submit(this.worker);
      this.onDone(
        `judged ${this.view.questionCount} questions for ${result.payment}c` +
          (result.complete ? " (task complete)" : ""),
      );
    } catch (err) {
      this.status.textContent = err instanceof ApiError ? err.message : String(err);
    }
  }

  private paint(): void {
    this.rows.forEach((row, i) => {
      row.classList.toggle("active", i === this.active);
      row.classList.toggle("invalid", this.view.isInvalid(i));
      row.classList.toggle("judged", this.view.judged(i));
    });
    this.strip.paint(this.view.board.all());
  }
}
