/** Keyboard-first drop-down state: suggestions above completions.
 *
 * Pure list navigation; the composer decides what the items mean.
 * Arrow keys move the active row (wrapping), enter picks it, and a
 * typed filter narrows rows by substring without changing their order.
 */

export interface DropdownItem {
  kind: "suggestion" | "completion";
  /** Index into the composer's suggestion or completion list. */
  index: number;
  label: string;
}

export class Dropdown {
  private items: DropdownItem[] = [];
  private filterText = "";
  activeIndex = -1;

  setItems(suggestionLabels: string[], completionLabels: string[]): void {
    this.items = [
      ...suggestionLabels.map((label, index) => ({
        kind: "suggestion" as const,
        index,
        label,
      })),
      ...completionLabels.map((label, index) => ({
        kind: "completion" as const,
        index,
        label,
      })),
    ];
    this.filterText = "";
    this.activeIndex = this.items.length > 0 ? 0 : -1;
  }

  setFilter(text: string): void {
    this.filterText = text.toLowerCase();
    this.activeIndex = this.visible().length > 0 ? 0 : -1;
  }

  visible(): DropdownItem[] {
    if (this.filterText === "") return this.items;
    return this.items.filter((item) =>
      item.label.toLowerCase().includes(this.filterText),
    );
  }

  /** Labels in display order, exactly as rendered. */
  labels(): string[] {
    return this.visible().map((item) => item.label);
  }

  move(delta: 1 | -1): void {
    const rows = this.visible();
    if (rows.length === 0) {
      this.activeIndex = -1;
      return;
    }
    this.activeIndex =
      (this.activeIndex + delta + rows.length) % rows.length;
  }

  active(): DropdownItem | null {
    const rows = this.visible();
    return this.activeIndex >= 0 && this.activeIndex < rows.length
      ? rows[this.activeIndex] ?? null
      : null;
  }
}
