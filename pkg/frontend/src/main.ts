/** Entry point: lease tasks for a worker and show the matching screen. */

import { ApiClient, ApiError, HttpTransport } from "./api.js";
import { GenerationScreen, ValidationScreen, el } from "./dom.js";

function start(): void {
  const root = document.getElementById("app");
  if (!root) throw new Error("missing #app container");

  // Same origin by default; ?api=http://host:port points elsewhere.
  const base = new URLSearchParams(location.search).get("api") ?? "";
  const api = new ApiClient(new HttpTransport(base));
  const bar = el("form", "workbar");
  const workerInput = el("input");
  workerInput.placeholder = "worker id";
  workerInput.value = "local";
  const kindSelect = el("select");
  for (const kind of ["generation", "validation"]) {
    const option = el("option", "", kind);
    option.value = kind;
    kindSelect.appendChild(option);
  }
  const next = el("button", "", "Next task");
  bar.append(workerInput, kindSelect, next);

  const stage = el("div", "stage");
  const message = el("div", "message");
  root.append(bar, message, stage);

  async function lease(): Promise<void> {
    const worker = workerInput.value.trim() || "local";
    const kind = kindSelect.value as "generation" | "validation";
    message.textContent = "";
    stage.textContent = "";
    try {
      const task = await api.nextTask(worker, kind);
      const done = (note: string): void => {
        stage.textContent = "";
        message.textContent = note;
      };
      const screen =
        task.kind === "generation"
          ? new GenerationScreen(api, task, worker, done)
          : new ValidationScreen(api, task, worker, done);
      stage.appendChild(screen.root);
    } catch (err) {
      if (err instanceof ApiError && err.code === "no-tasks") {
        message.textContent = `no open ${kind} tasks right now`;
      } else {
        message.textContent = err instanceof Error ? err.message : String(err);
      }
    }
  }

  bar.addEventListener("submit", (event) => {
    event.preventDefault();
    void lease();
  });
  next.addEventListener("click", (event) => {
    event.preventDefault();
    void lease();
  });
}

document.addEventListener("DOMContentLoaded", start);
