/** Typed client for the annotation service; all traffic goes through here. */

import type {
  AutocompleteResponse,
  ErrorBody,
  GenerationResult,
  JudgmentPayload,
  QaPairPayload,
  SlotValue,
  Task,
  ValidationResult,
  WireSentenceRecord,
  WireSlots,
} from "./types.js";

/** One HTTP exchange, abstracted so tests can replay recorded traffic. */
export interface Transport {
  request(
    method: "GET" | "POST",
    path: string,
    params?: Record<string, unknown>,
    body?: unknown,
  ): Promise<{ status: number; body: unknown; text?: string }>;
}

export class ApiError extends Error {
  readonly code: string;
  readonly status: number;
  readonly detail: unknown;

  constructor(status: number, body: ErrorBody) {
    super(body.message ?? body.code ?? `HTTP ${status}`);
    this.code = body.code ?? "unknown";
    this.status = status;
    this.detail = body.detail;
  }
}

/** Structured values become compact JSON query parameters. */
export function encodeParam(value: unknown): string {
  return typeof value === "string" ? value : JSON.stringify(value);
}

export class HttpTransport implements Transport {
  constructor(private readonly baseUrl: string = "") {}

  async request(
    method: "GET" | "POST",
    path: string,
    params?: Record<string, unknown>,
    body?: unknown,
  ): Promise<{ status: number; body: unknown; text?: string }> {
    const query = new URLSearchParams();
    for (const [key, value] of Object.entries(params ?? {})) {
      query.set(key, encodeParam(value));
    }
    const url =
      this.baseUrl + path + (query.size > 0 ? `?${query.toString()}` : "");
    const response = await fetch(url, {
      method,
      headers: body === undefined ? {} : { "content-type": "application/json" },
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    const text = await response.text();
    const contentType = response.headers.get("content-type") ?? "";
    // Exact-type check: the ndjson export must stay raw text.
    const parsed =
      contentType.startsWith("application/json") && text ? JSON.parse(text) : null;
    return { status: response.status, body: parsed, text };
  }
}

function unwrap<T>(result: { status: number; body: unknown }): T {
  if (result.status >= 400) {
    throw new ApiError(result.status, (result.body ?? {}) as ErrorBody);
  }
  return result.body as T;
}

export class ApiClient {
  constructor(private readonly transport: Transport) {}

  async nextTask(worker: string, kind: "generation" | "validation"): Promise<Task> {
    const result = await this.transport.request("GET", "/api/task/next", {
      worker,
      kind,
    });
    return unwrap<Task>(result);
  }

  async autocomplete(
    verb: string,
    prefix: SlotValue[],
    committed: WireSlots[] = [],
  ): Promise<AutocompleteResponse> {
    const result = await this.transport.request("GET", "/api/autocomplete", {
      verb,
      prefix,
      committed,
    });
    return unwrap<AutocompleteResponse>(result);
  }

  async submitGeneration(
    taskId: string,
    worker: string,
    qaPairs: QaPairPayload[],
  ): Promise<GenerationResult> {
    const result = await this.transport.request(
      "POST",
      `/api/task/${taskId}/generation`,
      undefined,
      { worker, qaPairs },
    );
    return unwrap<GenerationResult>(result);
  }

  async submitValidation(
    taskId: string,
    worker: string,
    judgments: JudgmentPayload[],
  ): Promise<ValidationResult> {
    const result = await this.transport.request(
      "POST",
      `/api/task/${taskId}/validation`,
      undefined,
      { worker, judgments },
    );
    return unwrap<ValidationResult>(result);
  }

  async exportCorpus(): Promise<WireSentenceRecord[]> {
    const result = await this.transport.request("GET", "/api/export");
    if (result.status >= 400) {
      throw new ApiError(result.status, (result.body ?? {}) as ErrorBody);
    }
    const text = result.text ?? "";
    return text
      .split("\n")
      .filter((line) => line.trim().length > 0)
      .map((line) => JSON.parse(line) as WireSentenceRecord);
  }
}
