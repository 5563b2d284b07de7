/** Replay recorded HTTP exchanges as a Transport.
 *
 * Fixtures are recorded from the real service by record_fixtures.py.
 * Requests are matched structurally (method, path, params, body, with
 * object keys canonicalized) and must arrive in the recorded order, so
 * a drifted client fails loudly with both sides printed.
 */

import { readFileSync } from "node:fs";
import { fileURLToPath } from "node:url";

import type { Transport } from "../src/api.js";

export interface FixtureEntry {
  method: string;
  path: string;
  params?: Record<string, unknown>;
  body?: unknown;
  status: number;
  response?: unknown;
  text?: string;
}

export interface Fixture {
  entries: FixtureEntry[];
}

export function loadFixture(name: string): Fixture {
  const path = fileURLToPath(new URL(`./fixtures/${name}`, import.meta.url));
  return JSON.parse(readFileSync(path, "utf-8")) as Fixture;
}

function sortedDeep(value: unknown): unknown {
  if (Array.isArray(value)) return value.map(sortedDeep);
  if (value !== null && typeof value === "object") {
    const source = value as Record<string, unknown>;
    const out: Record<string, unknown> = {};
    for (const key of Object.keys(source).sort()) {
      out[key] = sortedDeep(source[key]);
    }
    return out;
  }
  return value;
}

/** Canonical JSON: object keys sorted at every depth. */
export function canon(value: unknown): string {
  return JSON.stringify(sortedDeep(value ?? null));
}

export class ReplayTransport implements Transport {
  private cursor = 0;

  constructor(private readonly entries: FixtureEntry[]) {}

  get exhausted(): boolean {
    return this.cursor >= this.entries.length;
  }

  async request(
    method: "GET" | "POST",
    path: string,
    params?: Record<string, unknown>,
    body?: unknown,
  ): Promise<{ status: number; body: unknown; text?: string }> {
    const entry = this.entries[this.cursor];
    if (!entry) {
      throw new Error(`unexpected request ${method} ${path}: fixture exhausted`);
    }
    const label = `request #${this.cursor} (${method} ${path})`;
    if (entry.method !== method || entry.path !== path) {
      throw new Error(`${label}: recording has ${entry.method} ${entry.path}`);
    }
    if (canon(params ?? {}) !== canon(entry.params ?? {})) {
      throw new Error(
        `${label}: params differ\n  sent:     ${canon(params ?? {})}\n` +
          `  recorded: ${canon(entry.params ?? {})}`,
      );
    }
    if (canon(body) !== canon(entry.body)) {
      throw new Error(
        `${label}: body differs\n  sent:     ${canon(body)}\n` +
          `  recorded: ${canon(entry.body)}`,
      );
    }
    this.cursor += 1;
    const result: { status: number; body: unknown; text?: string } = {
      status: entry.status,
      body: entry.response ?? null,
    };
    if (entry.text !== undefined) result.text = entry.text;
    return result;
  }
}

/** Fail the next `failures` requests, then delegate; for retry tests. */
export class FlakyTransport implements Transport {
  constructor(
    private readonly inner: Transport,
    public failures: number,
  ) {}

  async request(
    method: "GET" | "POST",
    path: string,
    params?: Record<string, unknown>,
    body?: unknown,
  ): Promise<{ status: number; body: unknown; text?: string }> {
    if (this.failures > 0) {
      this.failures -= 1;
      throw new Error("network unreachable");
    }
    return this.inner.request(method, path, params, body);
  }
}
