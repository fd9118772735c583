/** Thin fetch wrapper over the session gateway.
 *
 * Mutating calls carry a fresh request token and are serialized: at most
 * one step/inject is in flight per session at any time.
 */

import type { SessionAction, SessionConfig, Snapshot, TelemetryRow } from "./types.js";

export class GatewayError extends Error {
  constructor(
    public readonly status: number,
    detail: string,
  ) {
    super(detail);
  }
}

async function expectOk(resp: Response): Promise<any> {
  if (!resp.ok) {
    let detail = resp.statusText;
    try {
      const body = await resp.json();
      if (typeof body.detail === "string") {
        detail = body.detail;
      }
    } catch {
      // keep the status text
    }
    throw new GatewayError(resp.status, detail);
  }
  return resp.json();
}

let tokenCounter = 0;

function freshToken(): string {
  tokenCounter += 1;
  return `console-${Date.now().toString(36)}-${tokenCounter}`;
}

export class GatewayClient {
  private pending: Promise<unknown> = Promise.resolve();

  constructor(
    public readonly baseUrl: string,
    public readonly sessionId: string,
  ) {}

  static async createSession(baseUrl: string, cfg: SessionConfig): Promise<{ client: GatewayClient; snapshot: Snapshot }> {
    const resp = await fetch(`${baseUrl}/sessions`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(cfg),
    });
    const body = await expectOk(resp);
    return { client: new GatewayClient(baseUrl, body.session_id), snapshot: body.snapshot };
  }

  /** Serialize mutating calls: one in flight per session. */
  private enqueue<T>(fn: () => Promise<T>): Promise<T> {
    const next = this.pending.then(fn, fn);
    this.pending = next.catch(() => undefined);
    return next;
  }

  step(count: number): Promise<{ snapshot: Snapshot; rows: TelemetryRow[] }> {
    return this.enqueue(async () => {
      const resp = await fetch(`${this.baseUrl}/sessions/${this.sessionId}/step`, {
        method: "POST",
        headers: { "content-type": "application/json" },
        body: JSON.stringify({ count, request_token: freshToken() }),
      });
      return expectOk(resp);
    });
  }

  inject(p: number, targets: Array<string | number> | null, topK: number | null): Promise<any> {
    return this.enqueue(async () => {
      const body: Record<string, unknown> = { p, request_token: freshToken() };
      if (targets !== null) {
        body.targets = targets;
      } else {
        body.top_k = topK ?? 1;
      }
      const resp = await fetch(`${this.baseUrl}/sessions/${this.sessionId}/inject`, {
        method: "POST",
        headers: { "content-type": "application/json" },
        body: JSON.stringify(body),
      });
      return expectOk(resp);
    });
  }

  async snapshot(): Promise<Snapshot> {
    const resp = await fetch(`${this.baseUrl}/sessions/${this.sessionId}/snapshot`);
    return expectOk(resp);
  }

  async actions(): Promise<SessionAction[]> {
    const resp = await fetch(`${this.baseUrl}/sessions/${this.sessionId}/actions`);
    const body = await expectOk(resp);
    return body.actions;
  }

  async telemetryCsv(): Promise<string> {
    const resp = await fetch(this.telemetryCsvUrl());
    if (!resp.ok) {
      throw new GatewayError(resp.status, resp.statusText);
    }
    return resp.text();
  }

  telemetryCsvUrl(): string {
    return `${this.baseUrl}/sessions/${this.sessionId}/telemetry.csv`;
  }

  streamUrl(since: number): string {
    return `${this.baseUrl}/sessions/${this.sessionId}/stream?since=${since}`;
  }
}
