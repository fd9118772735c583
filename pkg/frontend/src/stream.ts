/** Live telemetry feed with resume-on-reconnect.
 *
 * EventSource replays from the last delivered sequence number via the
 * `since` query parameter, so a dropped connection never loses or
 * duplicates chart rows (the SeriesBuffer drops replays defensively too).
 */

import type { TelemetryRow } from "./types.js";

export interface StreamHandlers {
  onRow: (row: TelemetryRow) => void;
  onStateChange?: (state: "connecting" | "open" | "closed") => void;
}

export class TelemetryStream {
  private source: EventSource | null = null;
  private lastSeq: number;

  constructor(
    private readonly urlFor: (since: number) => string,
    startAfter: number,
    private readonly handlers: StreamHandlers,
  ) {
    this.lastSeq = startAfter;
  }

  connect(): void {
    this.close();
    this.handlers.onStateChange?.("connecting");
    const source = new EventSource(this.urlFor(this.lastSeq));
    this.source = source;
    source.onopen = () => this.handlers.onStateChange?.("open");
    source.onmessage = (ev) => {
      const row = JSON.parse(ev.data) as TelemetryRow;
      if (row.iteration > this.lastSeq) {
        this.lastSeq = row.iteration;
        this.handlers.onRow(row);
      }
    };
    source.onerror = () => {
      // EventSource retries on its own, but it reconnects to the original
      // URL; rebuild it so the resume point advances.
      source.close();
      this.handlers.onStateChange?.("closed");
      setTimeout(() => this.connect(), 800);
    };
  }

  close(): void {
    if (this.source) {
      this.source.close();
      this.source = null;
      this.handlers.onStateChange?.("closed");
    }
  }
}
