/** Append-only mirror of the streamed telemetry.
 *
 * The charts render these values verbatim; nothing is recomputed on the
 * client, so a chart point is byte-for-byte the streamed number.
 */

import type { TelemetryRow } from "./types.js";

export class SeriesBuffer {
  private rows_: TelemetryRow[] = [];

  /** Highest iteration held so far, or -1 when empty. */
  get lastIteration(): number {
    return this.rows_.length === 0 ? -1 : this.rows_[this.rows_.length - 1].iteration;
  }

  get rows(): readonly TelemetryRow[] {
    return this.rows_;
  }

  /**
   * Insert a row keyed by its iteration. Duplicates (stream reconnects
   * replay from the resume point) are ignored; a gap means rows were
   * missed and the caller should resubscribe from lastIteration.
   */
  append(row: TelemetryRow): "appended" | "duplicate" | "gap" {
    const expected = this.lastIteration + 1;
    if (row.iteration < expected) {
      return "duplicate";
    }
    if (row.iteration > expected) {
      return "gap";
    }
    this.rows_.push(row);
    return "appended";
  }

  column<K extends keyof TelemetryRow>(name: K): Array<TelemetryRow[K]> {
    return this.rows_.map((r) => r[name]);
  }

  /** Iterations whose rows carry an event marker. */
  eventIterations(): number[] {
    return this.rows_.filter((r) => r.event_marker !== "").map((r) => r.iteration);
  }

  clear(): void {
    this.rows_ = [];
  }
}

/** Parse the body of a telemetry CSV download into rows (header checked). */
export function parseTelemetryCsv(text: string): TelemetryRow[] {
  const lines = text.split("\n").filter((l) => l.length > 0);
  if (lines.length === 0) {
    throw new Error("empty telemetry CSV");
  }
  const header = splitCsvLine(lines[0]);
  const expected =
    "iteration,t,H,kappa_mean_unweighted,kappa_mean_weighted,sigma,sigma_hat," +
    "gamma_total,v_total,event_marker";
  if (header.join(",") !== expected) {
    throw new Error(`unexpected telemetry header: ${lines[0]}`);
  }
  return lines.slice(1).map((line) => {
    const parts = splitCsvLine(line);
    const num = (s: string): number | null => (s === "" ? null : Number(s));
    return {
      iteration: Number(parts[0]),
      t: Number(parts[1]),
      H: Number(parts[2]),
      kappa_mean_unweighted: Number(parts[3]),
      kappa_mean_weighted: Number(parts[4]),
      sigma: num(parts[5]),
      sigma_hat: num(parts[6]),
      gamma_total: num(parts[7]),
      v_total: num(parts[8]),
      event_marker: parts[9],
    };
  });
}

/** Minimal CSV field splitter: handles the quoted event-marker column. */
export function splitCsvLine(line: string): string[] {
  const out: string[] = [];
  let cur = "";
  let quoted = false;
  for (let i = 0; i < line.length; i++) {
    const ch = line[i];
    if (quoted) {
      if (ch === '"') {
        if (line[i + 1] === '"') {
          cur += '"';
          i++;
        } else {
          quoted = false;
        }
      } else {
        cur += ch;
      }
    } else if (ch === '"') {
      quoted = true;
    } else if (ch === ",") {
      out.push(cur);
      cur = "";
    } else {
      cur += ch;
    }
  }
  out.push(cur);
  return out;
}

/** Round to the CSV's 12-significant-digit representation. */
export function atCsvPrecision(x: number): number {
  return Number(x.toPrecision(12));
}

/**
 * Compare chart-held values against a telemetry CSV download.
 *
 * The stream carries full-precision floats while the file is formatted to
 * 12 significant digits, so numbers are compared exactly at the file's
 * precision; markers compare byte-for-byte. Returns the first mismatch
 * description, or null when everything matches.
 */
export function verifyAgainstCsv(buffer: SeriesBuffer, csvText: string): string | null {
  const fileRows = parseTelemetryCsv(csvText);
  const held = buffer.rows;
  if (held.length > fileRows.length) {
    return `buffer holds ${held.length} rows but file has ${fileRows.length}`;
  }
  const numericKeys = [
    "t",
    "H",
    "kappa_mean_unweighted",
    "kappa_mean_weighted",
    "sigma",
    "sigma_hat",
    "gamma_total",
    "v_total",
  ] as const;
  for (let i = 0; i < held.length; i++) {
    const a = held[i];
    const b = fileRows[i];
    if (a.iteration !== b.iteration) {
      return `row ${i}: iteration ${a.iteration} vs ${b.iteration}`;
    }
    if (a.event_marker !== b.event_marker) {
      return `row ${i}: marker ${a.event_marker} vs ${b.event_marker}`;
    }
    for (const key of numericKeys) {
      const av = a[key];
      const bv = b[key];
      if (av === null || bv === null) {
        if (av !== bv) {
          return `row ${i} field ${key}: chart=${String(av)} csv=${String(bv)}`;
        }
        continue;
      }
      if (atCsvPrecision(av) !== bv) {
        return `row ${i} field ${key}: chart=${av} csv=${bv}`;
      }
    }
  }
  return null;
}
