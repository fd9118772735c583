/** DOM wiring for the operator console. */

import { GatewayClient, GatewayError } from "./api.js";
import { LineChart } from "./charts.js";
import { buildManifest } from "./export.js";
import { GraphView } from "./graphview.js";
import { SeriesBuffer, verifyAgainstCsv } from "./series.js";
import { TelemetryStream } from "./stream.js";
import type { SessionConfig, Snapshot, TelemetryRow } from "./types.js";

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) {
    throw new Error(`missing element #${id}`);
  }
  return node as T;
}

const state = {
  client: null as GatewayClient | null,
  stream: null as TelemetryStream | null,
  cfg: null as SessionConfig | null,
  buffer: new SeriesBuffer(),
  running: false,
  busy: false,
};

const statusLine = el<HTMLSpanElement>("status");
const errorLine = el<HTMLDivElement>("error");
const graphView = new GraphView(el<HTMLCanvasElement>("graph"));
const mainChart = new LineChart(el<HTMLCanvasElement>("chart-main"), "network entropy / mean curvature");
const errorChart = new LineChart(el<HTMLCanvasElement>("chart-errors"), "error totals");
const selectionLabel = el<HTMLSpanElement>("selection");
const injectButton = el<HTMLButtonElement>("inject");

graphView.onSelectionChange = (selected) => {
  selectionLabel.textContent = selected.length === 0 ? "none" : selected.join(", ");
  injectButton.disabled = selected.length === 0 && !useTopK();
};

function useTopK(): boolean {
  return el<HTMLInputElement>("use-topk").checked;
}

function showError(message: string | null): void {
  errorLine.textContent = message ?? "";
  errorLine.style.display = message ? "block" : "none";
}

function setStatus(text: string): void {
  statusLine.textContent = text;
}

function redrawCharts(): void {
  const iterations = state.buffer.column("iteration");
  const events = state.buffer.eventIterations();
  mainChart.draw(
    iterations,
    [
      { label: "H", color: "#1f77b4", values: state.buffer.column("H") },
      {
        label: "mean kappa",
        color: "#d62728",
        values: state.buffer.column("kappa_mean_unweighted"),
      },
    ],
    events,
  );
  errorChart.draw(
    iterations,
    [
      { label: "tracking", color: "#2ca02c", values: state.buffer.column("sigma_hat") },
      { label: "input", color: "#9467bd", values: state.buffer.column("gamma_total") },
      { label: "total", color: "#111", values: state.buffer.column("v_total") },
    ],
    events,
  );
}

function rowFromSnapshot(snapshot: Snapshot): TelemetryRow {
  return {
    iteration: snapshot.iteration,
    t: snapshot.t,
    H: snapshot.H,
    kappa_mean_unweighted: snapshot.kappa_mean_unweighted,
    kappa_mean_weighted: snapshot.kappa_mean_weighted,
    sigma: snapshot.sigma,
    sigma_hat: snapshot.sigma_hat,
    gamma_total: snapshot.gamma_total,
    v_total: snapshot.v_total,
    event_marker: snapshot.event_marker,
  };
}

async function connect(): Promise<void> {
  showError(null);
  const cfg: SessionConfig = {
    n: Number(el<HTMLInputElement>("cfg-n").value),
    m: Number(el<HTMLInputElement>("cfg-m").value),
    seed: Number(el<HTMLInputElement>("cfg-seed").value),
    beta_sq: Number(el<HTMLInputElement>("cfg-beta2").value),
    dt: Number(el<HTMLInputElement>("cfg-dt").value),
  };
  try {
    setStatus("connecting…");
    const { client, snapshot } = await GatewayClient.createSession("", cfg);
    state.client = client;
    state.cfg = cfg;
    state.buffer.clear();
    state.buffer.append(rowFromSnapshot(snapshot));
    graphView.setGraph(snapshot);
    redrawCharts();
    setStatus(`session ${client.sessionId.slice(0, 8)}… @ iteration ${snapshot.iteration}`);
    state.stream?.close();
    state.stream = new TelemetryStream(
      (since) => client.streamUrl(since),
      snapshot.iteration,
      {
        onRow: (row) => {
          state.buffer.append(row);
          redrawCharts();
          setStatus(`session ${client.sessionId.slice(0, 8)}… @ iteration ${row.iteration}`);
        },
      },
    );
    state.stream.connect();
  } catch (err) {
    state.client = null;
    setStatus("not connected");
    showError(err instanceof GatewayError ? `gateway: ${err.message}` : String(err));
  }
}

async function doStep(count: number): Promise<void> {
  if (!state.client || state.busy) {
    return;
  }
  state.busy = true;
  try {
    const { snapshot } = await state.client.step(count);
    graphView.updateState(snapshot);
    showError(null);
  } catch (err) {
    showError(err instanceof GatewayError ? `gateway: ${err.message}` : String(err));
    state.running = false;
  } finally {
    state.busy = false;
  }
}

async function doInject(): Promise<void> {
  if (!state.client) {
    return;
  }
  const p = Number(el<HTMLInputElement>("inject-p").value);
  if (!Number.isFinite(p)) {
    showError("input p must be a finite number");
    return;
  }
  const topK = useTopK() ? Number(el<HTMLInputElement>("topk").value) : null;
  const targets = topK === null ? graphView.selection : null;
  if (topK === null && (targets === null || targets.length === 0)) {
    showError("select nodes on the graph or switch to top-k targeting");
    return;
  }
  try {
    await state.client.inject(p, targets, topK);
    showError(null);
    // marker arrives with the next streamed row; charts pick it up there
  } catch (err) {
    showError(err instanceof GatewayError ? `gateway: ${err.message}` : String(err));
  }
}

async function runLoop(): Promise<void> {
  while (state.running && state.client) {
    await doStep(1);
    await new Promise((resolve) => setTimeout(resolve, 60));
  }
}

async function exportLog(): Promise<void> {
  if (!state.client || !state.cfg) {
    return;
  }
  const actions = await state.client.actions();
  const manifest = buildManifest(state.cfg, actions);
  const blob = new Blob([JSON.stringify(manifest, null, 2) + "\n"], {
    type: "application/json",
  });
  const a = document.createElement("a");
  a.href = URL.createObjectURL(blob);
  a.download = "session_manifest.json";
  a.click();
  URL.revokeObjectURL(a.href);
}

async function verifyCharts(): Promise<void> {
  if (!state.client) {
    return;
  }
  const csv = await state.client.telemetryCsv();
  const mismatch = verifyAgainstCsv(state.buffer, csv);
  showError(mismatch ? `chart/CSV mismatch: ${mismatch}` : null);
  if (!mismatch) {
    setStatus(`${statusLine.textContent} — charts match CSV (${state.buffer.rows.length} rows)`);
  }
}

el<HTMLButtonElement>("connect").addEventListener("click", () => void connect());
el<HTMLButtonElement>("step-1").addEventListener("click", () => void doStep(1));
el<HTMLButtonElement>("step-10").addEventListener("click", () => void doStep(10));
el<HTMLButtonElement>("run").addEventListener("click", () => {
  state.running = !state.running;
  el<HTMLButtonElement>("run").textContent = state.running ? "pause" : "run";
  if (state.running) {
    void runLoop();
  }
});
injectButton.addEventListener("click", () => void doInject());
el<HTMLButtonElement>("clear-selection").addEventListener("click", () => graphView.clearSelection());
el<HTMLButtonElement>("export").addEventListener("click", () => void exportLog());
el<HTMLButtonElement>("verify").addEventListener("click", () => void verifyCharts());
el<HTMLAnchorElement>("download-csv").addEventListener("click", (ev) => {
  ev.preventDefault();
  if (state.client) {
    window.open(state.client.telemetryCsvUrl(), "_blank");
  }
});
