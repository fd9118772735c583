/** Wire types mirroring the gateway payloads. */

/** One telemetry row; field names match the CSV columns exactly. */
export interface TelemetryRow {
  iteration: number;
  t: number;
  H: number;
  kappa_mean_unweighted: number;
  kappa_mean_weighted: number;
  sigma: number | null;
  sigma_hat: number | null;
  gamma_total: number | null;
  v_total: number | null;
  event_marker: string;
}

export interface SnapshotNode {
  id: string | number;
  degree: number;
}

export interface SnapshotEdge {
  u: string | number;
  v: string | number;
  w: number;
  kappa?: number;
}

export interface Snapshot extends TelemetryRow {
  session_id: string;
  status: string;
  n_nodes: number;
  n_edges: number;
  nodes: SnapshotNode[];
  edges: SnapshotEdge[];
}

export interface SessionConfig {
  n: number;
  m: number;
  seed: number;
  beta_sq: number;
  dt: number;
}

export interface InjectAction {
  action: "inject";
  iteration: number;
  p: number;
  targets?: Array<string | number>;
  top_k?: number;
}

export interface StepAction {
  action: "step";
  count: number;
  iteration: number;
}

export type SessionAction = InjectAction | StepAction;

export const TELEMETRY_COLUMNS = [
  "iteration",
  "t",
  "H",
  "kappa_mean_unweighted",
  "kappa_mean_weighted",
  "sigma",
  "sigma_hat",
  "gamma_total",
  "v_total",
  "event_marker",
] as const;
