/** Export a session's action log as a run manifest replayable by the CLI.
 *
 * `ricciflow simulate <manifest.json>` re-executes the exported file and
 * produces telemetry byte-identical to the interactive session.
 */

import type { InjectAction, SessionAction, SessionConfig } from "./types.js";

export interface ScheduleEntry {
  iteration: number;
  p: number;
  targets?: Array<string | number>;
  top_k?: number;
}

export interface RunManifest {
  kind: "ricciflow-run";
  package_version: string;
  steps: number;
  config: {
    beta_sq: number;
    dt: number;
    normalization: string;
    sign_convention: string;
    curvature_refresh_every: number;
  };
  schedule: ScheduleEntry[];
  graph: { generator: { n: number; m: number; seed: number } };
}

export function scheduleFromActions(actions: readonly SessionAction[]): ScheduleEntry[] {
  const injects = actions.filter((a): a is InjectAction => a.action === "inject");
  return injects.map((a) => {
    const entry: ScheduleEntry = { iteration: a.iteration, p: a.p };
    if (a.targets !== undefined) {
      entry.targets = a.targets;
    } else {
      entry.top_k = a.top_k;
    }
    return entry;
  });
}

export function finalIteration(actions: readonly SessionAction[]): number {
  let iteration = 0;
  for (const a of actions) {
    if (a.action === "step") {
      iteration = a.iteration;
    }
  }
  return iteration;
}

export function buildManifest(
  cfg: SessionConfig,
  actions: readonly SessionAction[],
  packageVersion = "0.1.0",
): RunManifest {
  return {
    kind: "ricciflow-run",
    package_version: packageVersion,
    steps: finalIteration(actions),
    config: {
      beta_sq: cfg.beta_sq,
      dt: cfg.dt,
      normalization: "global",
      sign_convention: "proof",
      curvature_refresh_every: 1,
    },
    schedule: scheduleFromActions(actions),
    graph: { generator: { n: cfg.n, m: cfg.m, seed: cfg.seed } },
  };
}
