"""Experiment harness: presets, run manifests, replay, and telemetry analysis.

A run manifest pins everything needed to reproduce a run bit-for-bit:
graph source (generator parameters or file digest), schedule, control
configuration, and step count. ``replay_manifest`` re-executes it and the
output is byte-identical to the original telemetry.
"""

from __future__ import annotations

import hashlib
import json
import os
from dataclasses import asdict, dataclass

import numpy as np

from . import __version__ as _pkg_version
from .errors import ParameterError, ParseError
from .flow import ControlConfig, Telemetry, simulate
from .graph import WeightedGraph, generate_scale_free, load_graph_file
from .schedule import InputSchedule, preset_schedule

MANIFEST_KIND = "ricciflow-run"
DEFAULT_NOISE_FLOOR = 1e-6
DEFAULT_EVENT_WINDOW = 25


@dataclass(frozen=True)
class ExperimentSpec:
    """Everything that defines one reproducible run."""

    schedule: InputSchedule
    cfg: ControlConfig
    steps: int
    n: int | None = None
    m: int | None = None
    seed: int | None = None
    graph_path: str | None = None

    def __post_init__(self):
        have_gen = self.n is not None
        have_path = self.graph_path is not None
        if have_gen == have_path:
            raise ParameterError("specify either generator parameters or a graph path")
        if self.steps < 0:
            raise ParameterError("steps must be nonnegative")
        if self.schedule.events and self.steps < self.schedule.max_iteration:
            raise ParameterError(
                f"steps={self.steps} is below the last event iteration "
                f"{self.schedule.max_iteration}"
            )

    def build_graph(self) -> WeightedGraph:
        if self.graph_path is not None:
            return load_graph_file(self.graph_path).normalize(self.cfg.normalization)
        return generate_scale_free(self.n, self.m or 2, self.seed or 0)

    def to_manifest(self) -> dict:
        doc: dict = {
            "kind": MANIFEST_KIND,
            "package_version": _pkg_version,
            "steps": self.steps,
            "config": asdict(self.cfg),
            "schedule": self.schedule.to_json_obj(),
        }
        if self.graph_path is not None:
            doc["graph"] = {
                "path": os.path.abspath(self.graph_path),
                "sha256": _file_digest(self.graph_path),
            }
        else:
            doc["graph"] = {"generator": {"n": self.n, "m": self.m or 2, "seed": self.seed or 0}}
        return doc

    @classmethod
    def from_manifest(cls, doc: dict) -> "ExperimentSpec":
        if not isinstance(doc, dict) or "graph" not in doc:
            raise ParseError("manifest must be an object with a 'graph' section")
        cfg_doc = doc.get("config", {})
        try:
            cfg = ControlConfig(**cfg_doc)
        except TypeError as exc:
            raise ParseError(f"bad config section: {exc}") from None
        schedule = InputSchedule.from_json_obj(doc.get("schedule", []))
        graph = doc["graph"]
        if "generator" in graph:
            gen = graph["generator"]
            return cls(
                schedule=schedule,
                cfg=cfg,
                steps=int(doc["steps"]),
                n=int(gen["n"]),
                m=int(gen.get("m", 2)),
                seed=int(gen.get("seed", 0)),
            )
        path = graph["path"]
        expected = graph.get("sha256")
        if expected is not None and os.path.exists(path):
            actual = _file_digest(path)
            if actual != expected:
                raise ParameterError(
                    f"graph file {path} changed since the manifest was written"
                )
        return cls(schedule=schedule, cfg=cfg, steps=int(doc["steps"]), graph_path=path)


def _file_digest(path: str) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            h.update(chunk)
    return h.hexdigest()


# -- run / replay -----------------------------------------------------------------


def run_experiment(
    spec: ExperimentSpec,
    out_dir: str | None = None,
    stem: str = "telemetry",
    render: bool = True,
) -> tuple[Telemetry, dict[str, str]]:
    """Execute a spec; optionally write telemetry, manifest, and figures.

    Returns the telemetry and a map of artifact names to file paths. All
    files are written atomically (tmp + rename), so a failed run leaves no
    partial outputs.
    """
    g = spec.build_graph()
    telemetry = simulate(g, spec.schedule, spec.cfg, spec.steps)
    paths: dict[str, str] = {}
    if out_dir is not None:
        os.makedirs(out_dir, exist_ok=True)
        csv_path = os.path.join(out_dir, f"{stem}.csv")
        json_path = os.path.join(out_dir, f"{stem}.json")
        manifest_path = os.path.join(out_dir, f"{stem}_manifest.json")
        _atomic_write(csv_path, telemetry.to_csv_text())
        _atomic_write(json_path, json.dumps(telemetry.to_json_obj(), indent=2) + "\n")
        _atomic_write(manifest_path, json.dumps(spec.to_manifest(), indent=2) + "\n")
        paths = {"csv": csv_path, "json": json_path, "manifest": manifest_path}
        if render:
            from .figures import render_telemetry_figures

            for name, p in render_telemetry_figures(telemetry, out_dir, stem).items():
                paths[name] = p
    return telemetry, paths


def load_manifest(path: str) -> ExperimentSpec:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ParseError(f"{path}: invalid JSON: {exc}") from None
    return ExperimentSpec.from_manifest(doc)


def replay_manifest(path: str) -> Telemetry:
    """Re-execute a manifest; output is bit-identical to the original run."""
    return run_experiment(load_manifest(path), out_dir=None)[0]


# -- presets ------------------------------------------------------------------------


def preset_spec(
    name: str,
    n: int | None = None,
    m: int = 2,
    seed: int = 42,
    beta_sq: float = 2.0,
    dt: float = 0.05,
    steps: int = 250,
    theta: int | None = None,
    top_k: int | None = None,
    schedule_override: InputSchedule | None = None,
) -> list[tuple[str, ExperimentSpec]]:
    """Named experiment presets; sweeps expand to several labeled specs.

    ramp / ramp-cutoff: single hub, n defaults to 200.
    magnitude: sweeps theta over 1..5 unless one theta is given; n = 200.
    multi-hub: sweeps top-k over {1, 2, 4, 8} unless one k is given; n = 400.
    ``schedule_override`` replaces the preset's injection plan everywhere.
    """
    cfg = ControlConfig(beta_sq=beta_sq, dt=dt)
    plans: list[tuple[str, InputSchedule, int]] = []
    if name in ("ramp", "ramp-cutoff"):
        variant = "ramp" if name == "ramp" else "ramp_cutoff"
        plans.append((name, preset_schedule(variant, top_k=top_k or 1), n or 200))
    elif name == "magnitude":
        thetas = [theta] if theta is not None else [1, 2, 3, 4, 5]
        for th in thetas:
            plans.append(
                (
                    f"magnitude_theta{th}",
                    preset_schedule("magnitude", theta=th, top_k=top_k or 1),
                    n or 200,
                )
            )
    elif name == "multi-hub":
        ks = [top_k] if top_k is not None else [1, 2, 4, 8]
        for k in ks:
            plans.append((f"multi_hub_top{k}", preset_schedule("multi_hub", top_k=k), n or 400))
    else:
        raise ParameterError(
            f"unknown preset {name!r}; choose ramp, ramp-cutoff, magnitude, or multi-hub"
        )
    return [
        (
            label,
            ExperimentSpec(
                schedule=schedule_override if schedule_override is not None else sched,
                cfg=cfg,
                steps=steps,
                n=nodes,
                m=m,
                seed=seed,
            ),
        )
        for label, sched, nodes in plans
    ]


PRESET_NAMES = ("ramp", "ramp-cutoff", "magnitude", "multi-hub")


# -- analysis ----------------------------------------------------------------------


def load_telemetry(path: str) -> Telemetry:
    if path.endswith(".json"):
        with open(path, "r", encoding="utf-8") as fh:
            try:
                doc = json.load(fh)
            except json.JSONDecodeError as exc:
                raise ParseError(f"{path}: invalid JSON: {exc}") from None
        rows = doc.get("rows")
        if rows is None:
            raise ParseError(f"{path}: no 'rows' section")
        import io as _io
        import csv as _csv

        buf = _io.StringIO()
        writer = _csv.writer(buf, lineterminator="\n")
        from .flow import TELEMETRY_COLUMNS, _fmt

        writer.writerow(TELEMETRY_COLUMNS)
        for row in rows:
            writer.writerow([_fmt(row.get(col)) for col in TELEMETRY_COLUMNS])
        return Telemetry.from_csv_text(buf.getvalue())
    with open(path, "r", encoding="utf-8") as fh:
        return Telemetry.from_csv_text(fh.read())


def sign_agreement(
    telemetry: Telemetry,
    noise_floor: float = DEFAULT_NOISE_FLOOR,
    kappa_column: str = "kappa_mean_unweighted",
) -> tuple[float | None, int]:
    """Fraction of steps where entropy and mean curvature move together.

    Only steps with |d kappa| above the noise floor count; returns
    (fraction or None when nothing qualifies, qualifying step count).
    """
    h = np.asarray(telemetry.column("H"), dtype=np.float64)
    k = np.asarray(telemetry.column(kappa_column), dtype=np.float64)
    if len(h) < 2:
        return None, 0
    dh = np.diff(h)
    dk = np.diff(k)
    qualifying = np.abs(dk) > noise_floor
    count = int(qualifying.sum())
    if count == 0:
        return None, 0
    agree = np.sign(dh[qualifying]) == np.sign(dk[qualifying])
    return float(agree.mean()), count


def event_windows(telemetry: Telemetry, window: int = DEFAULT_EVENT_WINDOW) -> list[dict]:
    """Mean H and mean curvature in fixed windows before/after each event."""
    h = np.asarray(telemetry.column("H"), dtype=np.float64)
    k = np.asarray(telemetry.column("kappa_mean_unweighted"), dtype=np.float64)
    out = []
    for idx, row in enumerate(telemetry.rows):
        if not row.event_marker:
            continue
        lo = max(0, idx - window)
        hi = min(len(h), idx + window)
        out.append(
            {
                "iteration": row.iteration,
                "marker": row.event_marker,
                "H_before": float(h[lo:idx].mean()) if idx > lo else None,
                "H_after": float(h[idx:hi].mean()),
                "kappa_before": float(k[lo:idx].mean()) if idx > lo else None,
                "kappa_after": float(k[idx:hi].mean()),
            }
        )
    return out


def analyze(
    path: str,
    noise_floor: float = DEFAULT_NOISE_FLOOR,
    window: int = DEFAULT_EVENT_WINDOW,
) -> dict:
    """Correlation diagnostics for a telemetry file."""
    telemetry = load_telemetry(path)
    fraction, qualifying = sign_agreement(telemetry, noise_floor)
    h = telemetry.column("H")
    k = telemetry.column("kappa_mean_unweighted")
    return {
        "rows": len(telemetry),
        "sign_agreement": fraction,
        "qualifying_steps": qualifying,
        "noise_floor": noise_floor,
        "H_start": h[0] if h else None,
        "H_end": h[-1] if h else None,
        "kappa_start": k[0] if k else None,
        "kappa_end": k[-1] if k else None,
        "events": event_windows(telemetry, window),
    }


def _atomic_write(path: str, text: str) -> None:
    tmp = f"{path}.tmp.{os.getpid()}"
    with open(tmp, "w", encoding="utf-8") as fh:
        fh.write(text)
    os.replace(tmp, path)
