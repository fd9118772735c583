"""Time integration of the curvature flow and its feedback-controlled forms.

Three layers of dynamics over one edge-weight field mu:

* open loop:    dmu/dt = -kappa * mu
* closed loop:  dmu/dt = (-kappa + psi) * mu with psi = -beta^2 * (mu - mu*)
                (the sign that makes the quadratic error decay; the flipped
                sign is available as ``sign_convention="as_printed"``)
* coupled:      the closed loop with the target replaced by an estimator
                mu_hat that tracks mu while being dragged toward the
                cumulative operator input lambda:
                dmu_hat/dt = (delta_hat - |lambda| * (mu_hat - lambda)) * mu_hat

All integration is explicit forward Euler; one iteration is one Euler step
and the clock is t = iteration * dt exactly. After every step mu is floored
and renormalized per the configured mode and mu_hat is clipped to [0, 1].
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, replace

import numpy as np

from .curvature import CurvatureField, curvature_field, entropy_value
from .errors import (
    EstimatorMissingError,
    GainError,
    ParameterError,
    TargetMissingError,
)
from .graph import WeightedGraph

MIN_STABLE_GAIN = 2.0
TELEMETRY_COLUMNS = (
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
)


@dataclass(frozen=True)
class ControlConfig:
    """Integration and feedback parameters.

    beta_sq is the squared feedback gain; values below 2 are rejected
    because the error-decay argument needs the gain to dominate the
    curvature range.
    """

    beta_sq: float = 2.0
    dt: float = 0.05
    normalization: str = "global"
    sign_convention: str = "proof"
    curvature_refresh_every: int = 1

    def __post_init__(self):
        if self.beta_sq < MIN_STABLE_GAIN:
            raise GainError(f"beta_sq must be >= {MIN_STABLE_GAIN}, got {self.beta_sq}")
        if self.dt < 0:
            raise ParameterError("dt must be nonnegative")
        if self.normalization not in ("global", "none"):
            raise ParameterError(f"unknown normalization {self.normalization!r}")
        if self.sign_convention not in ("proof", "as_printed"):
            raise ParameterError(f"unknown sign convention {self.sign_convention!r}")
        if self.curvature_refresh_every < 1:
            raise ParameterError("curvature_refresh_every must be >= 1")


@dataclass(frozen=True)
class FlowState:
    """Coupled simulation state at one iteration.

    mu lives in ``graph.weights``; mu_star (ideal target) and mu_star_hat
    (estimator) are optional; lam accumulates operator input per edge.
    """

    graph: WeightedGraph
    lam: np.ndarray
    mu_star: np.ndarray | None = None
    mu_star_hat: np.ndarray | None = None
    iteration: int = 0
    t: float = 0.0

    @property
    def mu(self) -> np.ndarray:
        return self.graph.weights


def initial_state(
    g: WeightedGraph,
    cfg: ControlConfig,
    mu_star: np.ndarray | None = None,
    with_estimator: bool = True,
) -> FlowState:
    """Iteration-0 state: estimator starts equal to mu, lambda at zero."""
    g0 = g.normalize(cfg.normalization)
    return FlowState(
        graph=g0,
        lam=np.zeros(g0.n_edges),
        mu_star=None if mu_star is None else np.asarray(mu_star, dtype=np.float64),
        mu_star_hat=g0.weights.copy() if with_estimator else None,
        iteration=0,
        t=0.0,
    )


def control_law(delta: np.ndarray, cfg: ControlConfig) -> np.ndarray:
    """Feedback term psi from the pointwise error delta = mu - mu*."""
    if cfg.beta_sq < MIN_STABLE_GAIN:
        raise GainError(f"beta_sq must be >= {MIN_STABLE_GAIN}, got {cfg.beta_sq}")
    return _feedback(delta, cfg)


def _feedback(delta: np.ndarray, cfg: ControlConfig) -> np.ndarray:
    sign = -1.0 if cfg.sign_convention == "proof" else 1.0
    return sign * cfg.beta_sq * delta


def _advance_mu(state: FlowState, rate: np.ndarray, cfg: ControlConfig) -> WeightedGraph:
    w = state.mu * (1.0 + cfg.dt * rate)
    return state.graph.with_weights(w).normalize(cfg.normalization)


def open_loop_step(state: FlowState, field: CurvatureField, cfg: ControlConfig) -> FlowState:
    """One Euler step of the autonomous flow dmu/dt = -kappa * mu."""
    g = _advance_mu(state, -field.edge_values, cfg)
    it = state.iteration + 1
    return replace(state, graph=g, iteration=it, t=it * cfg.dt)


def closed_loop_step(
    state: FlowState,
    field: CurvatureField,
    cfg: ControlConfig,
    target: np.ndarray | None = None,
) -> FlowState:
    """One Euler step of the feedback flow toward ``target`` (or mu_star)."""
    mu_star = state.mu_star if target is None else target
    if mu_star is None:
        raise TargetMissingError("closed-loop step needs a target field mu*")
    delta = state.mu - mu_star
    rate = -field.edge_values + _feedback(delta, cfg)
    g = _advance_mu(state, rate, cfg)
    it = state.iteration + 1
    return replace(state, graph=g, iteration=it, t=it * cfg.dt)


def estimator_step(state: FlowState, cfg: ControlConfig) -> FlowState:
    """One Euler step of the estimator field alone; mu stays put."""
    hat = _estimator_update(state, cfg)
    it = state.iteration + 1
    return replace(state, mu_star_hat=hat, iteration=it, t=it * cfg.dt)


def _estimator_update(state: FlowState, cfg: ControlConfig) -> np.ndarray:
    hat = state.mu_star_hat
    if hat is None:
        raise EstimatorMissingError("estimator step needs mu_star_hat")
    delta_hat = state.mu - hat
    gamma = hat - state.lam
    phi = -np.abs(state.lam) * gamma
    out = hat * (1.0 + cfg.dt * (delta_hat + phi))
    # lambda may sit far outside the simplex; the estimator itself stays
    # inside [0, 1].
    return np.clip(out, 0.0, 1.0)


def coupled_step(state: FlowState, field: CurvatureField, cfg: ControlConfig) -> FlowState:
    """Advance mu and the estimator together from one pre-step snapshot.

    mu takes a closed-loop step with the estimator as its target; the
    estimator takes its own step using the same pre-step mu.
    """
    if state.mu_star_hat is None:
        raise EstimatorMissingError("coupled step needs mu_star_hat")
    hat = _estimator_update(state, cfg)
    delta_hat = state.mu - state.mu_star_hat
    rate = -field.edge_values + _feedback(delta_hat, cfg)
    g = _advance_mu(state, rate, cfg)
    it = state.iteration + 1
    return replace(state, graph=g, mu_star_hat=hat, iteration=it, t=it * cfg.dt)


# -- error functionals ------------------------------------------------------------


@dataclass(frozen=True)
class ErrorReport:
    """Pointwise and total error functionals for the current state.

    Totals: sigma_total = 0.5 * sum(delta^2); gamma_total weighs each
    squared estimator-vs-input gap by |lambda|; v_total is their sum with
    sigma_hat_total.
    """

    delta: np.ndarray | None
    sigma_total: float | None
    delta_hat: np.ndarray | None
    sigma_hat_total: float | None
    gamma: np.ndarray | None
    gamma_total: float | None
    v_total: float | None


def error_report(state: FlowState) -> ErrorReport:
    delta = sigma = None
    if state.mu_star is not None:
        delta = state.mu - state.mu_star
        sigma = 0.5 * float(np.dot(delta, delta))
    delta_hat = sigma_hat = gamma = gamma_total = v_total = None
    if state.mu_star_hat is not None:
        delta_hat = state.mu - state.mu_star_hat
        sigma_hat = 0.5 * float(np.dot(delta_hat, delta_hat))
        gamma = state.mu_star_hat - state.lam
        gamma_total = 0.5 * float(np.dot(np.abs(state.lam), gamma * gamma))
        v_total = sigma_hat + gamma_total
    return ErrorReport(
        delta=delta,
        sigma_total=sigma,
        delta_hat=delta_hat,
        sigma_hat_total=sigma_hat,
        gamma=gamma,
        gamma_total=gamma_total,
        v_total=v_total,
    )


# -- telemetry ---------------------------------------------------------------------


@dataclass(frozen=True)
class TelemetryRow:
    iteration: int
    t: float
    entropy: float
    kappa_mean_unweighted: float
    kappa_mean_weighted: float
    sigma: float | None
    sigma_hat: float | None
    gamma_total: float | None
    v_total: float | None
    event_marker: str

    def as_values(self) -> list:
        return [
            self.iteration,
            self.t,
            self.entropy,
            self.kappa_mean_unweighted,
            self.kappa_mean_weighted,
            self.sigma,
            self.sigma_hat,
            self.gamma_total,
            self.v_total,
            self.event_marker,
        ]


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, str):
        return value
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return f"{value:.12g}"


class Telemetry:
    """Append-only per-iteration series with CSV/JSON round-trip.

    Numbers are written with 12 significant digits; identical runs produce
    byte-identical files.
    """

    def __init__(self, rows: list[TelemetryRow] | None = None):
        self.rows: list[TelemetryRow] = rows if rows is not None else []

    def append(self, row: TelemetryRow) -> None:
        self.rows.append(row)

    def __len__(self) -> int:
        return len(self.rows)

    def column(self, name: str) -> list:
        idx = TELEMETRY_COLUMNS.index(name)
        return [row.as_values()[idx] for row in self.rows]

    def events(self) -> list[tuple[int, str]]:
        return [(r.iteration, r.event_marker) for r in self.rows if r.event_marker]

    def to_csv_text(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(TELEMETRY_COLUMNS)
        for row in self.rows:
            writer.writerow([_fmt(v) for v in row.as_values()])
        return buf.getvalue()

    def to_json_obj(self) -> dict:
        return {
            "columns": list(TELEMETRY_COLUMNS),
            "rows": [
                {col: v for col, v in zip(TELEMETRY_COLUMNS, row.as_values())}
                for row in self.rows
            ],
        }

    @classmethod
    def from_csv_text(cls, text: str) -> "Telemetry":
        from .errors import ParseError

        reader = csv.reader(io.StringIO(text))
        try:
            header = next(reader)
        except StopIteration:
            raise ParseError("telemetry file is empty") from None
        if tuple(header) != TELEMETRY_COLUMNS:
            raise ParseError(f"unexpected telemetry header {header!r}")
        rows = []
        for parts in reader:
            if not parts:
                continue
            if len(parts) != len(TELEMETRY_COLUMNS):
                raise ParseError(f"bad telemetry row {parts!r}")

            def num(s: str) -> float | None:
                return None if s == "" else float(s)

            rows.append(
                TelemetryRow(
                    iteration=int(parts[0]),
                    t=float(parts[1]),
                    entropy=float(parts[2]),
                    kappa_mean_unweighted=float(parts[3]),
                    kappa_mean_weighted=float(parts[4]),
                    sigma=num(parts[5]),
                    sigma_hat=num(parts[6]),
                    gamma_total=num(parts[7]),
                    v_total=num(parts[8]),
                    event_marker=parts[9],
                )
            )
        return cls(rows)


# -- simulation driver ---------------------------------------------------------------


class SimulationDriver:
    """Single-owner loop advancing one coupled simulation.

    The scripted front end (``simulate``) and the session gateway both run
    through this class, so a scripted schedule and an equivalent sequence of
    interactive calls produce identical telemetry. Input applied at
    iteration i takes effect in the step to i+1 and is marked on row i+1.
    """

    def __init__(
        self,
        g: WeightedGraph,
        cfg: ControlConfig,
        mu_star: np.ndarray | None = None,
        with_estimator: bool = True,
    ):
        self.cfg = cfg
        self.state = initial_state(g, cfg, mu_star=mu_star, with_estimator=with_estimator)
        self.field = curvature_field(self.state.graph)
        self.telemetry = Telemetry()
        self._pending_markers: list[str] = []
        self._record_row()

    @property
    def iteration(self) -> int:
        return self.state.iteration

    def apply_input(self, edge_ids: np.ndarray, magnitude: float, marker: str) -> None:
        """Add ``magnitude`` to lambda on the given edges, effective next step."""
        lam = self.state.lam.copy()
        lam[edge_ids] += magnitude
        self.state = replace(self.state, lam=lam)
        self._pending_markers.append(marker)

    def step(self, count: int = 1) -> None:
        for _ in range(count):
            self.state = coupled_step(self.state, self.field, self.cfg)
            if self.state.iteration % self.cfg.curvature_refresh_every == 0:
                self.field = curvature_field(self.state.graph)
            self._record_row()

    def _record_row(self) -> None:
        report = error_report(self.state)
        marker = ";".join(self._pending_markers)
        self._pending_markers.clear()
        self.telemetry.append(
            TelemetryRow(
                iteration=self.state.iteration,
                t=self.state.t,
                entropy=entropy_value(self.state.graph),
                kappa_mean_unweighted=self.field.mean_unweighted,
                kappa_mean_weighted=self.field.mean_mass_weighted,
                sigma=report.sigma_total,
                sigma_hat=report.sigma_hat_total,
                gamma_total=report.gamma_total,
                v_total=report.v_total,
                event_marker=marker,
            )
        )


def simulate(g: WeightedGraph, schedule, cfg: ControlConfig, steps: int) -> Telemetry:
    """Run the coupled flow for ``steps`` iterations under a timed schedule.

    Events fire at their iteration index right before the step out of that
    iteration; the run is deterministic for fixed inputs.
    """
    from .schedule import realize_event

    if steps < 0:
        raise ParameterError("steps must be nonnegative")
    driver = SimulationDriver(g, cfg)
    for i in range(steps):
        for ev in schedule.events_at(i):
            edge_ids, marker = realize_event(ev, driver.state.graph)
            driver.apply_input(edge_ids, ev.magnitude, marker)
        driver.step(1)
    return driver.telemetry
