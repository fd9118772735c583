"""Figure rendering for telemetry: series and error panels as PNG files.

The report path writes these next to the delimited output; they are a
convenience view, the CSV/JSON stays the authoritative record.
"""

from __future__ import annotations

import os

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)

from .flow import Telemetry

_SERIES_COLOR = "#1f77b4"
_KAPPA_COLOR = "#d62728"
_EVENT_COLOR = "#555555"


def _event_lines(ax, telemetry: Telemetry) -> None:
    for iteration, marker in telemetry.events():
        ax.axvline(iteration, color=_EVENT_COLOR, lw=0.8, ls="--", alpha=0.6)
        ax.annotate(
            marker.split(";")[0],
            xy=(iteration, 1.0),
            xycoords=("data", "axes fraction"),
            fontsize=6,
            rotation=90,
            va="top",
            ha="right",
            alpha=0.7,
        )


def render_series_figure(telemetry: Telemetry, path: str) -> None:
    """Network entropy and mean curvature over iterations, events marked."""
    its = telemetry.column("iteration")
    fig, ax1 = plt.subplots(figsize=(8, 4.2))
    ax1.plot(its, telemetry.column("H"), color=_SERIES_COLOR, lw=1.4, label="network entropy")
    ax1.set_xlabel("iteration")
    ax1.set_ylabel("network entropy (nats)", color=_SERIES_COLOR)
    ax1.tick_params(axis="y", labelcolor=_SERIES_COLOR)
    ax2 = ax1.twinx()
    ax2.plot(
        its,
        telemetry.column("kappa_mean_unweighted"),
        color=_KAPPA_COLOR,
        lw=1.4,
        label="mean curvature",
    )
    ax2.set_ylabel("mean edge curvature", color=_KAPPA_COLOR)
    ax2.tick_params(axis="y", labelcolor=_KAPPA_COLOR)
    _event_lines(ax1, telemetry)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def render_error_figure(telemetry: Telemetry, path: str) -> None:
    """Estimator and input error totals on a log scale, events marked."""
    its = telemetry.column("iteration")
    fig, ax = plt.subplots(figsize=(8, 4.2))
    for col, label, color in (
        ("sigma_hat", "tracking error", "#2ca02c"),
        ("gamma_total", "input error", "#9467bd"),
        ("v_total", "total error", "#111111"),
    ):
        series = telemetry.column(col)
        if all(v is None for v in series):
            continue
        xs = [i for i, v in zip(its, series) if v is not None]
        ys = [v for v in series if v is not None]
        ax.plot(xs, ys, lw=1.2, label=label, color=color)
    ax.set_yscale("symlog", linthresh=1e-12)
    ax.set_xlabel("iteration")
    ax.set_ylabel("error totals")
    ax.legend(loc="upper right", fontsize=8)
    _event_lines(ax, telemetry)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def render_telemetry_figures(telemetry: Telemetry, out_dir: str, stem: str) -> dict[str, str]:
    """Write both panels; returns artifact-name -> path."""
    os.makedirs(out_dir, exist_ok=True)
    series_path = os.path.join(out_dir, f"{stem}_series.png")
    errors_path = os.path.join(out_dir, f"{stem}_errors.png")
    render_series_figure(telemetry, series_path)
    render_error_figure(telemetry, errors_path)
    return {"series_png": series_path, "errors_png": errors_path}
