"""Command-line front door.

Exit codes: 0 success, 2 validation error (bad arguments or input files),
3 runtime failure.
"""

from __future__ import annotations

import argparse
import json
import sys

from .curvature import curvature_field, network_entropy, write_curvature_table, write_entropy_table
from .errors import ValidationFailure
from .experiments import (
    PRESET_NAMES,
    analyze,
    load_manifest,
    preset_spec,
    run_experiment,
)
from .graph import load_graph_file

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_RUNTIME = 3


def _build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="ricciflow",
        description="Edge curvature, network entropy, and feedback-controlled "
        "weight flow on graphs.",
    )
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("curvature", help="per-edge curvature table for a graph file")
    p.add_argument("graph", help="edge-list or .json graph file")
    p.add_argument("--out", help="output table (.csv or .json); default stdout CSV")

    p = sub.add_parser("entropy", help="node entropy / stationary table for a graph file")
    p.add_argument("graph", help="edge-list or .json graph file")
    p.add_argument("--out", help="output table (.csv or .json); default stdout CSV")

    p = sub.add_parser("simulate", help="run a manifest / spec JSON file")
    p.add_argument("spec", help="run-manifest JSON (as written by `experiment`)")
    p.add_argument("--out", help="output directory (default: print summary only)")
    p.add_argument("--stem", default="telemetry")
    p.add_argument("--no-plot", action="store_true", help="skip figure rendering")

    p = sub.add_parser("experiment", help="run a named preset")
    p.add_argument("preset", choices=PRESET_NAMES)
    p.add_argument("--n", type=int, help="node count (preset default if omitted)")
    p.add_argument("--m", type=int, default=2, help="attachment count (default 2)")
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--beta2", type=float, default=2.0, help="feedback gain squared")
    p.add_argument("--dt", type=float, default=0.05)
    p.add_argument("--steps", type=int, default=250)
    p.add_argument("--theta", type=int, help="magnitude preset: run one theta only")
    p.add_argument("--top-k", type=int, dest="top_k", help="hub count (multi-hub: one k only)")
    p.add_argument(
        "--schedule",
        help="override the preset schedule: inline '30:-2,75:2@top1' or a JSON file",
    )
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--no-plot", action="store_true", help="skip figure rendering")

    p = sub.add_parser("analyze", help="correlation diagnostics for a telemetry file")
    p.add_argument("telemetry", help="telemetry .csv or .json")
    p.add_argument("--noise-floor", type=float, default=1e-6)
    p.add_argument("--window", type=int, default=25)
    p.add_argument("--plot", action="store_true", help="render figures next to the file")

    p = sub.add_parser("serve", help="start the HTTP session gateway")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    return ap


def _cmd_curvature(args) -> int:
    g = load_graph_file(args.graph)
    field = curvature_field(g)
    if args.out:
        write_curvature_table(g, field, args.out)
        print(f"wrote {args.out}")
    else:
        ids = g.nodes
        print("u,v,kappa")
        for (u, v), k in zip(g.edges, field.edge_values):
            print(f"{ids[u]},{ids[v]},{k:.12g}")
    print(
        f"# mean_unweighted={field.mean_unweighted:.12g} "
        f"mean_mass_weighted={field.mean_mass_weighted:.12g}",
        file=sys.stderr,
    )
    return EXIT_OK


def _cmd_entropy(args) -> int:
    g = load_graph_file(args.graph)
    report = network_entropy(g)
    if args.out:
        write_entropy_table(g, report, args.out)
        print(f"wrote {args.out}")
    else:
        print("node,entropy,pi")
        for x in g.nodes:
            print(f"{x},{report.node_entropies[x]:.12g},{report.stationary[x]:.12g}")
    print(f"# network_entropy={report.network_entropy:.12g}", file=sys.stderr)
    return EXIT_OK


def _cmd_simulate(args) -> int:
    spec = load_manifest(args.spec)
    telemetry, paths = run_experiment(
        spec, out_dir=args.out, stem=args.stem, render=not args.no_plot
    )
    last = telemetry.rows[-1]
    print(
        f"ran {len(telemetry) - 1} steps: H={last.entropy:.6g} "
        f"kappa_mean={last.kappa_mean_unweighted:.6g}"
    )
    for name, path in paths.items():
        print(f"  {name}: {path}")
    return EXIT_OK


def _cmd_experiment(args) -> int:
    override = None
    if args.schedule:
        import os

        from .schedule import load_schedule, parse_inline_schedule

        override = (
            load_schedule(args.schedule)
            if os.path.exists(args.schedule)
            else parse_inline_schedule(args.schedule)
        )
    specs = preset_spec(
        args.preset,
        n=args.n,
        m=args.m,
        seed=args.seed,
        beta_sq=args.beta2,
        dt=args.dt,
        steps=args.steps,
        theta=args.theta,
        top_k=args.top_k,
        schedule_override=override,
    )
    for label, spec in specs:
        telemetry, paths = run_experiment(
            spec, out_dir=args.out, stem=label, render=not args.no_plot
        )
        last = telemetry.rows[-1]
        print(
            f"{label}: {len(telemetry) - 1} steps, H={last.entropy:.6g}, "
            f"kappa_mean={last.kappa_mean_unweighted:.6g}"
        )
        for name, path in paths.items():
            print(f"  {name}: {path}")
    return EXIT_OK


def _cmd_analyze(args) -> int:
    summary = analyze(args.telemetry, noise_floor=args.noise_floor, window=args.window)
    if args.plot:
        import os

        from .experiments import load_telemetry
        from .figures import render_telemetry_figures

        telemetry = load_telemetry(args.telemetry)
        out_dir = os.path.dirname(os.path.abspath(args.telemetry))
        stem = os.path.splitext(os.path.basename(args.telemetry))[0]
        summary["figures"] = render_telemetry_figures(telemetry, out_dir, stem)
    print(json.dumps(summary, indent=2))
    return EXIT_OK


def _cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    uvicorn.run(create_app(), host=args.host, port=args.port, log_level="info")
    return EXIT_OK


_HANDLERS = {
    "curvature": _cmd_curvature,
    "entropy": _cmd_entropy,
    "simulate": _cmd_simulate,
    "experiment": _cmd_experiment,
    "analyze": _cmd_analyze,
    "serve": _cmd_serve,
}


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on bad usage already; normalize other codes
        return EXIT_VALIDATION if exc.code not in (0, None) else EXIT_OK
    try:
        return _HANDLERS[args.command](args)
    except ValidationFailure as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except Exception as exc:  # noqa: BLE001  (CLI boundary)
        print(f"internal error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
