"""Command-line surface: single runs, grid sweeps, and plot-ready exports.

Exit codes: 0 success, 1 configuration error, 2 I/O error, 3 partial sweep
failure (some rows failed or were rejected).
"""

from __future__ import annotations

import argparse
import csv
import os
import sys
from pathlib import Path

from . import engine, records, sweep as sweep_mod
from .geometry import Vec2, WorldConfig
from .model import ConfigError, DelayPolicy, SimConfig, StabilityParams, SwarmParams

# plotdata view -> (grouping dimensions, output columns)
PLOT_VIEWS = {
    "fig1": (["population", "num_adversaries"], ["population", "num_adversaries", "mean_percent_access"]),
    "table2": (["delta", "epsilon"], ["delta", "epsilon", "mean_percent_access"]),
    "table3": (["d", "c"], ["d", "c", "mean_percent_access"]),
    "delay": (["delay"], ["delay", "mean_percent_access"]),
    "fig4": (["congestion_bucket"], ["congestion", "mean_percent_access"]),
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sharksim",
        description="Deterministic perimeter-swarm simulator with an adversarial corralling counter-swarm.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run one simulation and emit a JSON run record")
    p_run.add_argument("--population", type=int, default=16, help="number of regular agents")
    p_run.add_argument("--adversaries", type=int, default=3, help="number of adversarial agents")
    p_run.add_argument("--delta", type=float, default=16.0, help="ideal distance from the target")
    p_run.add_argument("--epsilon", type=float, default=4.0, help="half-width of the tolerated band")
    p_run.add_argument("--d", type=float, default=0.5, help="dispersion-rule step per round")
    p_run.add_argument("--c", type=float, default=0.5, help="center-rule step per round")
    p_run.add_argument("--r", type=float, default=20.0, help="clockwise rotation bias in degrees")
    p_run.add_argument("--delay", type=str, default="stability",
                       help="adversary entry: none | stability | stability+K")
    p_run.add_argument("--rounds", type=int, default=10000, help="rounds to simulate")
    p_run.add_argument("--seed", type=int, default=1, help="64-bit run seed")
    p_run.add_argument("--half-extent", type=float, default=50.0, help="world half side length")
    p_run.add_argument("--collision-radius", type=float, default=1.0, help="occupancy radius")
    p_run.add_argument("--disperse-factor", type=float, default=0.2,
                       help="adversary dispersion slowdown factor")
    p_run.add_argument("--entry-angle", type=float, default=0.0,
                       help="compass angle of the adversary entry point")
    p_run.add_argument("--stability-window", type=int, default=10,
                       help="consecutive rounds required for stability")
    p_run.add_argument("--gap-cv-threshold", type=float, default=0.75,
                       help="gap coefficient-of-variation bound for stability")
    p_run.add_argument("--allow-degenerate-band", action="store_true",
                       help="accept delta <= epsilon (inner radius clamped to zero)")
    p_run.add_argument("--series", choices=["downsampled", "full", "none"], default="downsampled",
                       help="per-round series detail in the record")
    p_run.add_argument("--series-stride", type=int, default=10,
                       help="round stride for the downsampled series")
    p_run.add_argument("--out", type=str, default=None, help="write the record here instead of stdout")

    p_sweep = sub.add_parser("sweep", help="run a configuration grid and write raw + aggregate CSVs")
    p_sweep.add_argument("--spec", type=str, default=None,
                         help="sweep spec file (key = value lists); defaults to the full study grid")
    p_sweep.add_argument("--out", type=str, required=True, help="output directory")
    p_sweep.add_argument("--workers", type=int, default=max(1, os.cpu_count() or 1),
                         help="worker processes (output is identical for any count)")
    p_sweep.add_argument("--bucket-width", type=float, default=10.0,
                         help="congestion bucket width for the fig4 aggregate")
    p_sweep.add_argument("--figures", action="store_true",
                         help="also render PNG figures next to the CSVs")

    p_plot = sub.add_parser("plotdata", help="emit plot-ready x/y(/series) columns from raw.csv")
    p_plot.add_argument("--raw", type=str, required=True, help="raw.csv from a sweep")
    p_plot.add_argument("--view", type=str, required=True,
                        help="one of: " + ", ".join(PLOT_VIEWS))
    p_plot.add_argument("--bucket-width", type=float, default=10.0,
                        help="congestion bucket width (fig4 view)")
    p_plot.add_argument("--out", type=str, default=None, help="write here instead of stdout")

    p_report = sub.add_parser("report", help="rebuild aggregate CSVs (and figures) from raw.csv")
    p_report.add_argument("--raw", type=str, required=True, help="raw.csv from a sweep")
    p_report.add_argument("--out", type=str, required=True, help="output directory")
    p_report.add_argument("--bucket-width", type=float, default=10.0)
    p_report.add_argument("--no-figures", action="store_true", help="write CSVs only")

    return parser


def _config_from_args(args) -> SimConfig:
    return SimConfig(
        population=args.population,
        num_adversaries=args.adversaries,
        params=SwarmParams(
            delta=args.delta,
            epsilon=args.epsilon,
            c=args.c,
            d=args.d,
            r=args.r,
            adversary_disperse_factor=args.disperse_factor,
            collision_radius=args.collision_radius,
        ),
        world=WorldConfig(half_extent=args.half_extent, target=Vec2(0.0, 0.0)),
        delay=DelayPolicy.parse(args.delay),
        max_rounds=args.rounds,
        seed=args.seed,
        stability=StabilityParams(window=args.stability_window, gap_cv_threshold=args.gap_cv_threshold),
        adversary_entry_angle=args.entry_angle,
        allow_degenerate_band=args.allow_degenerate_band,
    ).validate()


def cmd_run(args) -> int:
    config = _config_from_args(args)
    output = engine.run(config)
    record = records.build_run_record(output, series=args.series, stride=args.series_stride)
    text = records.emit_run_record(record)
    if args.out:
        Path(args.out).write_text(text + "\n", encoding="utf-8")
    else:
        print(text)
    return 0


def cmd_sweep(args) -> int:
    if args.workers < 1:
        raise ConfigError(f"workers must be at least 1 (got {args.workers})")
    spec = sweep_mod.load_sweep_spec(args.spec) if args.spec else sweep_mod.SweepSpec()
    outdir = Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)

    result = sweep_mod.run_sweep(spec, parallelism=args.workers)
    records.write_raw_csv(outdir / "raw.csv", result.rows)
    records.write_aggregate_csvs(result.rows, outdir, bucket_width=args.bucket_width)
    if args.figures:
        from . import figures

        figures.render_all(result.rows, outdir)

    failed = result.failed_rows()
    print(f"sweep complete: {len(result.rows)} rows ({len(failed)} failed) -> {outdir}")
    if failed:
        for row in failed[:10]:
            print(f"  {row['status']}: digest={row['digest']} rep={row['replication']}: {row['error']}",
                  file=sys.stderr)
        return 3
    return 0


def cmd_plotdata(args) -> int:
    if args.view not in PLOT_VIEWS:
        raise ConfigError(
            f"unknown view {args.view!r}; available views: {', '.join(PLOT_VIEWS)}"
        )
    group_by, columns = PLOT_VIEWS[args.view]
    rows = records.parse_raw_csv(args.raw)
    entries = sweep_mod.aggregate(rows, group_by, bucket_width=args.bucket_width)

    out_rows = []
    for entry in entries:
        if args.view == "fig4":
            out_rows.append([(entry["bucket_low"] + entry["bucket_high"]) / 2.0,
                             entry["mean_percent_access"]])
        else:
            out_rows.append([entry[col] for col in columns])

    if args.out:
        records.write_csv(args.out, columns, out_rows)
    else:
        writer = csv.writer(sys.stdout, lineterminator="\n")
        writer.writerow(columns)
        for row in out_rows:
            writer.writerow([records.format_number(cell) for cell in row])
    return 0


def cmd_report(args) -> int:
    rows = records.parse_raw_csv(args.raw)
    outdir = Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)
    records.write_aggregate_csvs(rows, outdir, bucket_width=args.bucket_width)
    if not args.no_figures:
        from . import figures

        written = figures.render_all(rows, outdir)
        print(f"report written to {outdir} ({len(written)} figures)")
    else:
        print(f"report written to {outdir}")
    return 0


_COMMANDS = {
    "run": cmd_run,
    "sweep": cmd_sweep,
    "plotdata": cmd_plotdata,
    "report": cmd_report,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
