"""Serialization: run records (JSON), CSV tables, and number formatting.

Every run record self-describes the conventions and thresholds that
produced it, so the numbers stay interpretable without this codebase.
CSV output uses a header row, UTF-8, LF line endings, and fixed decimal
notation with 6 significant digits for floats.
"""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path
from typing import Sequence

import numpy as np

from .engine import RunOutput
from .geometry import Vec2, WorldConfig
from .model import ConfigError, DelayPolicy, SimConfig, StabilityParams, SwarmParams
from .sweep import AGGREGATE_VIEWS, RAW_COLUMNS, aggregate, aggregate_columns

SCHEMA_VERSION = 1


def format_number(value) -> str:
    """Fixed decimal notation, 6 significant digits for floats (never
    scientific notation)."""
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        v = float(value)
        if not math.isfinite(v):
            return repr(v)
        if v == 0.0:
            return "0"
        decimals = 5 - math.floor(math.log10(abs(v)))
        if decimals <= 0:
            return f"{round(v, decimals):.0f}"
        return f"{v:.{decimals}f}"
    return str(value)


def write_csv(path, header: Sequence[str], rows: Sequence[Sequence]) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([format_number(cell) for cell in row])


# ---------------------------------------------------------------------------
# SimConfig <-> flat dict

def config_to_dict(config: SimConfig) -> dict:
    p, w, s = config.params, config.world, config.stability
    return {
        "population": config.population,
        "num_adversaries": config.num_adversaries,
        "delta": p.delta,
        "epsilon": p.epsilon,
        "c": p.c,
        "d": p.d,
        "r": p.r,
        "adversary_disperse_factor": p.adversary_disperse_factor,
        "collision_radius": p.collision_radius,
        "half_extent": w.half_extent,
        "target_x": w.target.x,
        "target_y": w.target.y,
        "boundary_policy": w.boundary_policy,
        "delay": config.delay.label(),
        "max_rounds": config.max_rounds,
        "seed": config.seed,
        "stability_window": s.window,
        "gap_cv_threshold": s.gap_cv_threshold,
        "adversary_entry_angle": config.adversary_entry_angle,
        "allow_degenerate_band": config.allow_degenerate_band,
    }


def config_from_dict(d: dict) -> SimConfig:
    return SimConfig(
        population=int(d["population"]),
        num_adversaries=int(d["num_adversaries"]),
        params=SwarmParams(
            delta=float(d["delta"]),
            epsilon=float(d["epsilon"]),
            c=float(d["c"]),
            d=float(d["d"]),
            r=float(d["r"]),
            adversary_disperse_factor=float(d["adversary_disperse_factor"]),
            collision_radius=float(d["collision_radius"]),
        ),
        world=WorldConfig(
            half_extent=float(d["half_extent"]),
            target=Vec2(float(d["target_x"]), float(d["target_y"])),
            boundary_policy=str(d["boundary_policy"]),
        ),
        delay=DelayPolicy.parse(d["delay"]),
        max_rounds=int(d["max_rounds"]),
        seed=int(d["seed"]),
        stability=StabilityParams(
            window=int(d["stability_window"]),
            gap_cv_threshold=float(d["gap_cv_threshold"]),
        ),
        adversary_entry_angle=float(d["adversary_entry_angle"]),
        allow_degenerate_band=bool(d["allow_degenerate_band"]),
    )


# ---------------------------------------------------------------------------
# Run records

def build_run_record(output: RunOutput, series: str = "downsampled", stride: int = 10) -> dict:
    """Structured record of one run.

    series: "downsampled" (every `stride`-th round), "full", or "none".
    """
    config = output.config
    s = config.stability
    record = {
        "schema_version": SCHEMA_VERSION,
        "config": config_to_dict(config),
        "result": {
            "config_digest": output.result.config_digest,
            "percent_access": output.result.percent_access,
            "first_stable_at": output.result.first_stable_at,
            "adversaries_activated_at": output.result.adversaries_activated_at,
            "total_collisions": output.result.total_collisions,
            "congestion": output.result.congestion,
        },
        "metadata": {
            "gap_metric": "largest angular gap between adjacent active agents (both kinds), as a fraction of 360 degrees",
            "gap_normalization": "angle fraction of the ideal circle; active adversaries are ring members and split arcs they stand in",
            "measurement_start": "max(first_stable_at, adversaries_activated_at); percent_access is 0 if either never occurs",
            "stability_predicate": (
                f"all regular agents within [delta-epsilon, delta+epsilon] and gap "
                f"coefficient of variation <= {s.gap_cv_threshold} for {s.window} consecutive rounds"
            ),
            "occupancy": "strict: a location is empty iff no other active agent is at distance < collision_radius",
            "degenerate_band": output.degenerate_band,
            "congestion_formula": output.congestion_formula,
            "boundary_clamp_events": output.boundary_clamp_events,
        },
    }
    if series != "none":
        step = 1 if series == "full" else max(1, stride)
        idx = np.arange(0, output.gap_fraction.shape[0], step)
        record["series"] = {
            "stride": int(step),
            "round": [int(t) for t in idx],
            "max_gap_fraction": [float(output.gap_fraction[t]) for t in idx],
            "in_band_count": [int(output.in_band[t]) for t in idx],
            "stable": [bool(output.stable[t]) for t in idx],
            "collisions": [int(output.collisions[t]) for t in idx],
        }
    return record


def emit_run_record(record: dict) -> str:
    return json.dumps(record, indent=2, sort_keys=True)


def parse_run_record(text: str) -> dict:
    record = json.loads(text)
    version = record.get("schema_version")
    if version != SCHEMA_VERSION:
        raise ConfigError(f"unsupported run record schema_version {version!r}")
    return record


# ---------------------------------------------------------------------------
# Raw sweep rows

_RAW_INT_COLUMNS = {
    "replication", "seed", "population", "num_adversaries", "max_rounds",
    "first_stable_at", "adversaries_activated_at", "total_collisions",
    "boundary_clamp_events",
}
_RAW_FLOAT_COLUMNS = {
    "delta", "epsilon", "d", "c", "r", "percent_access", "congestion",
    "congestion_formula",
}
_RAW_BOOL_COLUMNS = {"degenerate_band"}


def write_raw_csv(path, rows: Sequence[dict]) -> None:
    write_csv(path, RAW_COLUMNS, [[row[col] for col in RAW_COLUMNS] for row in rows])


def parse_raw_csv(path) -> list[dict]:
    """Read raw.csv back into typed row dicts ('' becomes None)."""
    out = []
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        for rec in reader:
            row: dict = {}
            for col, text in rec.items():
                if text == "" or text is None:
                    row[col] = None
                elif col in _RAW_INT_COLUMNS:
                    row[col] = int(text)
                elif col in _RAW_FLOAT_COLUMNS:
                    row[col] = float(text)
                elif col in _RAW_BOOL_COLUMNS:
                    row[col] = text == "true"
                else:
                    row[col] = text
            out.append(row)
    return out


def write_aggregate_csvs(rows: Sequence[dict], outdir, bucket_width: float = 10.0) -> dict:
    """Write one aggregate CSV per view; returns {view: path}."""
    outdir = Path(outdir)
    paths = {}
    for view, (filename, group_by) in AGGREGATE_VIEWS.items():
        entries = aggregate(rows, group_by, bucket_width=bucket_width)
        columns = aggregate_columns(group_by)
        path = outdir / filename
        write_csv(path, columns, [[entry[col] for col in columns] for entry in entries])
        paths[view] = path
    return paths
