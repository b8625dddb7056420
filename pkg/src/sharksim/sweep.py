"""Experiment grid expansion, replicated execution, and aggregation.

The default grid is the full study: 4 population sizes x 7 adversary
counts x 3 deltas x 3 epsilons x 4 d:c ratios x 3 delay policies = 3,024
configurations, each replicated 3 times for 9,072 runs. Per-row seeds are
derived from a stable hash of (base seed, config digest, replication), so
the sweep is embarrassingly parallel and any single row can be reproduced
in isolation. Worker count never changes the output: rows are sorted by
(digest, replication) after execution.

The grid deliberately contains one degenerate band (delta = epsilon = 8,
inner radius 0); those rows run with the inner radius clamped at zero and
are marked degenerate_band rather than rejected, and both the clamped band
area and the 4*pi*delta*epsilon value are emitted for comparison.
"""

from __future__ import annotations

import hashlib
import math
import multiprocessing
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import engine
from .model import (
    ConfigError,
    DelayPolicy,
    NO_DELAY,
    ON_STABILITY,
    SimConfig,
    SwarmParams,
    stability_plus,
)

DEFAULT_POPULATIONS = (8, 16, 32, 64)
DEFAULT_ADVERSARIES = (2, 3, 4, 5, 6, 7, 8)
DEFAULT_DELTAS = (8.0, 12.0, 16.0)
DEFAULT_EPSILONS = (4.0, 6.0, 8.0)
DEFAULT_DC_RATIOS = ((0.5, 0.5), (0.5, 1.0), (1.0, 0.5), (1.0, 1.0))  # (d, c)
DEFAULT_DELAYS = (NO_DELAY, ON_STABILITY, stability_plus(20))

RAW_COLUMNS = [
    "digest", "replication", "seed",
    "population", "num_adversaries", "delta", "epsilon", "d", "c", "r",
    "delay", "max_rounds", "degenerate_band", "status", "error",
    "percent_access", "first_stable_at", "adversaries_activated_at",
    "total_collisions", "congestion", "congestion_formula",
    "boundary_clamp_events",
]

GROUPABLE = ("population", "num_adversaries", "delta", "epsilon", "d", "c", "delay", "congestion_bucket")

# view name -> (output csv name, grouping dimensions)
AGGREGATE_VIEWS = {
    "fig1": ("fig1_population_saturation.csv", ["population", "num_adversaries"]),
    "table2": ("table2_stability_region.csv", ["delta", "epsilon"]),
    "table3": ("table3_agent_movements.csv", ["d", "c"]),
    "delay": ("delay_comparison.csv", ["delay"]),
    "fig4": ("fig4_congestion.csv", ["congestion_bucket"]),
}

AGG_STAT_COLUMNS = [
    "runs", "mean_percent_access", "min_percent_access",
    "max_percent_access", "stddev_percent_access",
]


@dataclass(frozen=True)
class SweepSpec:
    """One experiment grid plus replication and seeding policy."""

    populations: tuple = DEFAULT_POPULATIONS
    adversaries: tuple = DEFAULT_ADVERSARIES
    deltas: tuple = DEFAULT_DELTAS
    epsilons: tuple = DEFAULT_EPSILONS
    dc_ratios: tuple = DEFAULT_DC_RATIOS
    delays: tuple = DEFAULT_DELAYS
    replications: int = 3
    base_seed: int = 1
    r: float = 20.0
    max_rounds: int = 10000

    def validate(self) -> "SweepSpec":
        for name in ("populations", "adversaries", "deltas", "epsilons", "dc_ratios", "delays"):
            if len(getattr(self, name)) == 0:
                raise ConfigError(f"{name} must not be empty")
        if self.replications < 1:
            raise ConfigError(f"replications must be at least 1 (got {self.replications})")
        if not 0 <= self.base_seed < 2**64:
            raise ConfigError(f"base_seed must fit in 64 unsigned bits (got {self.base_seed})")
        if self.max_rounds < 1:
            raise ConfigError(f"max_rounds must be at least 1 (got {self.max_rounds})")
        for pair in self.dc_ratios:
            if len(pair) != 2:
                raise ConfigError(f"dc_ratios entries must be (d, c) pairs (got {pair!r})")
        return self

    def grid_size(self) -> int:
        return (
            len(self.populations) * len(self.adversaries) * len(self.deltas)
            * len(self.epsilons) * len(self.dc_ratios) * len(self.delays)
        )


def expand_grid(spec: SweepSpec) -> list[SimConfig]:
    """Cartesian product over the grid dimensions, in the listed order.

    Seeds are left at 0; run_sweep derives one per (config, replication).
    """
    spec.validate()
    configs = []
    for pop in spec.populations:
        for adv in spec.adversaries:
            for delta in spec.deltas:
                for eps in spec.epsilons:
                    for d, c in spec.dc_ratios:
                        for delay in spec.delays:
                            params = SwarmParams(
                                delta=float(delta), epsilon=float(eps),
                                c=float(c), d=float(d), r=float(spec.r),
                            )
                            configs.append(
                                SimConfig(
                                    population=int(pop),
                                    num_adversaries=int(adv),
                                    params=params,
                                    delay=delay,
                                    max_rounds=spec.max_rounds,
                                    seed=0,
                                    allow_degenerate_band=True,
                                )
                            )
    return configs


def derive_seed(base_seed: int, digest: str, replication: int) -> int:
    """Stable 64-bit per-row seed."""
    key = f"{base_seed}:{digest}:{replication}".encode()
    return int.from_bytes(hashlib.blake2b(key, digest_size=8).digest(), "little")


def _base_row(config: SimConfig, replication: int, seed: int) -> dict:
    p = config.params
    return {
        "digest": config.digest(),
        "replication": replication,
        "seed": seed,
        "population": config.population,
        "num_adversaries": config.num_adversaries,
        "delta": p.delta,
        "epsilon": p.epsilon,
        "d": p.d,
        "c": p.c,
        "r": p.r,
        "delay": config.delay.label(),
        "max_rounds": config.max_rounds,
        "degenerate_band": p.delta <= p.epsilon,
        "status": "ok",
        "error": None,
        "percent_access": None,
        "first_stable_at": None,
        "adversaries_activated_at": None,
        "total_collisions": None,
        "congestion": None,
        "congestion_formula": None,
        "boundary_clamp_events": None,
    }


def execute_row(config: SimConfig, replication: int, seed: int) -> dict:
    """Run one (config, replication) row; failures are captured per row."""
    row = _base_row(config, replication, seed)
    cfg = SimConfig(
        population=config.population,
        num_adversaries=config.num_adversaries,
        params=config.params,
        world=config.world,
        delay=config.delay,
        max_rounds=config.max_rounds,
        seed=seed,
        stability=config.stability,
        adversary_entry_angle=config.adversary_entry_angle,
        allow_degenerate_band=config.allow_degenerate_band,
    )
    try:
        cfg.validate()
    except ConfigError as exc:
        row["status"] = "rejected"
        row["error"] = str(exc)
        return row
    try:
        out = engine.run(cfg)
    except Exception as exc:  # fault isolation: a sweep must survive bad rows
        row["status"] = "error"
        row["error"] = str(exc)
        return row
    res = out.result
    row["percent_access"] = res.percent_access
    row["first_stable_at"] = res.first_stable_at
    row["adversaries_activated_at"] = res.adversaries_activated_at
    row["total_collisions"] = res.total_collisions
    row["congestion"] = res.congestion
    row["congestion_formula"] = out.congestion_formula
    row["boundary_clamp_events"] = out.boundary_clamp_events
    return row


def _execute_task(task) -> dict:
    config, replication, seed = task
    return execute_row(config, replication, seed)


@dataclass
class SweepResult:
    spec: SweepSpec
    rows: list = field(default_factory=list)

    def ok_rows(self) -> list:
        return [r for r in self.rows if r["status"] == "ok"]

    def failed_rows(self) -> list:
        return [r for r in self.rows if r["status"] != "ok"]


def run_sweep(spec: SweepSpec, parallelism: int = 1) -> SweepResult:
    """Execute the whole grid x replications.

    Output is identical for any worker count: runs are independent and rows
    are sorted by (digest, replication) afterwards.
    """
    spec.validate()
    if parallelism < 1:
        raise ConfigError(f"parallelism must be at least 1 (got {parallelism})")
    tasks = []
    for config in expand_grid(spec):
        digest = config.digest()
        for rep in range(spec.replications):
            tasks.append((config, rep, derive_seed(spec.base_seed, digest, rep)))

    if parallelism == 1 or len(tasks) <= 1:
        rows = [_execute_task(t) for t in tasks]
    else:
        engine.warm_kernels()  # compile before forking so workers inherit machine code
        try:
            ctx = multiprocessing.get_context("fork")
        except ValueError:
            ctx = multiprocessing.get_context()
        chunk = max(1, len(tasks) // (parallelism * 8))
        with ctx.Pool(processes=parallelism) as pool:
            rows = pool.map(_execute_task, tasks, chunksize=chunk)

    rows.sort(key=lambda r: (r["digest"], r["replication"]))
    return SweepResult(spec=spec, rows=rows)


def _congestion_bucket(row: dict, bucket_width: float) -> int:
    return int(math.floor(row["congestion"] / bucket_width))


def aggregate(rows: Sequence[dict], group_by: Sequence[str], bucket_width: float = 10.0) -> list[dict]:
    """Mean/count/min/max/stddev of percent access per group.

    Percent access is reported in percent (x100) in aggregates, matching
    how the views are usually read; raw rows keep fractions. Rows that did
    not complete are skipped; degenerate-band rows are included.
    """
    for dim in group_by:
        if dim not in GROUPABLE:
            raise ConfigError(
                f"unknown grouping dimension {dim!r}; known dimensions: {', '.join(GROUPABLE)}"
            )
    groups: dict[tuple, list[float]] = {}
    for row in rows:
        if row.get("status") != "ok" or row.get("percent_access") is None:
            continue
        key = tuple(
            _congestion_bucket(row, bucket_width) if dim == "congestion_bucket" else row[dim]
            for dim in group_by
        )
        groups.setdefault(key, []).append(float(row["percent_access"]))

    out = []
    for key in sorted(groups):
        values = np.asarray(groups[key]) * 100.0
        entry: dict = {}
        for dim, value in zip(group_by, key):
            if dim == "congestion_bucket":
                entry["bucket_low"] = value * bucket_width
                entry["bucket_high"] = (value + 1) * bucket_width
            else:
                entry[dim] = value
        entry["runs"] = int(values.size)
        entry["mean_percent_access"] = float(values.mean())
        entry["min_percent_access"] = float(values.min())
        entry["max_percent_access"] = float(values.max())
        entry["stddev_percent_access"] = float(values.std())
        out.append(entry)
    return out


def aggregate_columns(group_by: Sequence[str]) -> list[str]:
    """CSV column order for an aggregate over `group_by`."""
    dims = []
    for dim in group_by:
        if dim == "congestion_bucket":
            dims.extend(["bucket_low", "bucket_high"])
        else:
            dims.append(dim)
    return dims + AGG_STAT_COLUMNS


# ---------------------------------------------------------------------------
# Sweep spec files: plain "key = comma-separated values" text.

_INT_LIST_KEYS = {"populations", "adversaries"}
_FLOAT_LIST_KEYS = {"deltas", "epsilons"}
_INT_KEYS = {"replications", "base_seed", "max_rounds"}
_FLOAT_KEYS = {"r"}


def parse_sweep_spec(text: str) -> SweepSpec:
    """Parse a sweep spec file.

    Recognized keys: populations, adversaries, deltas, epsilons, dc_ratios
    (d:c pairs), delays (none | stability | stability+K), replications,
    base_seed, r, max_rounds. Blank lines and '#' comments are ignored;
    missing keys keep the full-grid defaults.
    """
    values: dict = {}
    for lineno, raw_line in enumerate(text.splitlines(), start=1):
        line = raw_line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"sweep spec line {lineno}: expected 'key = values' (got {raw_line!r})")
        key, _, rhs = line.partition("=")
        key = key.strip().lower()
        items = [tok.strip() for tok in rhs.split(",") if tok.strip()]
        if not items:
            raise ConfigError(f"sweep spec line {lineno}: no values for {key!r}")
        try:
            if key in _INT_LIST_KEYS:
                values[key] = tuple(int(tok) for tok in items)
            elif key in _FLOAT_LIST_KEYS:
                values[key] = tuple(float(tok) for tok in items)
            elif key in _INT_KEYS:
                values[key] = int(items[0])
            elif key in _FLOAT_KEYS:
                values[key] = float(items[0])
            elif key == "dc_ratios":
                pairs = []
                for tok in items:
                    d_str, sep, c_str = tok.partition(":")
                    if not sep:
                        raise ConfigError(
                            f"sweep spec line {lineno}: dc_ratios entries are d:c (got {tok!r})"
                        )
                    pairs.append((float(d_str), float(c_str)))
                values[key] = tuple(pairs)
            elif key == "delays":
                values[key] = tuple(DelayPolicy.parse(tok) for tok in items)
            else:
                raise ConfigError(f"sweep spec line {lineno}: unknown key {key!r}")
        except ValueError as exc:
            raise ConfigError(f"sweep spec line {lineno}: {exc}") from None
    return SweepSpec(**values).validate()


def load_sweep_spec(path) -> SweepSpec:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_sweep_spec(fh.read())
