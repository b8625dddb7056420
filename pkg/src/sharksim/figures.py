"""Render the aggregate views to PNG files for the report path.

All simulation outputs remain plain CSV; these figures are an optional
convenience layered on top of the same aggregates.
"""

from __future__ import annotations

from pathlib import Path
from typing import Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .sweep import aggregate


def save_population_saturation(rows: Sequence[dict], path) -> None:
    """Mean percent access vs adversary count, one line per population."""
    entries = aggregate(rows, ["population", "num_adversaries"])
    populations = sorted({e["population"] for e in entries})
    fig, ax = plt.subplots(figsize=(6.5, 4.2))
    for pop in populations:
        pts = [(e["num_adversaries"], e["mean_percent_access"]) for e in entries if e["population"] == pop]
        xs, ys = zip(*sorted(pts))
        ax.plot(xs, ys, marker="o", label=f"population {pop}")
    ax.set_xlabel("number of adversaries")
    ax.set_ylabel("mean percent access (%)")
    ax.set_title("Perimeter opened by corralling, by population saturation")
    ax.grid(True, alpha=0.3)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def _annotated_grid(ax, row_vals, col_vals, matrix, row_label, col_label):
    im = ax.imshow(matrix, cmap="viridis")
    ax.set_xticks(range(len(col_vals)), [str(v) for v in col_vals])
    ax.set_yticks(range(len(row_vals)), [str(v) for v in row_vals])
    ax.set_xlabel(col_label)
    ax.set_ylabel(row_label)
    for i in range(len(row_vals)):
        for j in range(len(col_vals)):
            v = matrix[i, j]
            text = "n/a" if np.isnan(v) else f"{v:.2f}%"
            ax.text(j, i, text, ha="center", va="center", color="white", fontsize=9)
    return im


def save_stability_region(rows: Sequence[dict], path) -> None:
    """Mean percent access over the delta x epsilon grid."""
    entries = aggregate(rows, ["delta", "epsilon"])
    deltas = sorted({e["delta"] for e in entries})
    epsilons = sorted({e["epsilon"] for e in entries})
    matrix = np.full((len(deltas), len(epsilons)), np.nan)
    for e in entries:
        matrix[deltas.index(e["delta"]), epsilons.index(e["epsilon"])] = e["mean_percent_access"]
    fig, ax = plt.subplots(figsize=(5.2, 4.2))
    _annotated_grid(ax, deltas, epsilons, matrix, "delta", "epsilon")
    ax.set_title("Percent access across band shapes")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_agent_movements(rows: Sequence[dict], path) -> None:
    """Mean percent access over the d x c step-size grid."""
    entries = aggregate(rows, ["d", "c"])
    ds = sorted({e["d"] for e in entries})
    cs = sorted({e["c"] for e in entries})
    matrix = np.full((len(cs), len(ds)), np.nan)
    for e in entries:
        matrix[cs.index(e["c"]), ds.index(e["d"])] = e["mean_percent_access"]
    fig, ax = plt.subplots(figsize=(5.2, 4.2))
    _annotated_grid(ax, cs, ds, matrix, "center step c", "dispersion step d")
    ax.set_title("Percent access across step-size ratios")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_delay_comparison(rows: Sequence[dict], path) -> None:
    """Mean percent access per adversary delay policy."""
    entries = aggregate(rows, ["delay"])
    labels = [e["delay"] for e in entries]
    means = [e["mean_percent_access"] for e in entries]
    fig, ax = plt.subplots(figsize=(5.2, 4.0))
    bars = ax.bar(labels, means, color="#3a6ea5")
    ax.bar_label(bars, fmt="%.2f%%")
    ax.set_xlabel("adversary delay policy")
    ax.set_ylabel("mean percent access (%)")
    ax.set_title("Attack effectiveness by entry delay")
    ax.grid(True, axis="y", alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_congestion(rows: Sequence[dict], path, bucket_width: float = 10.0) -> None:
    """Mean percent access vs congestion rating (band area per agent)."""
    entries = aggregate(rows, ["congestion_bucket"], bucket_width=bucket_width)
    xs = [(e["bucket_low"] + e["bucket_high"]) / 2.0 for e in entries]
    ys = [e["mean_percent_access"] for e in entries]
    fig, ax = plt.subplots(figsize=(6.5, 4.2))
    ax.plot(xs, ys, marker="o", color="#a4403a")
    ax.set_xlabel("congestion rating (band area per agent, square units)")
    ax.set_ylabel("mean percent access (%)")
    ax.set_title("Attack effectiveness vs ring congestion")
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


FIGURES = {
    "fig1_population_saturation.png": save_population_saturation,
    "table2_stability_region.png": save_stability_region,
    "table3_agent_movements.png": save_agent_movements,
    "delay_comparison.png": save_delay_comparison,
    "fig4_congestion.png": save_congestion,
}


def render_all(rows: Sequence[dict], outdir) -> list[Path]:
    """Render every figure; rows with no completed runs are skipped."""
    outdir = Path(outdir)
    written = []
    ok_rows = [r for r in rows if r.get("status") == "ok" and r.get("percent_access") is not None]
    if not ok_rows:
        return written
    for filename, renderer in FIGURES.items():
        path = outdir / filename
        renderer(ok_rows, path)
        written.append(path)
    return written
