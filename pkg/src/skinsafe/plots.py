"""Report figures: bar charts of the aggregated metrics and the per-pad
threshold timeline grid."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np
from matplotlib.colors import ListedColormap

from .harness import POLICY_ORDER, REACTION_ORDER, PART_ORDER, SummaryTables

# Level 0 (most sensitive) red, level 1 orange, level 2 yellow.
LEVEL_COLORS = ("#d62728", "#ff7f0e", "#ffdf22")


def _bar_with_sd(ax, labels, means, sds, color="#4878cf"):
    x = np.arange(len(labels))
    ax.bar(x, means, yerr=sds, capsize=4, color=color)
    ax.set_xticks(x)
    ax.set_xticklabels(labels, rotation=20, ha="right")
    ax.grid(axis="y", alpha=0.3)


def total_time_figure(tables: SummaryTables, path: Path) -> Path:
    fig, ax = plt.subplots(figsize=(7, 4))
    width = 0.38
    x = np.arange(len(POLICY_ORDER))
    for k, rea in enumerate(REACTION_ORDER):
        means, sds = [], []
        for pol in POLICY_ORDER:
            cell = tables.total_time.get(f"{pol.value}/{rea.value}", [np.nan, np.nan, 0])
            means.append(cell[0])
            sds.append(cell[1])
        ax.bar(x + (k - 0.5) * width, means, width, yerr=sds, capsize=4,
               label=rea.value)
    ax.set_xticks(x)
    ax.set_xticklabels([p.value for p in POLICY_ORDER], rotation=15, ha="right")
    ax.set_ylabel("total time [s]")
    ax.set_title("Average total run time (+5 s penalty when reacted)")
    ax.legend()
    ax.grid(axis="y", alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def reaction_time_figure(tables: SummaryTables, path: Path) -> Path:
    fig, ax = plt.subplots(figsize=(6, 4))
    labels, means, sds = [], [], []
    for pol in POLICY_ORDER:
        cell = tables.reaction_time.get(pol.value)
        if cell:
            labels.append(pol.value)
            means.append(cell[0])
            sds.append(cell[1] if cell[2] > 1 else 0.0)
    _bar_with_sd(ax, labels, means, sds, color="#6acc65")
    ax.set_ylabel("reaction time [s]")
    ax.set_title("Average reaction time (reacted runs)")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def avoid_distance_figure(tables: SummaryTables, path: Path) -> Path:
    fig, ax = plt.subplots(figsize=(6, 4))
    labels, means, sds = [], [], []
    for pol in POLICY_ORDER:
        cell = tables.avoid_distance.get(pol.value)
        if cell:
            labels.append(pol.value)
            means.append(cell[0])
            sds.append(cell[1] if cell[2] > 1 else 0.0)
    _bar_with_sd(ax, labels, means, sds, color="#d65f5f")
    ax.set_ylabel("distance [m]")
    ax.set_title("Average avoidance distance (reacted AVOID runs)")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def reaction_rate_figure(tables: SummaryTables, path: Path) -> Path:
    fig, ax = plt.subplots(figsize=(7, 4))
    width = 0.25
    x = np.arange(len(POLICY_ORDER))
    for k, part in enumerate(PART_ORDER):
        vals = [tables.reaction_rate.get(f"{pol.value}/{part.value}", np.nan)
                for pol in POLICY_ORDER]
        ax.bar(x + (k - 1) * width, vals, width, label=part.value)
    ax.set_xticks(x)
    ax.set_xticklabels([p.value for p in POLICY_ORDER], rotation=15, ha="right")
    ax.set_ylabel("reacted [%]")
    ax.set_ylim(0, 105)
    ax.set_title("Reaction rate per body part")
    ax.legend()
    ax.grid(axis="y", alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def render_report_figures(tables: SummaryTables, out_dir: Path) -> list[Path]:
    out_dir = Path(out_dir)
    written = [
        total_time_figure(tables, out_dir / "total_time.png"),
        reaction_rate_figure(tables, out_dir / "reaction_rates.png"),
    ]
    if tables.reaction_time:
        written.append(reaction_time_figure(tables, out_dir / "reaction_times.png"))
    if tables.avoid_distance:
        written.append(avoid_distance_figure(tables, out_dir / "avoid_distance.png"))
    return written


def threshold_timeline_figure(times, level_grid, pad_ids, path: Path) -> Path:
    """Pad x time grid of sensitivity levels (rows: pads, columns: time)."""
    grid = np.asarray(level_grid)
    fig, ax = plt.subplots(figsize=(9, 4))
    cmap = ListedColormap(LEVEL_COLORS)
    ax.imshow(grid.T, aspect="auto", interpolation="nearest", cmap=cmap,
              vmin=-0.5, vmax=2.5,
              extent=[times[0], times[-1], len(pad_ids) - 0.5, -0.5])
    ax.set_yticks(range(len(pad_ids)))
    ax.set_yticklabels([f"pad {i}" for i in pad_ids])
    ax.set_xlabel("time [s]")
    ax.set_title("Sensitivity levels over time (red=0, orange=1, yellow=2)")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path
