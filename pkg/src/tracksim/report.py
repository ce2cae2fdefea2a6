"""Report rendering: delimited files plus matplotlib figures next to them."""

from __future__ import annotations

import csv
import json
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .experiments import METRIC_COLUMNS, AblationResult, SweepCell
from .runner import MODES

__all__ = ["write_ablation_report", "write_sweep_report", "write_run_plot"]

_MODE_LABELS = {"no_llm": "w/o LLMs", "llm": "w/ LLMs", "llm_human": "w/ LLMs + human"}
_METRIC_LABELS = {
    "accumulated_trace": "Accumulated trace",
    "sensing_attacks": "Sensing attacks",
    "comm_attacks": "Comm. attacks",
    "trajectory_length": "Trajectory length (m)",
}


def write_ablation_report(result: AblationResult, out_dir: str | Path) -> dict[str, Path]:
    """Emit ablation.csv (per-seed rows plus means) and ablation.png."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    csv_path = out_dir / "ablation.csv"
    with csv_path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["mode", "seed", *METRIC_COLUMNS])
        for mode in MODES:
            for seed, metrics in zip(result.seeds, result.per_seed[mode]):
                writer.writerow(
                    [mode, seed, *(getattr(metrics, col) for col in METRIC_COLUMNS)]
                )
        for mode in MODES:
            writer.writerow(
                ["mean_" + mode, "", *(result.means[mode][col] for col in METRIC_COLUMNS)]
            )

    fig, axes = plt.subplots(2, 2, figsize=(9, 7))
    for ax, col in zip(axes.flat, METRIC_COLUMNS):
        means = [result.means[mode][col] for mode in MODES]
        spreads = [
            np.std([getattr(m, col) for m in result.per_seed[mode]]) for mode in MODES
        ]
        ax.bar(
            [_MODE_LABELS[m] for m in MODES],
            means,
            yerr=spreads,
            capsize=4,
            color=["#888888", "#4878cf", "#6acc65"],
        )
        ax.set_title(_METRIC_LABELS[col])
        ax.tick_params(axis="x", rotation=10)
    fig.suptitle(f"Mode comparison, mean over {len(result.seeds)} seeds")
    fig.tight_layout()
    png_path = out_dir / "ablation.png"
    fig.savefig(png_path, dpi=130)
    plt.close(fig)
    return {"csv": csv_path, "png": png_path}


def write_sweep_report(cells: list[SweepCell], out_dir: str | Path) -> dict[str, Path]:
    """Emit sweep.csv and a pair of success-rate heat maps in sweep.png."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    csv_path = out_dir / "sweep.csv"
    with csv_path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["robots", "targets", "capacity", "task_rate", "action_rate"])
        for c in cells:
            writer.writerow([c.robots, c.targets, c.capacity, c.task_rate, c.action_rate])

    robots = sorted({c.robots for c in cells})
    targets = sorted({c.targets for c in cells})
    grids = {}
    for attr in ("task_rate", "action_rate"):
        grid = np.full((len(robots), len(targets)), np.nan)
        for c in cells:
            grid[robots.index(c.robots), targets.index(c.targets)] = getattr(c, attr)
        grids[attr] = grid

    fig, axes = plt.subplots(1, 2, figsize=(11, 4.5))
    for ax, (attr, grid) in zip(axes, grids.items()):
        im = ax.imshow(grid, vmin=0.0, vmax=1.0, cmap="viridis", origin="lower")
        ax.set_xticks(range(len(targets)), targets)
        ax.set_yticks(range(len(robots)), robots)
        ax.set_xlabel("targets")
        ax.set_ylabel("robots")
        ax.set_title("Task acceptance" if attr == "task_rate" else "Action acceptance")
        for i in range(len(robots)):
            for j in range(len(targets)):
                if not np.isnan(grid[i, j]):
                    ax.text(j, i, f"{grid[i, j]:.2f}", ha="center", va="center",
                            color="white", fontsize=8)
        fig.colorbar(im, ax=ax, fraction=0.046)
    fig.tight_layout()
    png_path = out_dir / "sweep.png"
    fig.savefig(png_path, dpi=130)
    plt.close(fig)
    return {"csv": csv_path, "png": png_path}


def write_run_plot(log_path: str | Path, out_path: str | Path, scenario=None) -> Path:
    """Render one run's arena trajectories and tracking-cost curve from its log."""
    records = [json.loads(line) for line in Path(log_path).read_text().splitlines()]
    steps = [r for r in records if r["type"] == "step"]
    if not steps:
        raise ValueError(f"no step records in {log_path}")

    fig, (ax_arena, ax_cost) = plt.subplots(
        1, 2, figsize=(11, 5), gridspec_kw={"width_ratios": [1.2, 1.0]}
    )
    zone_colors = {"sensing": "#d62728", "communication": "#1f77b4"}
    if scenario is not None:
        for z in scenario.zones:
            ax_arena.add_patch(
                plt.Circle(z.center, z.radius, color=zone_colors[z.kind], alpha=0.25)
            )
    first = steps[0]
    robots = {r["id"]: [] for r in first["robots"]}
    targets = {t["id"]: [] for t in first["targets"]}
    for rec in steps:
        for r in rec["robots"]:
            robots[r["id"]].append(r["position"])
        for t in rec["targets"]:
            targets[t["id"]].append(t["true_position"])
    for rid, path in robots.items():
        arr = np.array(path)
        ax_arena.plot(arr[:, 0], arr[:, 1], "-", lw=1.2, label=f"drone {rid}")
        ax_arena.plot(arr[-1, 0], arr[-1, 1], "s", ms=6, color=ax_arena.lines[-1].get_color())
    for tid, path in targets.items():
        arr = np.array(path)
        ax_arena.plot(arr[:, 0], arr[:, 1], "--", lw=0.9, label=f"target {tid}")
    ax_arena.set_aspect("equal")
    ax_arena.set_title("trajectories")
    ax_arena.legend(fontsize=7, ncol=2)

    costs = [rec["tracking_cost"] for rec in steps]
    ax_cost.plot([rec["step"] for rec in steps], costs, lw=1.0)
    ax_cost.set_xlabel("step")
    ax_cost.set_ylabel("tracking cost (sum of traces)")
    ax_cost.set_title("tracking cost")
    fig.tight_layout()
    out_path = Path(out_path)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(out_path, dpi=130)
    plt.close(fig)
    return out_path
