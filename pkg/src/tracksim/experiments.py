"""Batch experiments: the three-mode comparison and the success-rate sweep."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .allocation import greedy_assign
from .estimation import TargetBelief, tracking_cost
from .llm import ACTION, TASK, PromptContext, WeightBounds
from .loop import CadencePlan, LlmLoop
from .runner import MODES, RunMetrics, _initial_beliefs, _make_snapshot, run_scenario
from .scenario import Scenario, scenario_from_dict
from .world import World

__all__ = ["AblationResult", "ablation", "SweepCell", "sweep_success", "sweep_scenario"]

METRIC_COLUMNS = (
    "accumulated_trace",
    "sensing_attacks",
    "comm_attacks",
    "trajectory_length",
)


@dataclass
class AblationResult:
    seeds: list[int]
    per_seed: dict[str, list[RunMetrics]]
    means: dict[str, dict[str, float]] = field(init=False)

    def __post_init__(self):
        self.means = {
            mode: {
                col: float(np.mean([getattr(m, col) for m in runs]))
                for col in METRIC_COLUMNS
            }
            for mode, runs in self.per_seed.items()
        }

    def table(self) -> str:
        header = f"{'mode':12s} {'accum. trace':>14s} {'sensing':>9s} {'comm':>7s} {'traj. (m)':>11s}"
        lines = [header, "-" * len(header)]
        for mode in MODES:
            row = self.means[mode]
            lines.append(
                f"{mode:12s} {row['accumulated_trace']:14.2f} "
                f"{row['sensing_attacks']:9.2f} {row['comm_attacks']:7.2f} "
                f"{row['trajectory_length']:11.2f}"
            )
        return "\n".join(lines)


def ablation(
    scenario: Scenario,
    seeds: list[int],
    backend_factory,
    steps: int = 300,
    human_script: dict[int, list[tuple[str, str]]] | None = None,
) -> AblationResult:
    """Run all three modes over the given seeds and aggregate the metrics.

    ``backend_factory`` is called once per run so stateful backends (the
    faulty wrapper) start fresh each time.
    """
    if len(seeds) < 10:
        raise ValueError("ablation needs at least 10 seeds")
    per_seed: dict[str, list[RunMetrics]] = {mode: [] for mode in MODES}
    for seed in seeds:
        for mode in MODES:
            per_seed[mode].append(
                run_scenario(
                    scenario,
                    mode,
                    steps=steps,
                    backend=backend_factory(),
                    seed=seed,
                    human_script=human_script if mode == "llm_human" else None,
                )
            )
    return AblationResult(seeds=list(seeds), per_seed=per_seed)


@dataclass(frozen=True)
class SweepCell:
    robots: int
    targets: int
    capacity: int
    task_rate: float
    action_rate: float


def sweep_scenario(n_robots: int, n_targets: int, seed: int = 0) -> Scenario:
    """Synthetic sweep world: five sensing and two communication zones.

    Robots start on the left edge, targets march rightward at staggered
    speeds; per-robot capacity is half the target count, floored, at least 1.
    """
    capacity = max(1, n_targets // 2)
    robots = [
        {"id": i + 1, "start": [-8.0, -6.0 + 12.0 * i / max(1, n_robots - 1)], "capacity": capacity}
        for i in range(n_robots)
    ]
    targets = [
        {
            "id": 100 + j,
            "start": [-5.0 + (j % 3), -6.0 + 12.0 * j / max(1, n_targets - 1)],
            "velocity": [0.03 + 0.005 * j, 0.0],
        }
        for j in range(n_targets)
    ]
    zones = []
    for k, (x, y) in enumerate([(-2, 4), (0, -4), (2, 2), (4, -2), (6, 5)]):
        zones.append(
            {"id": k + 1, "kind": "sensing", "center": [x, y], "radius": 1.0,
             "p_max": 0.7, "attack_duration": 8}
        )
    for k, (x, y) in enumerate([(-1, 0), (5, 0)]):
        zones.append(
            {"id": 6 + k, "kind": "communication", "center": [x, y], "radius": 1.0,
             "p_max": 0.6, "attack_duration": 8}
        )
    return scenario_from_dict(
        {
            "name": f"sweep_{n_robots}x{n_targets}",
            "workspace": {"xmin": -10, "ymin": -10, "xmax": 10, "ymax": 10},
            "dt": 1.0,
            "u_max": 0.5,
            "seed": seed,
            "robots": robots,
            "targets": targets,
            "zones": zones,
            "sensor": {"sigma0": 0.1, "sigma1": 1.2, "max_range": 8.0},
            "process_noise": 0.08,
        }
    )


def _acceptance_rates(scenario: Scenario, backend, queries: int) -> tuple[float, float]:
    """Issue repeated task/action queries against a fixed initial snapshot."""
    world = World(scenario.world, scenario.robots, scenario.targets, scenario.zones)
    beliefs: dict[int, TargetBelief] = _initial_beliefs(scenario)
    capacities = scenario.capacities
    traces = {tid: b.trace for tid, b in beliefs.items()}
    positions = {tid: (float(b.mean[0]), float(b.mean[1])) for tid, b in beliefs.items()}
    robot_positions = {r.id: (float(r.position[0]), float(r.position[1])) for r in world.robots}
    assignment = greedy_assign(traces, positions, robot_positions, capacities)
    ctx = PromptContext(window=scenario.history_window)
    ctx.push(
        _make_snapshot(0, world, beliefs, assignment, scenario.weights, tracking_cost(beliefs))
    )
    loop = LlmLoop(
        ctx=ctx,
        backend=backend,
        capacities=capacities,
        bounds=WeightBounds(),
        cadence=CadencePlan(2, 10),
        initial_assignment=assignment,
        initial_weights=scenario.weights,
        margin=scenario.safety_margin,
    )
    for i in range(queries):
        loop.query(TASK, step=i + 1)
        loop.query(ACTION, step=i + 1)
    return loop.success_rate(TASK), loop.success_rate(ACTION)


def sweep_success(
    robot_range,
    target_range,
    backend_factory,
    queries_per_cell: int = 100,
) -> list[SweepCell]:
    """Acceptance-rate grid over team and target counts (each within [2, 8])."""
    robot_range = list(robot_range)
    target_range = list(target_range)
    for v in (*robot_range, *target_range):
        if not 2 <= v <= 8:
            raise ValueError("sweep ranges must lie within [2, 8]")
    cells = []
    for m in robot_range:
        for n in target_range:
            scenario = sweep_scenario(m, n)
            task_rate, action_rate = _acceptance_rates(
                scenario, backend_factory(), queries_per_cell
            )
            cells.append(
                SweepCell(
                    robots=m,
                    targets=n,
                    capacity=max(1, n // 2),
                    task_rate=task_rate,
                    action_rate=action_rate,
                )
            )
    return cells
