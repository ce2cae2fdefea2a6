"""Scenario runner: steps the world, fuses, solves, queries, and logs.

Per step: apply pending LLM results and issue due queries, fuse measurements
into the central beliefs, solve each robot's control, advance the world,
sample attacks, then log. Runs are pure functions of (scenario, mode, seed,
steps, backend determinism); two identical runs produce byte-identical
JSONL logs.
"""

from __future__ import annotations

import json
import math
import time
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from .allocation import Assignment, greedy_assign
from .backends import MockBackend
from .errors import NumericalDegeneracyError, ScenarioError, SolverNumericsError
from .estimation import (
    Measurement,
    TargetBelief,
    fuse_team,
    kf_predict,
    measurement_noise,
    tracking_cost,
)
from .llm import (
    HUMAN_INPUT_PREFIX,
    PromptContext,
    Snapshot,
    SnapshotAttack,
    SnapshotBelief,
    SnapshotRobot,
    SnapshotZone,
)
from .loop import CadencePlan, LlmLoop
from .scenario import Scenario
from .solver import solve_step
from .world import SENSING, World

__all__ = ["RunMetrics", "RunHooks", "run_scenario", "load_human_script", "MODES"]

MODES = ("no_llm", "llm", "llm_human")


@dataclass
class RunMetrics:
    """Aggregates reported per run; mirrors the comparison-table columns."""

    steps: int = 0
    accumulated_trace: float = 0.0
    sensing_attacks: int = 0
    comm_attacks: int = 0
    trajectory_length: float = 0.0
    task_success_rate: float = 1.0
    action_success_rate: float = 1.0
    tokens_prompt: int = 0
    tokens_response: int = 0
    sensing_incursion_steps: int = 0

    def as_dict(self) -> dict:
        return asdict(self)


class RunHooks:
    """External touch points for a live run; the defaults are inert.

    ``control`` may return "pause", "resume", or "stop"; it is polled at every
    step boundary (and while paused). ``supervisor_inputs`` is drained at every
    step boundary. ``on_step`` receives a serializable frame after each step.
    """

    def on_step(self, frame: dict) -> None:
        pass

    def on_finish(self, frame: dict) -> None:
        pass

    def control(self) -> str | None:
        return None

    def supervisor_inputs(self) -> list[tuple[str, str]]:
        return []


def load_human_script(path: str | Path) -> dict[int, list[tuple[str, str]]]:
    """Parse a step-indexed supervisor script.

    Line format: ``<step> <category> <text...>``; blank lines and lines
    starting with '#' are ignored.
    """
    script: dict[int, list[tuple[str, str]]] = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split(maxsplit=2)
        if len(parts) != 3:
            raise ScenarioError(f"{path}:{lineno}: expected '<step> <category> <text>'")
        step_s, category, text = parts
        try:
            step = int(step_s)
        except ValueError as exc:
            raise ScenarioError(f"{path}:{lineno}: bad step index {step_s!r}") from exc
        script.setdefault(step, []).append((category, text))
    return script


def _initial_beliefs(scenario: Scenario) -> dict[int, TargetBelief]:
    var = scenario.initial_variance
    return {
        t.id: TargetBelief(
            t.id,
            np.array([t.position[0], t.position[1], 0.0, 0.0]),
            var * np.eye(4),
        )
        for t in scenario.targets
    }


def _greedy_from_state(
    beliefs: dict[int, TargetBelief], world: World, capacities: dict[int, int], epoch: int
) -> Assignment:
    traces = {tid: b.trace for tid, b in beliefs.items()}
    positions = {tid: (float(b.mean[0]), float(b.mean[1])) for tid, b in beliefs.items()}
    robot_positions = {
        r.id: (float(r.position[0]), float(r.position[1])) for r in world.robots
    }
    return greedy_assign(traces, positions, robot_positions, capacities, epoch=epoch)


def _make_snapshot(
    step: int,
    world: World,
    beliefs: dict[int, TargetBelief],
    assignment: Assignment,
    weights,
    cost: float,
) -> Snapshot:
    robots = tuple(
        SnapshotRobot(
            id=r.id,
            position=(float(r.position[0]), float(r.position[1])),
            capacity=r.capacity,
            sensing_attacked_until=r.sensing_attacked_until,
            comm_attacked_until=r.comm_attacked_until,
            known_zones=tuple(sorted(r.known_zones)),
        )
        for r in world.robots
    )
    belief_rows = tuple(
        SnapshotBelief(
            target_id=tid,
            mean=tuple(float(v) for v in beliefs[tid].mean),
            trace=beliefs[tid].trace,
        )
        for tid in sorted(beliefs)
    )
    zones = tuple(
        SnapshotZone(z.id, z.kind, (z.center[0], z.center[1]), z.radius)
        for z in world.zones
    )
    attacks = []
    for r in world.robots:
        if r.sensing_attacked(step):
            attacks.append(SnapshotAttack(r.id, -1, "sensing", r.sensing_attacked_until))
        if r.comm_attacked(step):
            attacks.append(SnapshotAttack(r.id, -1, "communication", r.comm_attacked_until))
    return Snapshot(
        step=step,
        robots=robots,
        beliefs=belief_rows,
        zones=zones,
        attacks=tuple(attacks),
        assignment=assignment,
        weights=weights,
        tracking_cost=cost,
    )


class _LogWriter:
    def __init__(self, path: str | Path | None):
        self.path = Path(path) if path is not None else None
        self._fh = self.path.open("w", encoding="utf-8") if self.path else None

    def write(self, record: dict) -> None:
        if self._fh is not None:
            self._fh.write(json.dumps(record, sort_keys=True) + "\n")

    def close(self) -> None:
        if self._fh is not None:
            self._fh.close()


def _exchange_record(e) -> dict:
    return {
        "type": "exchange",
        "step": e.issued_step,
        "role": e.role,
        "system": e.system_prompt,
        "user": e.user_prompt,
        "response": e.response,
        "verdict": e.verdict,
        "reason": e.reason,
        "tokens_prompt": e.tokens_prompt,
        "tokens_response": e.tokens_response,
        "latency": e.latency,
        "max_tokens": e.max_tokens,
        "beta": e.beta,
    }


def _frame(
    step: int,
    world: World,
    beliefs: dict[int, TargetBelief],
    assignment: Assignment,
    weights,
    cost: float,
    metrics: RunMetrics,
    exchanges,
    status: str,
) -> dict:
    return {
        "step": step,
        "status": status,
        "robots": [
            {
                "id": r.id,
                "position": [float(r.position[0]), float(r.position[1])],
                "sensing_attacked": r.sensing_attacked(step),
                "comm_attacked": r.comm_attacked(step),
                "assigned_targets": assignment.targets_of(r.id)
                if r.id in assignment.robot_ids
                else [],
            }
            for r in world.robots
        ],
        "targets": [
            {
                "id": t.id,
                "true_position": [float(t.position[0]), float(t.position[1])],
                "belief_mean": [float(v) for v in beliefs[t.id].mean[:2]],
                "trace": beliefs[t.id].trace,
            }
            for t in world.targets
        ],
        "zones": [
            {
                "id": z.id,
                "kind": z.kind,
                "center": [z.center[0], z.center[1]],
                "radius": z.radius,
            }
            for z in world.zones
        ],
        "weights": [weights.w1, weights.w2, weights.w3, weights.w4],
        "tracking_cost": cost,
        "exchanges": [
            {
                "step": e.issued_step,
                "role": e.role,
                "verdict": e.verdict,
                "reason": e.reason,
                "response": e.response,
                "tokens_response": e.tokens_response,
                "human_input": HUMAN_INPUT_PREFIX in e.user_prompt,
            }
            for e in exchanges[-20:]
        ],
        "metrics": metrics.as_dict(),
    }


def run_scenario(
    scenario: Scenario,
    mode: str,
    steps: int,
    backend=None,
    seed: int | None = None,
    log_path: str | Path | None = None,
    human_script: dict[int, list[tuple[str, str]]] | None = None,
    hooks: RunHooks | None = None,
    pace: float = 0.0,
) -> RunMetrics:
    """Run one scenario and return its metrics (writing a JSONL log if asked).

    ``mode`` is one of: no_llm (greedy reassignment at the task cadence,
    weights pinned at the scenario values), llm (both LLMs in the loop), or
    llm_human (llm plus a step-indexed supervisor script).
    """
    if mode not in MODES:
        raise ScenarioError(f"unknown mode {mode!r}")
    if mode == "llm_human" and human_script is None:
        raise ScenarioError("llm_human mode requires a human script")
    if steps < 0:
        raise ScenarioError("steps must be >= 0")
    if seed is not None:
        scenario = scenario.with_seed(seed)
    backend = backend if backend is not None else MockBackend()
    hooks = hooks if hooks is not None else RunHooks()
    human_script = human_script or {}

    world = World(
        scenario.world,
        scenario.robots,
        scenario.targets,
        scenario.zones,
        scenario.target_noise_sigma,
    )
    beliefs = _initial_beliefs(scenario)
    capacities = scenario.capacities
    assignment = _greedy_from_state(beliefs, world, capacities, epoch=0)
    weights = scenario.weights
    ctx = PromptContext(window=scenario.history_window)

    loop = None
    if mode in ("llm", "llm_human"):
        cadence = CadencePlan(
            cadence_action=scenario.cadence_action,
            cadence_task=scenario.cadence_task,
            jitter=scenario.cadence_jitter,
            rng=np.random.default_rng(scenario.world.rng_seed) if scenario.cadence_jitter else None,
        )
        # Backends see zones inflated by the planner margin plus one step of
        # reach, so weight adjustments can react before a robot crosses in.
        loop = LlmLoop(
            ctx=ctx,
            backend=backend,
            capacities=capacities,
            bounds=scenario.bounds,
            cadence=cadence,
            initial_assignment=assignment,
            initial_weights=weights,
            model_class=scenario.model_class,
            margin=scenario.safety_margin + scenario.world.u_max * scenario.world.dt,
        )

    metrics = RunMetrics()
    log = _LogWriter(log_path)
    prev_controls: dict[int, np.ndarray] = {}
    exchanges_logged = 0
    cost = tracking_cost(beliefs)
    ctx.push(_make_snapshot(0, world, beliefs, assignment, weights, cost))
    stopped = False

    step = 0
    try:
        for step in range(1, steps + 1):
            # -- stage 0: external control and supervisor input
            command = hooks.control()
            if command == "pause":
                while command not in ("resume", "stop"):
                    time.sleep(0.02)
                    command = hooks.control()
            if command == "stop":
                stopped = True
                break
            for category, text in hooks.supervisor_inputs():
                ctx.ingest_human(category, text)
            for category, text in human_script.get(step, []):
                ctx.ingest_human(category, text)

            # -- stage 1: apply pending LLM results, then issue due queries
            if loop is not None:
                loop.apply_pending(step)
                assignment = loop.assignment
                weights = loop.weights
                loop.issue_due_queries(step)
            elif step % scenario.cadence_task == 0:
                assignment = _greedy_from_state(beliefs, world, capacities, epoch=step)

            # -- stage 2: predict + fuse measurements
            beliefs = {
                tid: kf_predict(b, scenario.world.dt, scenario.process_noise)
                for tid, b in beliefs.items()
            }
            measurements = []
            for robot in world.robots:
                if robot.sensing_attacked(step):
                    continue
                for target in world.targets:
                    d = math.hypot(
                        robot.position[0] - target.position[0],
                        robot.position[1] - target.position[1],
                    )
                    if scenario.sensor.max_range is not None and d > scenario.sensor.max_range:
                        continue
                    noise = measurement_noise(d, scenario.sensor)
                    std = math.sqrt(noise[0, 0])
                    z = target.position + std * world.measurement_rng.normal(size=2)
                    measurements.append(
                        Measurement(
                            robot_id=robot.id,
                            target_id=target.id,
                            z=(float(z[0]), float(z[1])),
                            noise=((noise[0, 0], 0.0), (0.0, noise[1, 1])),
                        )
                    )
            beliefs = fuse_team(beliefs, measurements, world.robots, step)
            cost = tracking_cost(beliefs)
            metrics.accumulated_trace += cost
            ctx.push(_make_snapshot(step, world, beliefs, assignment, weights, cost))

            # -- stage 3: per-robot control solves
            controls: dict[int, np.ndarray] = {}
            for robot in world.robots:
                assigned = (
                    assignment.targets_of(robot.id)
                    if robot.id in assignment.robot_ids
                    else []
                )
                report = solve_step(
                    robot,
                    [beliefs[tid] for tid in assigned],
                    world.zones_known_to(robot),
                    weights,
                    scenario.sensor,
                    scenario.world,
                    q=scenario.process_noise,
                    margin=scenario.safety_margin,
                    prev_control=prev_controls.get(robot.id),
                )
                controls[robot.id] = np.array(report.control)
            prev_controls = controls

            # -- stage 4: advance world, sample attacks
            before = {r.id: r.position.copy() for r in world.robots}
            events = world.step(controls)
            for r in world.robots:
                metrics.trajectory_length += float(
                    np.linalg.norm(r.position - before[r.id])
                )
            for e in events:
                if e.kind == SENSING:
                    metrics.sensing_attacks += 1
                else:
                    metrics.comm_attacks += 1
            incursions = sum(
                1
                for r in world.robots
                for z in world.zones
                if z.kind == SENSING and z.distance(r.position) < z.radius
            )
            metrics.sensing_incursion_steps += incursions
            metrics.steps = step

            # -- stage 5: log
            if loop is not None:
                for e in loop.exchanges[exchanges_logged:]:
                    log.write(_exchange_record(e))
                    metrics.tokens_prompt += e.tokens_prompt
                    metrics.tokens_response += e.tokens_response
                exchanges_logged = len(loop.exchanges)
            log.write(
                {
                    "type": "step",
                    "step": step,
                    "robots": [
                        {
                            "id": r.id,
                            "position": [float(r.position[0]), float(r.position[1])],
                            "sensing_attacked_until": r.sensing_attacked_until,
                            "comm_attacked_until": r.comm_attacked_until,
                        }
                        for r in world.robots
                    ],
                    "targets": [
                        {
                            "id": t.id,
                            "true_position": [float(t.position[0]), float(t.position[1])],
                            "belief_mean": [float(v) for v in beliefs[t.id].mean],
                            "trace": beliefs[t.id].trace,
                        }
                        for t in world.targets
                    ],
                    "tracking_cost": cost,
                    "weights": list(weights.as_tuple()),
                    "assignment": {
                        "epoch": assignment.epoch,
                        "robot_ids": list(assignment.robot_ids),
                        "target_ids": list(assignment.target_ids),
                        "matrix": [list(row) for row in assignment.matrix],
                    },
                    "attacks": [
                        {
                            "robot_id": e.robot_id,
                            "zone_id": e.zone_id,
                            "kind": e.kind,
                            "until": e.until,
                        }
                        for e in events
                    ],
                    "incursions": incursions,
                }
            )
            if loop is not None:
                metrics.task_success_rate = loop.success_rate("task")
                metrics.action_success_rate = loop.success_rate("action")
            hooks.on_step(
                _frame(
                    step,
                    world,
                    beliefs,
                    assignment,
                    weights,
                    cost,
                    metrics,
                    loop.exchanges if loop is not None else [],
                    "running",
                )
            )
            if pace > 0:
                time.sleep(pace)

        if loop is not None:
            for e in loop.exchanges[exchanges_logged:]:
                log.write(_exchange_record(e))
                metrics.tokens_prompt += e.tokens_prompt
                metrics.tokens_response += e.tokens_response
            metrics.task_success_rate = loop.success_rate("task")
            metrics.action_success_rate = loop.success_rate("action")
        log.write({"type": "metrics", **metrics.as_dict()})
        final = _frame(
            metrics.steps,
            world,
            beliefs,
            assignment,
            weights,
            cost,
            metrics,
            loop.exchanges if loop is not None else [],
            "stopped" if stopped else "finished",
        )
        hooks.on_finish(final)
    except (NumericalDegeneracyError, SolverNumericsError) as exc:
        log.write({"type": "error", "step": step, "error": str(exc)})
        raise
    finally:
        if loop is not None:
            loop.shutdown()
        log.close()
    return metrics
