"""Scenario files: one YAML document describing the world and run defaults.

The loader is strict: unknown fields anywhere in the document are rejected,
and every invariant (positive radii, capacities, probabilities in range,
ids unique, positions inside the workspace) is checked up front so a run
can never start from an invalid configuration.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import yaml

from .errors import ScenarioError
from .estimation import SensorModel
from .llm import WeightBounds
from .solver import WeightVector
from .world import (
    ZONE_KINDS,
    DangerZone,
    RobotState,
    TargetTruth,
    WorldConfig,
    Workspace,
)

__all__ = ["Scenario", "load_scenario", "scenario_from_dict"]

_TOP_FIELDS = {
    "name",
    "workspace",
    "dt",
    "u_max",
    "seed",
    "robots",
    "targets",
    "zones",
    "weights",
    "weight_bounds",
    "cadence_action",
    "cadence_task",
    "cadence_jitter",
    "history_window",
    "sensor",
    "process_noise",
    "target_noise_sigma",
    "safety_margin",
    "model_class",
    "initial_variance",
}
_WORKSPACE_FIELDS = {"xmin", "ymin", "xmax", "ymax"}
_ROBOT_FIELDS = {"id", "start", "capacity", "known_zones"}
_TARGET_FIELDS = {"id", "start", "velocity"}
_ZONE_FIELDS = {"id", "kind", "center", "radius", "p_max", "attack_duration"}
_SENSOR_FIELDS = {"sigma0", "sigma1", "max_range"}
_BOUNDS_FIELDS = {"lo", "hi"}


@dataclass
class Scenario:
    """Fully validated scenario: world description plus run-level defaults."""

    name: str
    world: WorldConfig
    robots: list[RobotState]
    targets: list[TargetTruth]
    zones: list[DangerZone]
    weights: WeightVector = field(default_factory=lambda: WeightVector(1, 1, 1, 1))
    bounds: WeightBounds = field(default_factory=WeightBounds)
    cadence_action: int = 2
    cadence_task: int = 10
    cadence_jitter: bool = False
    history_window: int = 5
    sensor: SensorModel = field(default_factory=lambda: SensorModel(0.1, 0.2, 5.0))
    process_noise: float = 0.01
    target_noise_sigma: float = 0.0
    safety_margin: float = 0.2
    model_class: str = "base"
    initial_variance: float = 1.0

    @property
    def capacities(self) -> dict[int, int]:
        return {r.id: r.capacity for r in self.robots}

    @property
    def mean_capacity(self) -> float:
        return sum(r.capacity for r in self.robots) / len(self.robots)

    def with_seed(self, seed: int) -> "Scenario":
        world = WorldConfig(self.world.workspace, self.world.dt, self.world.u_max, seed)
        out = Scenario(**{**self.__dict__, "world": world})
        return out

    def with_weights(self, weights: WeightVector) -> "Scenario":
        return Scenario(**{**self.__dict__, "weights": weights})


def _reject_unknown(mapping: dict, allowed: set[str], where: str) -> None:
    unknown = set(mapping) - allowed
    if unknown:
        raise ScenarioError(f"unknown field(s) {sorted(unknown)} in {where}")


def _require(mapping: dict, key: str, where: str):
    if key not in mapping:
        raise ScenarioError(f"missing required field {key!r} in {where}")
    return mapping[key]


def _pair(value, where: str) -> tuple[float, float]:
    if not isinstance(value, (list, tuple)) or len(value) != 2:
        raise ScenarioError(f"{where} must be a 2-element list")
    return float(value[0]), float(value[1])


def scenario_from_dict(doc: dict, name: str = "inline") -> Scenario:
    if not isinstance(doc, dict):
        raise ScenarioError("scenario document must be a mapping")
    _reject_unknown(doc, _TOP_FIELDS, "scenario")

    ws_doc = _require(doc, "workspace", "scenario")
    _reject_unknown(ws_doc, _WORKSPACE_FIELDS, "workspace")
    try:
        workspace = Workspace(
            float(_require(ws_doc, "xmin", "workspace")),
            float(_require(ws_doc, "ymin", "workspace")),
            float(_require(ws_doc, "xmax", "workspace")),
            float(_require(ws_doc, "ymax", "workspace")),
        )
        world = WorldConfig(
            workspace=workspace,
            dt=float(_require(doc, "dt", "scenario")),
            u_max=float(_require(doc, "u_max", "scenario")),
            rng_seed=int(_require(doc, "seed", "scenario")),
        )
    except ValueError as exc:
        raise ScenarioError(str(exc)) from exc

    zones = []
    for i, z in enumerate(doc.get("zones", [])):
        where = f"zones[{i}]"
        _reject_unknown(z, _ZONE_FIELDS, where)
        kind = _require(z, "kind", where)
        if kind not in ZONE_KINDS:
            raise ScenarioError(f"{where}: kind must be one of {ZONE_KINDS}")
        try:
            zones.append(
                DangerZone(
                    id=int(_require(z, "id", where)),
                    kind=kind,
                    center=_pair(_require(z, "center", where), f"{where}.center"),
                    radius=float(_require(z, "radius", where)),
                    p_max=float(_require(z, "p_max", where)),
                    attack_duration=int(_require(z, "attack_duration", where)),
                )
            )
        except ValueError as exc:
            raise ScenarioError(f"{where}: {exc}") from exc
    zone_ids = [z.id for z in zones]
    if len(set(zone_ids)) != len(zone_ids):
        raise ScenarioError("duplicate zone ids")

    robots = []
    for i, r in enumerate(_require(doc, "robots", "scenario")):
        where = f"robots[{i}]"
        _reject_unknown(r, _ROBOT_FIELDS, where)
        start = _pair(_require(r, "start", where), f"{where}.start")
        known = r.get("known_zones")
        if known is None:
            known_zones = frozenset(zone_ids)
        else:
            known_zones = frozenset(int(k) for k in known)
            if not known_zones <= set(zone_ids):
                raise ScenarioError(f"{where}: known_zones reference missing zone ids")
        try:
            robot = RobotState(
                id=int(_require(r, "id", where)),
                position=start,
                capacity=int(_require(r, "capacity", where)),
                known_zones=known_zones,
            )
        except ValueError as exc:
            raise ScenarioError(f"{where}: {exc}") from exc
        if not workspace.contains(robot.position):
            raise ScenarioError(f"{where}: start position outside workspace")
        robots.append(robot)
    if not robots:
        raise ScenarioError("scenario needs at least one robot")
    robot_ids = [r.id for r in robots]
    if len(set(robot_ids)) != len(robot_ids):
        raise ScenarioError("duplicate robot ids")

    targets = []
    for i, t in enumerate(_require(doc, "targets", "scenario")):
        where = f"targets[{i}]"
        _reject_unknown(t, _TARGET_FIELDS, where)
        start = _pair(_require(t, "start", where), f"{where}.start")
        target = TargetTruth(
            id=int(_require(t, "id", where)),
            position=start,
            velocity=_pair(_require(t, "velocity", where), f"{where}.velocity"),
        )
        if not workspace.contains(target.position):
            raise ScenarioError(f"{where}: start position outside workspace")
        targets.append(target)
    if not targets:
        raise ScenarioError("scenario needs at least one target")
    target_ids = [t.id for t in targets]
    if len(set(target_ids)) != len(target_ids):
        raise ScenarioError("duplicate target ids")

    weights_doc = doc.get("weights", [1.0, 1.0, 1.0, 1.0])
    if not isinstance(weights_doc, (list, tuple)) or len(weights_doc) != 4:
        raise ScenarioError("weights must be a 4-element list")
    weights = WeightVector(*(float(w) for w in weights_doc))

    bounds_doc = doc.get("weight_bounds")
    if bounds_doc is None:
        bounds = WeightBounds()
    else:
        _reject_unknown(bounds_doc, _BOUNDS_FIELDS, "weight_bounds")
        lo = bounds_doc.get("lo", WeightBounds().lo)
        hi = bounds_doc.get("hi", WeightBounds().hi)
        if len(lo) != 4 or len(hi) != 4:
            raise ScenarioError("weight_bounds lo/hi must have 4 entries")
        bounds = WeightBounds(tuple(float(v) for v in lo), tuple(float(v) for v in hi))

    sensor_doc = doc.get("sensor")
    if sensor_doc is None:
        sensor = SensorModel(0.1, 0.2, 5.0)
    else:
        _reject_unknown(sensor_doc, _SENSOR_FIELDS, "sensor")
        max_range = sensor_doc.get("max_range", 5.0)
        try:
            sensor = SensorModel(
                sigma0=float(sensor_doc.get("sigma0", 0.1)),
                sigma1=float(sensor_doc.get("sigma1", 0.2)),
                max_range=None if max_range is None else float(max_range),
            )
        except ValueError as exc:
            raise ScenarioError(f"sensor: {exc}") from exc

    cadence_action = int(doc.get("cadence_action", 2))
    cadence_task = int(doc.get("cadence_task", 10))
    if not 2 <= cadence_action <= 3:
        raise ScenarioError("cadence_action must be 2 or 3")
    if not 8 <= cadence_task <= 10:
        raise ScenarioError("cadence_task must be in [8, 10]")

    history_window = int(doc.get("history_window", 5))
    if history_window < 1:
        raise ScenarioError("history_window must be >= 1")

    model_class = doc.get("model_class", "base")
    if model_class not in ("base", "rich"):
        raise ScenarioError("model_class must be 'base' or 'rich'")

    process_noise = float(doc.get("process_noise", 0.01))
    target_noise_sigma = float(doc.get("target_noise_sigma", 0.0))
    safety_margin = float(doc.get("safety_margin", 0.2))
    initial_variance = float(doc.get("initial_variance", 1.0))
    if process_noise < 0 or target_noise_sigma < 0 or safety_margin < 0:
        raise ScenarioError("noise and margin parameters must be >= 0")
    if initial_variance <= 0:
        raise ScenarioError("initial_variance must be > 0")

    return Scenario(
        name=str(doc.get("name", name)),
        world=world,
        robots=robots,
        targets=targets,
        zones=zones,
        weights=weights,
        bounds=bounds,
        cadence_action=cadence_action,
        cadence_task=cadence_task,
        cadence_jitter=bool(doc.get("cadence_jitter", False)),
        history_window=history_window,
        sensor=sensor,
        process_noise=process_noise,
        target_noise_sigma=target_noise_sigma,
        safety_margin=safety_margin,
        model_class=model_class,
        initial_variance=initial_variance,
    )


def load_scenario(path: str | Path) -> Scenario:
    path = Path(path)
    try:
        doc = yaml.safe_load(path.read_text())
    except yaml.YAMLError as exc:
        raise ScenarioError(f"cannot parse {path}: {exc}") from exc
    return scenario_from_dict(doc, name=path.stem)
