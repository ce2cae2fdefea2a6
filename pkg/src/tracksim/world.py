"""Ground-truth world: robot dynamics, target motion, danger zones, attacks.

Everything here is deterministic given the scenario seed. Randomness is
split into one stream per concern (attacks, target process noise,
measurement noise) so switching one feature on or off does not shift the
draws of another.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

__all__ = [
    "Workspace",
    "WorldConfig",
    "RobotState",
    "TargetTruth",
    "DangerZone",
    "AttackEvent",
    "World",
    "step_dynamics",
    "step_targets",
    "zone_excess",
    "sample_attacks",
    "split_rng_streams",
]

SENSING = "sensing"
COMMUNICATION = "communication"
ZONE_KINDS = (SENSING, COMMUNICATION)


@dataclass(frozen=True)
class Workspace:
    """Axis-aligned rectangle the robots and targets live in."""

    xmin: float
    ymin: float
    xmax: float
    ymax: float

    def __post_init__(self):
        if not (self.xmax > self.xmin and self.ymax > self.ymin):
            raise ValueError(f"degenerate workspace {self}")

    def clamp(self, p: np.ndarray) -> np.ndarray:
        return np.array(
            [
                min(max(float(p[0]), self.xmin), self.xmax),
                min(max(float(p[1]), self.ymin), self.ymax),
            ]
        )

    def contains(self, p: np.ndarray, tol: float = 0.0) -> bool:
        return (
            self.xmin - tol <= p[0] <= self.xmax + tol
            and self.ymin - tol <= p[1] <= self.ymax + tol
        )


@dataclass(frozen=True)
class WorldConfig:
    """Global world parameters: workspace box, step length, control bound, seed."""

    workspace: Workspace
    dt: float
    u_max: float
    rng_seed: int

    def __post_init__(self):
        if self.dt <= 0:
            raise ValueError("dt must be > 0")
        if self.u_max <= 0:
            raise ValueError("u_max must be > 0")


@dataclass
class RobotState:
    """One robot: pose, tracking capacity, and current attack status.

    `sensing_attacked_until` / `comm_attacked_until` hold the last step index
    (inclusive) at which the attack is still active, or None when healthy.
    """

    id: int
    position: np.ndarray
    capacity: int
    sensing_attacked_until: int | None = None
    comm_attacked_until: int | None = None
    known_zones: frozenset[int] = field(default_factory=frozenset)

    def __post_init__(self):
        self.position = np.asarray(self.position, dtype=float)
        if self.capacity < 1:
            raise ValueError(f"robot {self.id}: capacity must be >= 1")

    def sensing_attacked(self, step: int) -> bool:
        return self.sensing_attacked_until is not None and step <= self.sensing_attacked_until

    def comm_attacked(self, step: int) -> bool:
        return self.comm_attacked_until is not None and step <= self.comm_attacked_until

    def copy(self) -> "RobotState":
        return replace(self, position=self.position.copy())


@dataclass
class TargetTruth:
    """Ground-truth target state (the estimator never sees this directly)."""

    id: int
    position: np.ndarray
    velocity: np.ndarray

    def __post_init__(self):
        self.position = np.asarray(self.position, dtype=float)
        self.velocity = np.asarray(self.velocity, dtype=float)

    def copy(self) -> "TargetTruth":
        return replace(self, position=self.position.copy(), velocity=self.velocity.copy())


@dataclass(frozen=True)
class DangerZone:
    """Disk-shaped hazard that probabilistically attacks robots inside it."""

    id: int
    kind: str
    center: tuple[float, float]
    radius: float
    p_max: float
    attack_duration: int

    def __post_init__(self):
        if self.kind not in ZONE_KINDS:
            raise ValueError(f"zone {self.id}: kind must be one of {ZONE_KINDS}")
        if self.radius <= 0:
            raise ValueError(f"zone {self.id}: radius must be > 0")
        if not 0.0 <= self.p_max <= 1.0:
            raise ValueError(f"zone {self.id}: p_max must be in [0, 1]")
        if self.attack_duration < 1:
            raise ValueError(f"zone {self.id}: attack_duration must be >= 1")

    def distance(self, p: np.ndarray) -> float:
        return math.hypot(float(p[0]) - self.center[0], float(p[1]) - self.center[1])


@dataclass(frozen=True)
class AttackEvent:
    """Record of one attack starting: which robot, which zone, until when."""

    step: int
    robot_id: int
    zone_id: int
    kind: str
    until: int


def step_dynamics(state: RobotState, control: np.ndarray, cfg: WorldConfig) -> RobotState:
    """Advance one robot by a single-integrator step, clamped to the workspace.

    The caller is responsible for clamping ``control`` to the u_max ball.
    """
    control = np.asarray(control, dtype=float)
    new_pos = cfg.workspace.clamp(state.position + control * cfg.dt)
    out = state.copy()
    out.position = new_pos
    return out


def _reflect_axis(x: float, lo: float, hi: float) -> tuple[float, bool]:
    if x < lo:
        return 2.0 * lo - x, True
    if x > hi:
        return 2.0 * hi - x, True
    return x, False


def step_targets(
    targets: list[TargetTruth],
    cfg: WorldConfig,
    rng: np.random.Generator | None = None,
    noise_sigma: float = 0.0,
) -> list[TargetTruth]:
    """Constant-velocity target motion with boundary reflection.

    Optional zero-mean Gaussian process noise (``noise_sigma`` metres per
    step, drawn from ``rng``) perturbs the advanced position before the
    reflection check. Reflection flips the velocity sign on the crossed axis.
    """
    ws = cfg.workspace
    out = []
    for t in targets:
        pos = t.position + t.velocity * cfg.dt
        if noise_sigma > 0.0 and rng is not None:
            pos = pos + rng.normal(0.0, noise_sigma, size=2)
        vel = t.velocity.copy()
        x, rx = _reflect_axis(float(pos[0]), ws.xmin, ws.xmax)
        y, ry = _reflect_axis(float(pos[1]), ws.ymin, ws.ymax)
        if rx:
            vel[0] = -vel[0]
        if ry:
            vel[1] = -vel[1]
        new = t.copy()
        new.position = ws.clamp(np.array([x, y]))
        new.velocity = vel
        out.append(new)
    return out


def zone_excess(position: np.ndarray, zone: DangerZone, margin: float = 0.0) -> float:
    """Constraint body for one zone: (radius + margin)^2 - d^2.

    Positive inside the inflated disk, zero on its boundary, negative outside.
    """
    d = zone.distance(position)
    r = zone.radius + margin
    return r * r - d * d


def sample_attacks(
    robots: list[RobotState],
    zones: list[DangerZone],
    step: int,
    rng: np.random.Generator,
) -> list[AttackEvent]:
    """Sample attack starts for every robot x zone pair and clear expired ones.

    Exactly one uniform draw is consumed per (robot, zone) pair, iterated in
    ascending (robot id, zone id) order, so the stream position never depends
    on world state. A robot inside a zone of kind k, not already k-attacked,
    is attacked with probability p_max * (1 - d/radius); the attack lasts
    ``attack_duration`` steps. Robots mutate in place; events are returned.
    """
    events: list[AttackEvent] = []
    for robot in sorted(robots, key=lambda r: r.id):
        if robot.sensing_attacked_until is not None and step > robot.sensing_attacked_until:
            robot.sensing_attacked_until = None
        if robot.comm_attacked_until is not None and step > robot.comm_attacked_until:
            robot.comm_attacked_until = None
        for zone in sorted(zones, key=lambda z: z.id):
            u = rng.random()
            d = zone.distance(robot.position)
            if d >= zone.radius:
                continue
            if zone.kind == SENSING and robot.sensing_attacked(step):
                continue
            if zone.kind == COMMUNICATION and robot.comm_attacked(step):
                continue
            p = zone.p_max * (1.0 - d / zone.radius)
            if u < p:
                until = step + zone.attack_duration
                if zone.kind == SENSING:
                    robot.sensing_attacked_until = until
                else:
                    robot.comm_attacked_until = until
                events.append(AttackEvent(step, robot.id, zone.id, zone.kind, until))
    return events


def split_rng_streams(seed: int) -> dict[str, np.random.Generator]:
    """Derive the per-concern generators from the master seed."""
    ss = np.random.SeedSequence(seed)
    attack_ss, target_ss, meas_ss, aux_ss = ss.spawn(4)
    return {
        "attacks": np.random.default_rng(attack_ss),
        "targets": np.random.default_rng(target_ss),
        "measurements": np.random.default_rng(meas_ss),
        "aux": np.random.default_rng(aux_ss),
    }


class World:
    """Single-threaded ground-truth stepper.

    All mutation happens inside :meth:`step`. Anything handed outward
    (positions, attack status) is copied, so snapshots are safe to share.
    """

    def __init__(
        self,
        cfg: WorldConfig,
        robots: list[RobotState],
        targets: list[TargetTruth],
        zones: list[DangerZone],
        target_noise_sigma: float = 0.0,
    ):
        self.cfg = cfg
        self.robots = sorted((r.copy() for r in robots), key=lambda r: r.id)
        self.targets = sorted((t.copy() for t in targets), key=lambda t: t.id)
        self.zones = sorted(zones, key=lambda z: z.id)
        self.target_noise_sigma = target_noise_sigma
        self.step_index = 0
        streams = split_rng_streams(cfg.rng_seed)
        self._attack_rng = streams["attacks"]
        self._target_rng = streams["targets"]
        self.measurement_rng = streams["measurements"]

    def zones_of_kind(self, kind: str) -> list[DangerZone]:
        return [z for z in self.zones if z.kind == kind]

    def zones_known_to(self, robot: RobotState) -> list[DangerZone]:
        return [z for z in self.zones if z.id in robot.known_zones]

    def step(self, controls: dict[int, np.ndarray]) -> list[AttackEvent]:
        """Apply controls, move targets, sample attacks. Returns attack events."""
        self.step_index += 1
        for i, robot in enumerate(self.robots):
            u = controls.get(robot.id, np.zeros(2))
            self.robots[i] = step_dynamics(robot, u, self.cfg)
        self.targets = step_targets(
            self.targets, self.cfg, self._target_rng, self.target_noise_sigma
        )
        return sample_attacks(self.robots, self.zones, self.step_index, self._attack_rng)
