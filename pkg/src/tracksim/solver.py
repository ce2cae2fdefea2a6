"""One-step control solver: weighted tracking + energy + zone-slack objective.

Slack variables appear only inside norm penalties, so their optimum is the
positive part of the constraint body and they are eliminated analytically.
What remains is a smooth problem over the control ball, solved by projected
gradient descent with central-difference gradients and Armijo backtracking.

The tracking term is evaluated through a scalar fast path (2x2 closed-form
algebra on precomputed predicted covariances); it matches the estimation
module's predict+update composition to floating-point accuracy and is pinned
against it in the tests.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import SolverNumericsError
from .estimation import SensorModel, TargetBelief, kf_predict
from .world import COMMUNICATION, SENSING, DangerZone, RobotState, WorldConfig, zone_excess

__all__ = ["WeightVector", "SolveReport", "eliminate_slacks", "objective", "solve_step"]

MAX_ITERATIONS = 50
CONVERGENCE_TOL = 1e-8
ARMIJO_C = 1e-4
MAX_BACKTRACKS = 40


@dataclass(frozen=True)
class WeightVector:
    """Objective priorities: tracking, control effort, sensing slack, comm slack.

    Construction only forbids negatives; zero weights are legal for isolating
    single terms. Weights that enter a live run additionally pass the
    strictly-positive empirical bounds of the verification gate.
    """

    w1: float
    w2: float
    w3: float
    w4: float

    def __post_init__(self):
        for name, value in self.as_dict().items():
            if value < 0:
                raise ValueError(f"weight {name} must be non-negative, got {value}")

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.w1, self.w2, self.w3, self.w4)

    def as_dict(self) -> dict[str, float]:
        return {"w1": self.w1, "w2": self.w2, "w3": self.w3, "w4": self.w4}

    def scaled(self, factor: float) -> "WeightVector":
        return WeightVector(*(w * factor for w in self.as_tuple()))


@dataclass(frozen=True)
class SolveReport:
    """Outcome of one per-robot solve."""

    control: tuple[float, float]
    objective_value: float
    objective_at_zero: float
    iterations: int
    slacks_sensing: tuple[float, ...]
    slacks_comm: tuple[float, ...]


def eliminate_slacks(
    next_position: np.ndarray, zones_of_kind: list[DangerZone], margin: float
) -> np.ndarray:
    """Optimal slack per zone: the positive part of the constraint body.

    Exact because slacks enter the objective only through a norm penalty,
    which is minimized by the smallest feasible slack max(0, G).
    """
    ordered = sorted(zones_of_kind, key=lambda z: z.id)
    return np.array([max(0.0, zone_excess(next_position, z, margin)) for z in ordered])


class _TargetTerm:
    """Scalar precomputation for one assigned target's posterior-trace term."""

    __slots__ = ("mx", "my", "trace_pred", "a00", "a01", "a11", "c00", "c01", "c11")

    def __init__(self, belief: TargetBelief, dt: float, q: float):
        pred = kf_predict(belief, dt, q)
        p = pred.covariance
        self.mx = float(pred.mean[0])
        self.my = float(pred.mean[1])
        self.trace_pred = pred.trace
        # A = H P H^T and C = (P H^T)^T (P H^T), both 2x2 symmetric.
        self.a00 = float(p[0, 0])
        self.a01 = float(p[0, 1])
        self.a11 = float(p[1, 1])
        b = p[:, :2]
        c = b.T @ b
        self.c00 = float(c[0, 0])
        self.c01 = float(c[0, 1])
        self.c11 = float(c[1, 1])

    def posterior_trace(self, x: float, y: float, sensor: SensorModel) -> float:
        dx = x - self.mx
        dy = y - self.my
        d2 = dx * dx + dy * dy
        if sensor.max_range is not None and d2 > sensor.max_range * sensor.max_range:
            return self.trace_pred
        r = sensor.sigma0 * sensor.sigma0 + sensor.sigma1 * sensor.sigma1 * d2
        s00 = self.a00 + r
        s11 = self.a11 + r
        det = s00 * s11 - self.a01 * self.a01
        # trace(S^-1 C) with S^-1 expanded via the 2x2 adjugate.
        reduction = (s11 * self.c00 - 2.0 * self.a01 * self.c01 + s00 * self.c11) / det
        return self.trace_pred - reduction


class _SolveContext:
    """Everything needed to evaluate the objective for one robot-step cheaply."""

    def __init__(
        self,
        robot: RobotState,
        assigned_beliefs: list[TargetBelief],
        zones: list[DangerZone],
        weights: WeightVector,
        sensor: SensorModel,
        cfg: WorldConfig,
        q: float,
        margin: float,
    ):
        self.px = float(robot.position[0])
        self.py = float(robot.position[1])
        self.dt = cfg.dt
        self.u_max = cfg.u_max
        self.ws = cfg.workspace
        self.sensor = sensor
        self.weights = weights
        self.targets = [_TargetTerm(b, cfg.dt, q) for b in assigned_beliefs]
        self.sensing = [
            (z.center[0], z.center[1], (z.radius + margin) ** 2)
            for z in sorted(zones, key=lambda z: z.id)
            if z.kind == SENSING
        ]
        self.comm = [
            (z.center[0], z.center[1], (z.radius + margin) ** 2)
            for z in sorted(zones, key=lambda z: z.id)
            if z.kind == COMMUNICATION
        ]

    def next_position(self, ux: float, uy: float) -> tuple[float, float]:
        x = self.px + ux * self.dt
        y = self.py + uy * self.dt
        x = self.ws.xmin if x < self.ws.xmin else (self.ws.xmax if x > self.ws.xmax else x)
        y = self.ws.ymin if y < self.ws.ymin else (self.ws.ymax if y > self.ws.ymax else y)
        return x, y

    def _slack_norms(self, x: float, y: float) -> tuple[float, float]:
        nu2 = 0.0
        for cx, cy, rr in self.sensing:
            g = rr - ((x - cx) ** 2 + (y - cy) ** 2)
            if g > 0.0:
                nu2 += g * g
        xi2 = 0.0
        for cx, cy, rr in self.comm:
            g = rr - ((x - cx) ** 2 + (y - cy) ** 2)
            if g > 0.0:
                xi2 += g * g
        return math.sqrt(nu2), math.sqrt(xi2)

    def terms(self, ux: float, uy: float) -> tuple[float, float, float, float]:
        x, y = self.next_position(ux, uy)
        tracking = 0.0
        for t in self.targets:
            tracking += t.posterior_trace(x, y, self.sensor)
        nu, xi = self._slack_norms(x, y)
        return tracking, math.hypot(ux, uy), nu, xi

    def value(self, ux: float, uy: float) -> float:
        tracking, unorm, nu, xi = self.terms(ux, uy)
        w = self.weights
        return w.w1 * tracking + w.w2 * unorm + w.w3 * nu + w.w4 * xi

    def slacks(self, ux: float, uy: float) -> tuple[tuple[float, ...], tuple[float, ...]]:
        x, y = self.next_position(ux, uy)
        nu = tuple(max(0.0, rr - ((x - cx) ** 2 + (y - cy) ** 2)) for cx, cy, rr in self.sensing)
        xi = tuple(max(0.0, rr - ((x - cx) ** 2 + (y - cy) ** 2)) for cx, cy, rr in self.comm)
        return nu, xi


def objective(
    control: np.ndarray,
    robot: RobotState,
    assigned_beliefs: list[TargetBelief],
    zones: list[DangerZone],
    weights: WeightVector,
    sensor: SensorModel,
    cfg: WorldConfig,
    q: float = 0.0,
    margin: float = 0.0,
) -> float:
    """Weighted one-step objective at a candidate control."""
    ctx = _SolveContext(robot, assigned_beliefs, zones, weights, sensor, cfg, q, margin)
    return ctx.value(float(control[0]), float(control[1]))


def _project(ux: float, uy: float, u_max: float) -> tuple[float, float]:
    norm = math.hypot(ux, uy)
    if norm <= u_max or norm == 0.0:
        return ux, uy
    scale = u_max / norm
    return ux * scale, uy * scale


def _check_finite_start(ctx: _SolveContext, ux: float, uy: float) -> None:
    names = ("tracking", "control", "sensing slack", "comm slack")
    for name, term in zip(names, ctx.terms(ux, uy)):
        if not math.isfinite(term):
            raise SolverNumericsError(
                f"{name} term is non-finite at start control ({ux:g}, {uy:g})"
            )


def _descend(ctx: _SolveContext, start: tuple[float, float]) -> tuple[float, float, float, int]:
    """Projected gradient descent from one start. Returns (ux, uy, f, iterations)."""
    u_max = ctx.u_max
    h = 1e-6 * u_max
    ux, uy = _project(start[0], start[1], u_max)
    f = ctx.value(ux, uy)
    iterations = 0
    for _ in range(MAX_ITERATIONS):
        gx = (ctx.value(ux + h, uy) - ctx.value(ux - h, uy)) / (2.0 * h)
        gy = (ctx.value(ux, uy + h) - ctx.value(ux, uy - h)) / (2.0 * h)
        gnorm = math.hypot(gx, gy)
        if gnorm == 0.0:
            break
        # First trial displacement is u_max, so the iterate path is invariant
        # under a uniform scaling of all four weights.
        alpha = u_max / gnorm
        accepted = False
        for _ in range(MAX_BACKTRACKS):
            cx, cy = _project(ux - alpha * gx, uy - alpha * gy, u_max)
            fc = ctx.value(cx, cy)
            if fc <= f - ARMIJO_C * alpha * gnorm * gnorm:
                accepted = True
                break
            alpha *= 0.5
        if not accepted:
            break
        ux, uy, f = cx, cy, fc
        iterations += 1
        if alpha * gnorm < CONVERGENCE_TOL:
            break
    return ux, uy, f, iterations


def solve_step(
    robot: RobotState,
    assigned_beliefs: list[TargetBelief],
    zones: list[DangerZone],
    weights: WeightVector,
    sensor: SensorModel,
    cfg: WorldConfig,
    q: float = 0.0,
    margin: float = 0.0,
    prev_control: np.ndarray | None = None,
) -> SolveReport:
    """Pick the best control on the u_max ball for one robot and one step.

    Multi-start projected gradient descent: from zero, from the full-speed
    heading toward the nearest assigned predicted target mean, and from the
    previous step's control. The returned objective never exceeds the value
    at any start point; in particular zero control bounds it from above.
    """
    ctx = _SolveContext(robot, assigned_beliefs, zones, weights, sensor, cfg, q, margin)

    starts: list[tuple[float, float]] = [(0.0, 0.0)]
    if ctx.targets:
        nearest = min(
            ctx.targets, key=lambda t: (t.mx - ctx.px) ** 2 + (t.my - ctx.py) ** 2
        )
        dx = nearest.mx - ctx.px
        dy = nearest.my - ctx.py
        norm = math.hypot(dx, dy)
        if norm > 0.0:
            starts.append((cfg.u_max * dx / norm, cfg.u_max * dy / norm))
    if prev_control is not None:
        starts.append(_project(float(prev_control[0]), float(prev_control[1]), cfg.u_max))

    deduped: list[tuple[float, float]] = []
    for s in starts:
        if not any(math.hypot(s[0] - d[0], s[1] - d[1]) < 1e-12 for d in deduped):
            deduped.append(s)

    objective_at_zero = ctx.value(0.0, 0.0)
    best: tuple[float, float, float] | None = None
    total_iterations = 0
    for s in deduped:
        _check_finite_start(ctx, s[0], s[1])
        ux, uy, f, iters = _descend(ctx, s)
        total_iterations += iters
        if best is None or f < best[2]:
            best = (ux, uy, f)
    assert best is not None
    nu, xi = ctx.slacks(best[0], best[1])
    return SolveReport(
        control=(best[0], best[1]),
        objective_value=best[2],
        objective_at_zero=objective_at_zero,
        iterations=total_iterations,
        slacks_sensing=nu,
        slacks_comm=xi,
    )
