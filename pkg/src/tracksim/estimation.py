"""Per-target Kalman filtering and centralized team fusion.

The measurement model is position-only and linear with isotropic,
distance-dependent noise, so the filter is exactly linear and every test
oracle can be computed in closed form. Fusion is centralized: measurements
from comm-attacked robots are dropped, not deferred.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import NumericalDegeneracyError
from .world import RobotState

__all__ = [
    "TargetBelief",
    "SensorModel",
    "Measurement",
    "kf_predict",
    "measurement_noise",
    "kf_update",
    "fuse_team",
    "tracking_cost",
    "predicted_posterior_trace",
]

# Position-only observation of the (px, py, vx, vy) state.
_H = np.array([[1.0, 0.0, 0.0, 0.0], [0.0, 1.0, 0.0, 0.0]])


@dataclass
class TargetBelief:
    """Constant-velocity belief over one target: 4-vector mean, 4x4 SPD covariance."""

    target_id: int
    mean: np.ndarray
    covariance: np.ndarray

    def __post_init__(self):
        self.mean = np.asarray(self.mean, dtype=float).reshape(4)
        self.covariance = np.asarray(self.covariance, dtype=float).reshape(4, 4)

    @property
    def trace(self) -> float:
        return float(np.trace(self.covariance))

    def position(self) -> np.ndarray:
        return self.mean[:2].copy()

    def copy(self) -> "TargetBelief":
        return replace(self, mean=self.mean.copy(), covariance=self.covariance.copy())


@dataclass(frozen=True)
class SensorModel:
    """Isotropic position sensor with a distance-proportional noise slope."""

    sigma0: float
    sigma1: float
    max_range: float | None = None

    def __post_init__(self):
        if self.sigma0 <= 0:
            raise ValueError("sigma0 must be > 0")
        if self.sigma1 < 0:
            raise ValueError("sigma1 must be >= 0")


@dataclass(frozen=True)
class Measurement:
    """One position fix of a target by a robot, with its noise covariance."""

    robot_id: int
    target_id: int
    z: tuple[float, float]
    noise: tuple[tuple[float, float], tuple[float, float]]

    def noise_matrix(self) -> np.ndarray:
        return np.asarray(self.noise, dtype=float)


def transition_matrix(dt: float) -> np.ndarray:
    f = np.eye(4)
    f[0, 2] = dt
    f[1, 3] = dt
    return f


def process_noise_matrix(dt: float, q: float) -> np.ndarray:
    """White-acceleration process noise for the constant-velocity model."""
    d3 = dt**3 / 3.0
    d2 = dt**2 / 2.0
    return q * np.array(
        [
            [d3, 0.0, d2, 0.0],
            [0.0, d3, 0.0, d2],
            [d2, 0.0, dt, 0.0],
            [0.0, d2, 0.0, dt],
        ]
    )


def kf_predict(belief: TargetBelief, dt: float, q: float) -> TargetBelief:
    """Constant-velocity predict: mean <- F mean, P <- F P F^T + Q."""
    if dt == 0.0:
        return belief.copy()
    f = transition_matrix(dt)
    mean = f @ belief.mean
    cov = f @ belief.covariance @ f.T + process_noise_matrix(dt, q)
    return TargetBelief(belief.target_id, mean, cov)


def measurement_noise(distance: float, s: SensorModel) -> np.ndarray:
    """R(d) = (sigma0^2 + sigma1^2 d^2) I, strictly increasing in d."""
    var = s.sigma0**2 + (s.sigma1 * distance) ** 2
    return var * np.eye(2)


def kf_update(belief: TargetBelief, z: np.ndarray, noise: np.ndarray) -> TargetBelief:
    """Joseph-form position update; never increases the covariance trace."""
    z = np.asarray(z, dtype=float).reshape(2)
    noise = np.asarray(noise, dtype=float).reshape(2, 2)
    p = belief.covariance
    s = _H @ p @ _H.T + noise
    try:
        k = np.linalg.solve(s.T, (_H @ p.T)).T  # K = P H^T S^-1
    except np.linalg.LinAlgError as exc:
        raise NumericalDegeneracyError(
            f"innovation covariance not invertible for target {belief.target_id}"
        ) from exc
    if not np.all(np.isfinite(k)):
        raise NumericalDegeneracyError(
            f"non-finite Kalman gain for target {belief.target_id}"
        )
    mean = belief.mean + k @ (z - _H @ belief.mean)
    ikh = np.eye(4) - k @ _H
    cov = ikh @ p @ ikh.T + k @ noise @ k.T
    return TargetBelief(belief.target_id, mean, cov)


def fuse_team(
    beliefs: dict[int, TargetBelief],
    measurements: list[Measurement],
    robots: list[RobotState],
    step: int,
) -> dict[int, TargetBelief]:
    """Sequentially fold measurements into the central beliefs.

    Only measurements from robots that are neither sensing- nor comm-attacked
    at ``step`` are applied, in ascending (robot id, target id) order so the
    result is reproducible bit for bit.
    """
    status = {r.id: r for r in robots}
    out = {tid: b.copy() for tid, b in beliefs.items()}
    for m in sorted(measurements, key=lambda m: (m.robot_id, m.target_id)):
        robot = status.get(m.robot_id)
        if robot is None:
            continue
        if robot.sensing_attacked(step) or robot.comm_attacked(step):
            continue
        if m.target_id in out:
            out[m.target_id] = kf_update(out[m.target_id], np.asarray(m.z), m.noise_matrix())
    return out


def tracking_cost(beliefs: dict[int, TargetBelief]) -> float:
    """Sum of covariance traces over all targets: the tracking error measure."""
    return float(sum(b.trace for b in beliefs.values()))


def predicted_posterior_trace(
    belief: TargetBelief,
    robot_next_position: np.ndarray,
    s: SensorModel,
    dt: float,
    q: float,
) -> float:
    """Posterior covariance trace if the robot observes from ``robot_next_position``.

    Predicts the belief one step ahead, then applies a position update with
    noise evaluated at the robot-to-predicted-mean distance. Out-of-range
    robots contribute no update, so the predict-only trace is returned.
    """
    pred = kf_predict(belief, dt, q)
    target_pos = pred.mean[:2]
    d = math.hypot(
        float(robot_next_position[0]) - target_pos[0],
        float(robot_next_position[1]) - target_pos[1],
    )
    if s.max_range is not None and d > s.max_range:
        return pred.trace
    post = kf_update(pred, target_pos, measurement_noise(d, s))
    return post.trace
