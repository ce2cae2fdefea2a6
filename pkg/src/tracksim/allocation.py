"""Assignment matrices: constraint scoring, text parsing, greedy fallback.

The constraint score beta(A) sums per-robot capacity overruns and per-target
coverage gaps. When total capacity cannot cover every target, the acceptance
threshold relaxes to the best achievable score so reassignment never starves.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatchError, FormatError

__all__ = [
    "Assignment",
    "verify_assignment",
    "accept_assignment",
    "parse_assignment",
    "render_assignment",
    "greedy_assign",
]

_DRONE_RE = re.compile(r"\bdrone\s+(\d+)", re.IGNORECASE)
_TARGET_RE = re.compile(r"\btarget\s+(\d+)", re.IGNORECASE)


@dataclass(frozen=True)
class Assignment:
    """M x N binary matrix; entry (i, j) = 1 means robot i tracks target j.

    Rows/columns are ordered by ascending robot/target id; ``epoch`` records
    the step at which the assignment took effect.
    """

    matrix: tuple[tuple[int, ...], ...]
    robot_ids: tuple[int, ...]
    target_ids: tuple[int, ...]
    epoch: int = 0

    @classmethod
    def from_array(cls, a, robot_ids, target_ids, epoch: int = 0) -> "Assignment":
        arr = np.asarray(a, dtype=int)
        if arr.ndim != 2 or arr.shape != (len(robot_ids), len(target_ids)):
            raise DimensionMismatchError(
                f"matrix shape {arr.shape} does not match rosters "
                f"({len(robot_ids)} robots, {len(target_ids)} targets)"
            )
        if not np.isin(arr, (0, 1)).all():
            raise ValueError("assignment entries must be 0 or 1")
        return cls(
            matrix=tuple(tuple(int(v) for v in row) for row in arr),
            robot_ids=tuple(robot_ids),
            target_ids=tuple(target_ids),
            epoch=epoch,
        )

    def to_array(self) -> np.ndarray:
        return np.array(self.matrix, dtype=int).reshape(len(self.robot_ids), len(self.target_ids))

    def row_for(self, robot_id: int) -> tuple[int, ...]:
        return self.matrix[self.robot_ids.index(robot_id)]

    def targets_of(self, robot_id: int) -> list[int]:
        row = self.row_for(robot_id)
        return [tid for tid, v in zip(self.target_ids, row) if v]


def verify_assignment(a: Assignment, capacities: np.ndarray) -> float:
    """Constraint-violation score: capacity overruns plus uncovered targets."""
    mat = a.to_array()
    capacities = np.asarray(capacities, dtype=float)
    if capacities.shape != (len(a.robot_ids),):
        raise DimensionMismatchError(
            f"capacity vector length {capacities.shape} does not match {len(a.robot_ids)} robots"
        )
    over = np.maximum(0.0, mat.sum(axis=1) - capacities).sum()
    uncovered = np.maximum(0.0, 1.0 - mat.sum(axis=0)).sum()
    return float(over + uncovered)


def accept_assignment(a: Assignment, capacities: np.ndarray) -> tuple[bool, str]:
    """Accept iff beta(A) does not exceed the best achievable score.

    With enough total capacity the threshold is zero (the strict rule); with
    Sum(c) < N even a perfect allocator must leave N - Sum(c) targets
    uncovered, so that residual is tolerated.
    """
    beta = verify_assignment(a, capacities)
    slack = max(0.0, len(a.target_ids) - float(np.sum(capacities)))
    if beta <= slack:
        return True, ""
    return False, f"constraint score {beta:g} exceeds threshold {slack:g}"


def parse_assignment(
    text: str, robot_ids: list[int], target_ids: list[int]
) -> Assignment:
    """Extract per-line 'Drone <id> ... Target <id> ...' associations.

    Tolerates bullets, numbering, and surrounding prose. The first drone
    mention owns a line; every target mentioned on that line is assigned to
    it. A drone line may list zero targets. Ids outside the rosters or a
    roster drone without any line raise :class:`FormatError`.
    """
    robot_set = set(robot_ids)
    target_set = set(target_ids)
    rows: dict[int, set[int]] = {}
    for raw_line in text.splitlines():
        line = raw_line.strip()
        drone_match = _DRONE_RE.search(line)
        if not drone_match:
            continue
        drone_id = int(drone_match.group(1))
        if drone_id not in robot_set:
            raise FormatError(f"unknown drone id {drone_id}", raw_line)
        targets = set()
        for m in _TARGET_RE.finditer(line[drone_match.end():]):
            tid = int(m.group(1))
            if tid not in target_set:
                raise FormatError(f"unknown target id {tid}", raw_line)
            targets.add(tid)
        rows.setdefault(drone_id, set()).update(targets)
    missing = robot_set - rows.keys()
    if missing:
        raise FormatError(f"no assignment line for drone(s) {sorted(missing)}")
    mat = np.zeros((len(robot_ids), len(target_ids)), dtype=int)
    tindex = {tid: j for j, tid in enumerate(target_ids)}
    for i, rid in enumerate(robot_ids):
        for tid in rows[rid]:
            mat[i, tindex[tid]] = 1
    return Assignment.from_array(mat, robot_ids, target_ids)


def render_assignment(a: Assignment) -> str:
    """Render an assignment in the one-drone-per-line text format."""
    lines = []
    for rid in a.robot_ids:
        targets = a.targets_of(rid)
        if targets:
            listing = " and ".join(f"Target {tid}" for tid in targets)
            lines.append(f"Drone {rid} will track {listing}")
        else:
            lines.append(f"Drone {rid} will track no targets")
    return "\n".join(lines)


def greedy_assign(
    belief_traces: dict[int, float],
    belief_positions: dict[int, tuple[float, float]],
    robot_positions: dict[int, tuple[float, float]],
    capacities: dict[int, int],
    epoch: int = 0,
) -> Assignment:
    """Deterministic fallback: urgent targets first, nearest robot with room.

    Targets are visited in descending belief-trace order (ties by ascending
    id) and handed to the closest robot with remaining capacity (ties by
    ascending id). The result always passes :func:`accept_assignment`.
    """
    robot_ids = sorted(robot_positions)
    target_ids = sorted(belief_traces)
    remaining = {rid: capacities[rid] for rid in robot_ids}
    mat = np.zeros((len(robot_ids), len(target_ids)), dtype=int)
    rindex = {rid: i for i, rid in enumerate(robot_ids)}
    tindex = {tid: j for j, tid in enumerate(target_ids)}
    order = sorted(target_ids, key=lambda tid: (-belief_traces[tid], tid))
    for tid in order:
        candidates = [rid for rid in robot_ids if remaining[rid] > 0]
        if not candidates:
            break
        tx, ty = belief_positions[tid]
        best = min(
            candidates,
            key=lambda rid: (
                (robot_positions[rid][0] - tx) ** 2 + (robot_positions[rid][1] - ty) ** 2,
                rid,
            ),
        )
        mat[rindex[best], tindex[tid]] = 1
        remaining[best] -= 1
    return Assignment.from_array(mat, robot_ids, target_ids, epoch=epoch)
