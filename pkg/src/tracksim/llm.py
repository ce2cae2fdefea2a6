"""Prompt construction, response parsing, verification gates, and cadence.

Prompts are rendered deterministically: snapshots oldest-first, ids
ascending, every number fixed to two decimals. Identical contexts produce
byte-identical prompts, which is what makes whole-run logs hashable.
"""

from __future__ import annotations

import re
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .allocation import Assignment
from .errors import FormatError
from .solver import WeightVector

__all__ = [
    "TASK",
    "ACTION",
    "Snapshot",
    "SnapshotRobot",
    "SnapshotBelief",
    "SnapshotZone",
    "SnapshotAttack",
    "PromptContext",
    "WeightBounds",
    "build_task_prompt",
    "build_action_prompt",
    "parse_weights",
    "verify_weights",
    "token_budget",
    "schedule",
]

TASK = "task"
ACTION = "action"

TASK_SYSTEM_PROMPT = "You are an optimizer with the goal of assigning robots to track targets."
ACTION_SYSTEM_PROMPT = (
    "You are a multiple objective optimizer with the goal of specifying the weights "
    "of each objective function."
)
HUMAN_INPUT_PREFIX = "In addition, the human supervisor has some input:"

OBJECTIVE_DESCRIPTIONS = (
    "tracking error computed by the trace of the estimation covariance matrix of the targets",
    "control cost computed by the norm of control input",
    "slack variables of safety constraints to avoid sensing danger zones",
    "slack variables of safety constraints to avoid communication danger zones",
)

HUMAN_CATEGORIES = ("performance", "risk", "abnormal")

REPAIR_NOTE_MAX_CHARS = 200

_NUMBER = r"[-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?"
_BRACKET_RE = re.compile(r"\[([^\[\]]*)\]")
_NUMBER_RUN_RE = re.compile(rf"{_NUMBER}(?:\s*,\s*{_NUMBER})+")


@dataclass(frozen=True)
class SnapshotRobot:
    id: int
    position: tuple[float, float]
    capacity: int
    sensing_attacked_until: int | None
    comm_attacked_until: int | None
    known_zones: tuple[int, ...]


@dataclass(frozen=True)
class SnapshotBelief:
    target_id: int
    mean: tuple[float, float, float, float]
    trace: float


@dataclass(frozen=True)
class SnapshotZone:
    id: int
    kind: str
    center: tuple[float, float]
    radius: float


@dataclass(frozen=True)
class SnapshotAttack:
    robot_id: int
    zone_id: int
    kind: str
    until: int


@dataclass(frozen=True)
class Snapshot:
    """Immutable view of one completed step, as the LLMs get to see it."""

    step: int
    robots: tuple[SnapshotRobot, ...]
    beliefs: tuple[SnapshotBelief, ...]
    zones: tuple[SnapshotZone, ...]
    attacks: tuple[SnapshotAttack, ...]
    assignment: Assignment
    weights: WeightVector
    tracking_cost: float


@dataclass
class PromptContext:
    """Ring buffer of recent snapshots plus pending supervisor inputs.

    Each human input is delivered to the next built prompt of each role
    independently, then dropped: one appearance per role, never more.
    """

    window: int = 5
    history: deque[Snapshot] = field(default_factory=deque)
    _pending: dict[str, list[tuple[str, str]]] = field(
        default_factory=lambda: {TASK: [], ACTION: []}
    )

    def __post_init__(self):
        self.history = deque(self.history, maxlen=self.window)

    def push(self, snapshot: Snapshot) -> None:
        if self.history and snapshot.step <= self.history[-1].step:
            raise ValueError("snapshot steps must be strictly increasing")
        self.history.append(snapshot)

    def latest(self) -> Snapshot:
        if not self.history:
            raise ValueError("empty history")
        return self.history[-1]

    def ingest_human(self, category: str, text: str) -> None:
        if category not in HUMAN_CATEGORIES:
            raise ValueError(f"unknown category {category!r}")
        if not text.strip():
            raise ValueError("empty supervisor input")
        for role in (TASK, ACTION):
            self._pending[role].append((category, text.strip()))

    def pending(self, role: str) -> list[tuple[str, str]]:
        return list(self._pending[role])

    def drain(self, role: str) -> list[tuple[str, str]]:
        out = self._pending[role]
        self._pending[role] = []
        return out


def _fmt(x: float) -> str:
    return f"{x:.2f}"


def _fmt_point(p: tuple[float, float]) -> str:
    return f"({_fmt(p[0])}, {_fmt(p[1])})"


def _render_snapshot_body(snap: Snapshot) -> str:
    parts = []
    drones = "; ".join(
        f"Drone {r.id} is at {_fmt_point(r.position)}" for r in snap.robots
    )
    parts.append(f"Drones are currently at the following positions: {drones}.")
    targets = "; ".join(
        f"Target {b.target_id} is at {_fmt_point((b.mean[0], b.mean[1]))} "
        f"with estimation trace {_fmt(b.trace)}"
        for b in snap.beliefs
    )
    parts.append(f"Targets are currently at the following positions: {targets}.")
    zones_by_id = {z.id: z for z in snap.zones}
    for kind, label in (("sensing", "sensor"), ("communication", "communication")):
        known = []
        for r in snap.robots:
            for zid in r.known_zones:
                z = zones_by_id.get(zid)
                if z is not None and z.kind == kind:
                    known.append(
                        f"Drone {r.id} knows the {label} zone {z.id} located at "
                        f"{_fmt_point(z.center)} with radius {_fmt(z.radius)}"
                    )
        if known:
            parts.append(f"The known {kind} zones are: " + "; ".join(known) + ".")
    if snap.attacks:
        attacks = "; ".join(
            f"Drone {a.robot_id} is under {a.kind} attack from zone {a.zone_id} "
            f"until step {a.until}"
            for a in snap.attacks
        )
        parts.append(attacks + ".")
    else:
        parts.append("No attack has been detected.")
    rows = []
    for rid in snap.assignment.robot_ids:
        tids = snap.assignment.targets_of(rid)
        if tids:
            rows.append(f"Drone {rid} tracks " + " and ".join(f"Target {t}" for t in tids))
        else:
            rows.append(f"Drone {rid} tracks no targets")
    parts.append("The current assignment is: " + "; ".join(rows) + ".")
    parts.append(
        "The last trace of the tracking estimation covariances matrix is "
        f"{_fmt(snap.tracking_cost)}."
    )
    return " ".join(parts)


def _render_human_suffix(inputs: list[tuple[str, str]]) -> str:
    if not inputs:
        return ""
    joined = " ".join(text for _, text in inputs)
    return f"{HUMAN_INPUT_PREFIX} {joined}"


def _capacity_phrase(capacities: list[int]) -> str:
    if len(set(capacities)) == 1:
        return str(capacities[0])
    return ", ".join(str(c) for c in capacities)


def build_task_prompt(
    ctx: PromptContext,
    capacities: dict[int, int],
    repair_note: str | None = None,
) -> tuple[str, str]:
    """Assemble the reassignment prompt from the full history window."""
    if not ctx.history:
        raise ValueError("cannot build a task prompt from an empty history")
    snaps = list(ctx.history)
    lines = [
        f"The recent {len(snaps)} results of status and observations are as follows."
    ]
    for i, snap in enumerate(snaps, start=1):
        lines.append(f"The {i}th information is as follows. " + _render_snapshot_body(snap))
    caps = [capacities[rid] for rid in sorted(capacities)]
    lines.append(
        f"Each drone has the ability to track at most {_capacity_phrase(caps)} targets, "
        "and each target should be tracked by at least one drone as possible. "
        "Please provide the new tracking assignment for each drone in each line with "
        "'Drone [ID] will track Target [ID]'."
    )
    suffix = _render_human_suffix(ctx.drain(TASK))
    if suffix:
        lines.append(suffix)
    if repair_note:
        lines.append(repair_note[:REPAIR_NOTE_MAX_CHARS])
    return TASK_SYSTEM_PROMPT, "\n".join(lines)


def build_action_prompt(
    ctx: PromptContext,
    weights: WeightVector,
    repair_note: str | None = None,
) -> tuple[str, str]:
    """Assemble the weight-tuning prompt from the latest snapshot only."""
    if not ctx.history:
        raise ValueError("cannot build an action prompt from an empty history")
    snap = ctx.latest()
    lines = ["The current status is as follows. " + _render_snapshot_body(snap)]
    lines.append("The objective functions are:")
    for i, desc in enumerate(OBJECTIVE_DESCRIPTIONS, start=1):
        lines.append(f"{i}. {desc}")
    w = ", ".join(_fmt(v) for v in weights.as_tuple())
    lines.append(
        f"The current weights for objective functions are: [{w}]. "
        "You should give a new weight as a list with a length of 4."
    )
    suffix = _render_human_suffix(ctx.drain(ACTION))
    if suffix:
        lines.append(suffix)
    if repair_note:
        lines.append(repair_note[:REPAIR_NOTE_MAX_CHARS])
    return ACTION_SYSTEM_PROMPT, "\n".join(lines)


def parse_weights(text: str) -> np.ndarray:
    """Extract the first bracketed or bare comma-separated numeric list.

    The first candidate list found must have exactly four entries; anything
    else raises :class:`FormatError`.
    """
    for m in _BRACKET_RE.finditer(text):
        items = [s.strip() for s in m.group(1).split(",")]
        try:
            values = [float(s) for s in items]
        except ValueError:
            continue
        if len(values) != 4:
            raise FormatError(f"expected a list of length 4, got {len(values)}", m.group(0))
        return np.array(values)
    m = _NUMBER_RUN_RE.search(text)
    if m:
        values = [float(s) for s in m.group(0).split(",")]
        if len(values) != 4:
            raise FormatError(f"expected a list of length 4, got {len(values)}", m.group(0))
        return np.array(values)
    raise FormatError("no numeric weight list found")


@dataclass(frozen=True)
class WeightBounds:
    """Empirical per-weight acceptance bounds for LLM-proposed weights."""

    lo: tuple[float, float, float, float] = (0.1, 0.01, 0.1, 0.1)
    hi: tuple[float, float, float, float] = (50.0, 10.0, 100.0, 100.0)

    def __post_init__(self):
        if any(l > h for l, h in zip(self.lo, self.hi)):
            raise ValueError("lower bound exceeds upper bound")

    def clip(self, values) -> np.ndarray:
        return np.clip(np.asarray(values, dtype=float), self.lo, self.hi)


def verify_weights(w, bounds: WeightBounds) -> tuple[bool, str]:
    """Accept iff every weight sits inside its configured bound."""
    w = np.asarray(w, dtype=float)
    for i, (value, lo, hi) in enumerate(zip(w, bounds.lo, bounds.hi), start=1):
        if value < lo:
            return False, f"w{i}={value:g} below lower bound {lo:g}"
        if value > hi:
            return False, f"w{i}={value:g} above upper bound {hi:g}"
    return True, ""


def token_budget(mean_capacity: float, model_class: str = "base") -> int:
    """Response-token allowance: 50*(mean capacity + 2), plus 200 for rich models."""
    if mean_capacity < 1:
        raise ValueError("mean capacity must be >= 1")
    base = round(50.0 * (mean_capacity + 2.0))
    if model_class == "base":
        return base
    if model_class == "rich":
        return base + 200
    raise ValueError(f"unknown model class {model_class!r}")


def schedule(step: int, cadence_action: int, cadence_task: int) -> set[str]:
    """Roles due at this step under fixed-modulus cadence. Step 0 fires none."""
    if step == 0:
        return set()
    due = set()
    if step % cadence_action == 0:
        due.add(ACTION)
    if step % cadence_task == 0:
        due.add(TASK)
    return due
