"""Hierarchical query orchestration around the simulation stepper.

The stepper never blocks on a backend: completed exchanges land in a
single-consumer mailbox and are applied at the next step boundary, at most
one per role, newest wins. Instant backends (mock, faulty) execute inline at
issue time so runs stay bit-reproducible; the HTTP backend runs on a worker
thread and feeds the same mailbox.
"""

from __future__ import annotations

import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .allocation import Assignment, accept_assignment, parse_assignment, verify_assignment
from .backends import BackendResponse, BackendTransportError, LlmRequest
from .errors import FormatError
from .llm import (
    ACTION,
    TASK,
    PromptContext,
    WeightBounds,
    build_action_prompt,
    build_task_prompt,
    parse_weights,
    schedule,
    token_budget,
    verify_weights,
)
from .solver import WeightVector

__all__ = ["LlmExchange", "Mailbox", "CadencePlan", "LlmLoop"]

ACCEPTED = "accepted"
SKIPPED_FORMAT = "skipped_format"
SKIPPED_CONSTRAINT = "skipped_constraint"


@dataclass(frozen=True)
class LlmExchange:
    """Full record of one query: prompts, raw response, verdict, accounting.

    ``beta`` is the assignment constraint score for task-role responses that
    parsed (whatever the verdict); None for action-role or unparseable ones.
    """

    role: str
    issued_step: int
    system_prompt: str
    user_prompt: str
    response: str
    verdict: str
    reason: str
    tokens_prompt: int
    tokens_response: int
    latency: float
    max_tokens: int
    beta: float | None = None


@dataclass
class _MailboxItem:
    issued_step: int
    exchange: LlmExchange
    payload: object | None  # Assignment or weight array when accepted


class Mailbox:
    """Thread-safe slot per role; keeps only the newest pending result."""

    def __init__(self):
        self._lock = threading.Lock()
        self._slots: dict[str, _MailboxItem] = {}
        self._applied_step: dict[str, int] = {TASK: -1, ACTION: -1}

    def post(self, role: str, item: _MailboxItem) -> None:
        with self._lock:
            if item.issued_step <= self._applied_step[role]:
                return  # stale: an exchange issued later was already applied
            current = self._slots.get(role)
            if current is None or item.issued_step >= current.issued_step:
                self._slots[role] = item

    def take(self, role: str) -> _MailboxItem | None:
        with self._lock:
            item = self._slots.pop(role, None)
            if item is not None:
                self._applied_step[role] = item.issued_step
            return item


@dataclass
class CadencePlan:
    """Fixed-modulus cadence by default; optional seeded jitter in-range."""

    cadence_action: int = 2
    cadence_task: int = 10
    jitter: bool = False
    rng: np.random.Generator | None = None
    _next_due: dict[str, int] = field(default_factory=dict)

    def __post_init__(self):
        if not 2 <= self.cadence_action <= 3:
            raise ValueError("action cadence must be 2 or 3")
        if not 8 <= self.cadence_task <= 10:
            raise ValueError("task cadence must be in [8, 10]")
        if self.jitter and self.rng is None:
            raise ValueError("jittered cadence needs a seeded rng")
        if self.jitter:
            self._next_due = {
                ACTION: int(self.rng.integers(2, 4)),
                TASK: int(self.rng.integers(8, 11)),
            }

    def due(self, step: int) -> set[str]:
        if not self.jitter:
            return schedule(step, self.cadence_action, self.cadence_task)
        roles = set()
        if step >= self._next_due[ACTION]:
            roles.add(ACTION)
            self._next_due[ACTION] = step + int(self.rng.integers(2, 4))
        if step >= self._next_due[TASK]:
            roles.add(TASK)
            self._next_due[TASK] = step + int(self.rng.integers(8, 11))
        return roles


def _count_tokens(text: str) -> int:
    return len(text.split())


class LlmLoop:
    """Owns prompts, verification, incumbents, and the query lifecycle."""

    def __init__(
        self,
        ctx: PromptContext,
        backend,
        capacities: dict[int, int],
        bounds: WeightBounds,
        cadence: CadencePlan,
        initial_assignment: Assignment,
        initial_weights: WeightVector,
        model_class: str = "base",
        margin: float = 0.0,
    ):
        self.ctx = ctx
        self.backend = backend
        self.capacities = capacities
        self.bounds = bounds
        self.cadence = cadence
        self.assignment = initial_assignment
        self.weights = initial_weights
        self.margin = margin
        mean_capacity = sum(capacities.values()) / len(capacities)
        self.budget = token_budget(mean_capacity, model_class)
        self.mailbox = Mailbox()
        self.exchanges: list[LlmExchange] = []
        self._repair_note: dict[str, str | None] = {TASK: None, ACTION: None}
        self._executor: ThreadPoolExecutor | None = None
        self._exchange_lock = threading.Lock()

    # -- step-boundary hooks -------------------------------------------------

    def apply_pending(self, step: int) -> list[str]:
        """Adopt at most one accepted result per role. Returns roles applied."""
        applied = []
        item = self.mailbox.take(TASK)
        if item is not None and item.payload is not None:
            assignment: Assignment = item.payload
            self.assignment = Assignment(
                matrix=assignment.matrix,
                robot_ids=assignment.robot_ids,
                target_ids=assignment.target_ids,
                epoch=step,
            )
            applied.append(TASK)
        item = self.mailbox.take(ACTION)
        if item is not None and item.payload is not None:
            self.weights = WeightVector(*(float(v) for v in item.payload))
            applied.append(ACTION)
        return applied

    def issue_due_queries(self, step: int) -> list[str]:
        """Fire queries whose cadence is due. Returns roles issued."""
        roles = sorted(self.cadence.due(step))
        for role in roles:
            self.query(role, step)
        return roles

    # -- query lifecycle -----------------------------------------------------

    def query(self, role: str, step: int) -> None:
        if role == TASK:
            system, user = build_task_prompt(
                self.ctx, self.capacities, self._repair_note[TASK]
            )
        else:
            system, user = build_action_prompt(
                self.ctx, self.weights, self._repair_note[ACTION]
            )
        self._repair_note[role] = None
        request = LlmRequest(
            role=role,
            system=system,
            user=user,
            max_tokens=self.budget,
            snapshot=self.ctx.latest(),
            capacities=dict(self.capacities),
            cost_history=tuple(s.tracking_cost for s in self.ctx.history),
            bounds=self.bounds,
            margin=self.margin,
        )
        if getattr(self.backend, "instant", False):
            self._execute(request, step)
        else:
            if self._executor is None:
                self._executor = ThreadPoolExecutor(max_workers=2)
            self._executor.submit(self._execute, request, step)

    def _execute(self, request: LlmRequest, step: int) -> None:
        try:
            response = self.backend.complete(request)
        except BackendTransportError as exc:
            response = BackendResponse(text="")
            verdict, reason, payload, beta = SKIPPED_FORMAT, f"transport: {exc}", None, None
        else:
            verdict, reason, payload, beta = self._verify(request.role, response.text)
        exchange = LlmExchange(
            role=request.role,
            issued_step=step,
            system_prompt=request.system,
            user_prompt=request.user,
            response=response.text,
            verdict=verdict,
            reason=reason,
            tokens_prompt=response.tokens_prompt
            if response.tokens_prompt is not None
            else _count_tokens(request.system) + _count_tokens(request.user),
            tokens_response=response.tokens_response
            if response.tokens_response is not None
            else _count_tokens(response.text),
            latency=response.latency,
            max_tokens=request.max_tokens,
            beta=beta,
        )
        with self._exchange_lock:
            self.exchanges.append(exchange)
        if verdict != ACCEPTED:
            note = f"Note: your previous output was skipped ({reason}). Reply strictly in the required format."
            self._repair_note[request.role] = note[:200]
        self.mailbox.post(request.role, _MailboxItem(step, exchange, payload))

    def _verify(self, role: str, text: str) -> tuple[str, str, object | None, float | None]:
        if role == TASK:
            snap = self.ctx.latest()
            robot_ids = [r.id for r in snap.robots]
            target_ids = [b.target_id for b in snap.beliefs]
            try:
                assignment = parse_assignment(text, robot_ids, target_ids)
            except FormatError as exc:
                return SKIPPED_FORMAT, str(exc), None, None
            capacities = np.array([self.capacities[rid] for rid in robot_ids])
            beta = verify_assignment(assignment, capacities)
            ok, reason = accept_assignment(assignment, capacities)
            if not ok:
                return SKIPPED_CONSTRAINT, reason, None, beta
            return ACCEPTED, "", assignment, beta
        try:
            weights = parse_weights(text)
        except FormatError as exc:
            return SKIPPED_FORMAT, str(exc), None, None
        ok, reason = verify_weights(weights, self.bounds)
        if not ok:
            return SKIPPED_CONSTRAINT, reason, None, None
        return ACCEPTED, "", weights, None

    # -- accounting ----------------------------------------------------------

    def success_rate(self, role: str) -> float:
        relevant = [e for e in self.exchanges if e.role == role]
        if not relevant:
            return 1.0
        return sum(1 for e in relevant if e.verdict == ACCEPTED) / len(relevant)

    def shutdown(self) -> None:
        if self._executor is not None:
            self._executor.shutdown(wait=False)
            self._executor = None
