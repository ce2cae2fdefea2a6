"""LLM backends: deterministic mock, fault-injecting wrapper, and HTTP client.

The mock encodes the qualitative behaviors a well-prompted model exhibits on
this problem (safety weights rise near zones, tracking weight rises when the
error grows or the supervisor complains about it), so end-to-end experiments
run offline and reproducibly.
"""

from __future__ import annotations

import json
import os
import time
from dataclasses import dataclass

import numpy as np

from .allocation import greedy_assign, render_assignment
from .llm import ACTION, HUMAN_INPUT_PREFIX, TASK, Snapshot, WeightBounds

__all__ = [
    "LlmRequest",
    "BackendResponse",
    "BackendTransportError",
    "MockBackend",
    "FaultyBackend",
    "HttpBackend",
    "make_backend",
]


@dataclass(frozen=True)
class LlmRequest:
    """One single-shot query, carrying both the text and the structured state.

    The HTTP backend only looks at the text fields; the mock reads the
    structured ones so it can answer like an informed model would.
    """

    role: str
    system: str
    user: str
    max_tokens: int
    snapshot: Snapshot
    capacities: dict[int, int]
    cost_history: tuple[float, ...]
    bounds: WeightBounds
    margin: float = 0.0


@dataclass(frozen=True)
class BackendResponse:
    text: str
    latency: float = 0.0
    tokens_prompt: int | None = None
    tokens_response: int | None = None


class BackendTransportError(Exception):
    """Backend was unreachable or timed out; the run continues without it."""


def _supervisor_suffix(user_prompt: str) -> str:
    idx = user_prompt.find(HUMAN_INPUT_PREFIX)
    if idx < 0:
        return ""
    return user_prompt[idx + len(HUMAN_INPUT_PREFIX):]


class MockBackend:
    """Deterministic stand-in for a chat model at temperature 0."""

    instant = True

    def complete(self, request: LlmRequest) -> BackendResponse:
        if request.role == TASK:
            return BackendResponse(text=self._task_response(request))
        if request.role == ACTION:
            return BackendResponse(text=self._action_response(request))
        raise ValueError(f"unknown role {request.role!r}")

    def _task_response(self, request: LlmRequest) -> str:
        snap = request.snapshot
        traces = {b.target_id: b.trace for b in snap.beliefs}
        positions = {b.target_id: (b.mean[0], b.mean[1]) for b in snap.beliefs}
        robot_positions = {r.id: r.position for r in snap.robots}
        assignment = greedy_assign(traces, positions, robot_positions, request.capacities)
        return render_assignment(assignment)

    def _action_response(self, request: LlmRequest) -> str:
        snap = request.snapshot
        w = list(snap.weights.as_tuple())
        inside_zone = False
        for robot in snap.robots:
            for zone in snap.zones:
                dx = robot.position[0] - zone.center[0]
                dy = robot.position[1] - zone.center[1]
                r = zone.radius + request.margin
                if dx * dx + dy * dy < r * r:
                    inside_zone = True
                    break
            if inside_zone:
                break
        costs = request.cost_history
        # "rose over the window" is debounced: the latest cost must top every
        # earlier one, so measurement jitter alone does not trigger a boost.
        cost_rose = len(costs) >= 2 and costs[-1] > max(costs[:-1])
        if inside_zone:
            w[2] *= 1.5
            w[3] *= 1.5
        if cost_rose:
            w[0] *= 1.5
        if not inside_zone and not cost_rose:
            w = [1.0 + 0.9 * (v - 1.0) for v in w]
        suffix = _supervisor_suffix(request.user).lower()
        if "track" in suffix or "trace" in suffix:
            w[0] *= 1.5
        w = request.bounds.clip(w)
        return "[" + ", ".join(f"{v:.4f}" for v in w) + "]"


_CORRUPTION_KINDS = ("truncated", "wrong_length", "prose")


class FaultyBackend:
    """Wraps the mock; corrupts a seeded fraction of responses.

    Corruption kinds cycle deterministically (truncation, a wrong-length
    list, pure prose), each of which fails the downstream parser or verifier.
    """

    instant = True

    def __init__(self, fault_rate: float, seed: int = 0):
        if not 0.0 <= fault_rate <= 1.0:
            raise ValueError("fault rate must be in [0, 1]")
        self.fault_rate = fault_rate
        self._rng = np.random.default_rng(seed)
        self._kind_index = 0
        self._inner = MockBackend()

    def complete(self, request: LlmRequest) -> BackendResponse:
        response = self._inner.complete(request)
        if self._rng.random() >= self.fault_rate:
            return response
        kind = _CORRUPTION_KINDS[self._kind_index % len(_CORRUPTION_KINDS)]
        self._kind_index += 1
        if kind == "truncated":
            text = response.text[: len(response.text) // 2]
        elif kind == "wrong_length":
            text = "[1.0, 2.0, 3.0]"
        else:
            text = "I think the robots are doing fine as they are."
        return BackendResponse(text=text)


class HttpBackend:
    """OpenAI-compatible chat-completions client, configured via environment.

    TRACKSIM_LLM_BASE_URL, TRACKSIM_LLM_MODEL, and TRACKSIM_LLM_API_KEY select
    the endpoint. Requests always use temperature 0 and the caller's token
    budget. Never exercised by the test suite.
    """

    instant = False

    def __init__(self, timeout: float = 10.0):
        self.base_url = os.environ.get("TRACKSIM_LLM_BASE_URL", "").rstrip("/")
        self.model = os.environ.get("TRACKSIM_LLM_MODEL", "")
        self.api_key = os.environ.get("TRACKSIM_LLM_API_KEY", "")
        self.timeout = timeout
        if not self.base_url or not self.model:
            raise ValueError(
                "http backend requires TRACKSIM_LLM_BASE_URL and TRACKSIM_LLM_MODEL"
            )

    def complete(self, request: LlmRequest) -> BackendResponse:
        import requests

        payload = {
            "model": self.model,
            "messages": [
                {"role": "system", "content": request.system},
                {"role": "user", "content": request.user},
            ],
            "temperature": 0,
            "max_tokens": request.max_tokens,
        }
        headers = {"Content-Type": "application/json"}
        if self.api_key:
            headers["Authorization"] = f"Bearer {self.api_key}"
        started = time.monotonic()
        try:
            resp = requests.post(
                f"{self.base_url}/chat/completions",
                data=json.dumps(payload),
                headers=headers,
                timeout=self.timeout,
            )
            resp.raise_for_status()
            body = resp.json()
        except Exception as exc:
            raise BackendTransportError(str(exc)) from exc
        latency = time.monotonic() - started
        try:
            text = body["choices"][0]["message"]["content"]
        except (KeyError, IndexError, TypeError) as exc:
            raise BackendTransportError(f"malformed completion payload: {exc}") from exc
        usage = body.get("usage", {})
        return BackendResponse(
            text=text,
            latency=latency,
            tokens_prompt=usage.get("prompt_tokens"),
            tokens_response=usage.get("completion_tokens"),
        )


def make_backend(spec: str):
    """Build a backend from a CLI spec: 'mock', 'faulty:<p>[:<seed>]', or 'http'."""
    if spec == "mock":
        return MockBackend()
    if spec.startswith("faulty"):
        parts = spec.split(":")
        rate = float(parts[1]) if len(parts) > 1 else 0.3
        seed = int(parts[2]) if len(parts) > 2 else 0
        return FaultyBackend(rate, seed)
    if spec == "http":
        return HttpBackend()
    raise ValueError(f"unknown backend spec {spec!r}")
