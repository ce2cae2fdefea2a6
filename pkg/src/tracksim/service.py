"""Real-time gateway: state frames out, supervisor input and control in.

The stepper thread owns the simulation; this layer only reads published
frame snapshots and feeds two queues (supervisor text, control commands)
that the runner drains at step boundaries. Readers can never mutate
simulation state directly.
"""

from __future__ import annotations

import threading
from contextlib import asynccontextmanager
from dataclasses import dataclass

import anyio
from fastapi import FastAPI, WebSocket, WebSocketDisconnect
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field

from .llm import HUMAN_CATEGORIES
from .runner import RunHooks, run_scenario
from .scenario import Scenario

__all__ = ["FrameHub", "RunHandle", "create_app", "build_service"]

MAX_SUPERVISOR_CHARS = 500


class FrameHub:
    """Latest-frame store with a condition variable for streaming readers."""

    def __init__(self):
        self._cond = threading.Condition()
        self._frame: dict | None = None
        self._closed = False

    def publish(self, frame: dict) -> None:
        with self._cond:
            self._frame = frame
            self._cond.notify_all()

    def close(self) -> None:
        with self._cond:
            self._closed = True
            self._cond.notify_all()

    @property
    def closed(self) -> bool:
        with self._cond:
            return self._closed

    def latest(self) -> dict | None:
        with self._cond:
            return self._frame

    def wait_newer(self, after_step: int, timeout: float = 0.25) -> dict | None:
        """Block briefly for a frame newer than ``after_step``; None on timeout.

        Streams that fall behind still see only the newest frame: coalescing
        is implicit because only the latest frame is retained.
        """
        with self._cond:
            if self._frame is not None and self._frame["step"] > after_step:
                return self._frame
            if self._closed:
                return None
            self._cond.wait(timeout)
            if self._frame is not None and self._frame["step"] > after_step:
                return self._frame
            return None


class _GatewayHooks(RunHooks):
    def __init__(self, handle: "RunHandle", pace: float):
        self.handle = handle
        self.pace = pace

    def on_step(self, frame: dict) -> None:
        frame["status"] = "running"
        self.handle.hub.publish(frame)

    def on_finish(self, frame: dict) -> None:
        self.handle.status = frame["status"]
        self.handle.hub.publish(frame)
        self.handle.hub.close()

    def control(self) -> str | None:
        cmd = self.handle.pop_command()
        if cmd == "pause":
            self.handle.status = "paused"
            paused = self.handle.hub.latest()
            if paused is not None and paused["status"] != "paused":
                paused = {**paused, "status": "paused"}
                self.handle.hub.publish(paused)
        elif cmd == "resume":
            self.handle.status = "running"
        elif cmd == "stop":
            self.handle.status = "stopping"
        return cmd

    def supervisor_inputs(self):
        return self.handle.drain_supervisor()


@dataclass
class _RunConfig:
    scenario: Scenario
    mode: str
    steps: int
    backend: object
    seed: int | None
    log_path: str | None
    human_script: dict | None
    pace: float


class RunHandle:
    """One live run: stepper thread, frame hub, and the two inbound queues."""

    def __init__(self, config: _RunConfig):
        self.config = config
        self.hub = FrameHub()
        self.status = "idle"
        self._lock = threading.Lock()
        self._commands: list[str] = []
        self._supervisor: list[tuple[str, str]] = []
        self._thread: threading.Thread | None = None
        self.error: str | None = None

    # -- queue side (any thread) ----------------------------------------

    def post_command(self, command: str) -> None:
        with self._lock:
            self._commands.append(command)

    def pop_command(self) -> str | None:
        with self._lock:
            return self._commands.pop(0) if self._commands else None

    def post_supervisor(self, category: str, text: str) -> int:
        with self._lock:
            self._supervisor.append((category, text))
        latest = self.hub.latest()
        return (latest["step"] if latest else 0) + 1

    def drain_supervisor(self) -> list[tuple[str, str]]:
        with self._lock:
            out, self._supervisor = self._supervisor, []
            return out

    # -- lifecycle --------------------------------------------------------

    def start(self) -> None:
        if self._thread is not None:
            return
        self.status = "running"
        hooks = _GatewayHooks(self, self.config.pace)

        def worker():
            try:
                run_scenario(
                    self.config.scenario,
                    self.config.mode,
                    steps=self.config.steps,
                    backend=self.config.backend,
                    seed=self.config.seed,
                    log_path=self.config.log_path,
                    human_script=self.config.human_script,
                    hooks=hooks,
                    pace=self.config.pace,
                )
            except Exception as exc:  # surfaced through /v1/state
                self.error = str(exc)
                self.status = "failed"
                self.hub.close()

        self._thread = threading.Thread(target=worker, name="tracksim-runner", daemon=True)
        self._thread.start()

    def stop(self, timeout: float = 10.0) -> None:
        self.post_command("stop")
        if self._thread is not None:
            self._thread.join(timeout)


class SupervisorBody(BaseModel):
    category: str
    text: str = Field(min_length=0, max_length=10_000)


class ControlBody(BaseModel):
    command: str


def create_app(handle: RunHandle) -> FastAPI:
    @asynccontextmanager
    async def lifespan(app: FastAPI):
        handle.start()
        yield
        handle.stop()

    app = FastAPI(title="tracksim gateway", lifespan=lifespan)

    @app.get("/v1/state")
    def state():
        frame = handle.hub.latest()
        if frame is None:
            return JSONResponse(
                {"detail": "no frame yet", "status": handle.status}, status_code=404
            )
        return {**frame, "status": handle.status if handle.status != "idle" else frame["status"]}

    @app.post("/v1/supervisor")
    def supervisor(body: SupervisorBody):
        text = body.text.strip()
        if body.category not in HUMAN_CATEGORIES:
            return JSONResponse(
                {"detail": f"category must be one of {list(HUMAN_CATEGORIES)}"},
                status_code=422,
            )
        if not text:
            return JSONResponse({"detail": "text must be non-empty"}, status_code=422)
        if len(text) > MAX_SUPERVISOR_CHARS:
            return JSONResponse(
                {"detail": f"text exceeds {MAX_SUPERVISOR_CHARS} characters"},
                status_code=422,
            )
        queued_at_step = handle.post_supervisor(body.category, text)
        return {"queued_at_step": queued_at_step}

    @app.post("/v1/control")
    def control(body: ControlBody):
        if body.command not in ("pause", "resume", "stop"):
            return JSONResponse(
                {"detail": "command must be pause, resume, or stop"}, status_code=422
            )
        handle.post_command(body.command)
        return {"status": "ok", "command": body.command}

    @app.websocket("/v1/stream")
    async def stream(ws: WebSocket):
        await ws.accept()
        sent_step = -1
        try:
            current = handle.hub.latest()
            if current is not None:
                await ws.send_json(current)
                sent_step = current["step"]
            while True:
                frame = await anyio.to_thread.run_sync(
                    handle.hub.wait_newer, sent_step, 0.25
                )
                if frame is not None:
                    await ws.send_json(frame)
                    sent_step = frame["step"]
                elif handle.hub.closed:
                    break
        except WebSocketDisconnect:
            return
        await ws.close()

    return app


def build_service(
    scenario: Scenario,
    mode: str = "llm",
    steps: int = 300,
    backend=None,
    seed: int | None = None,
    log_path: str | None = None,
    human_script: dict | None = None,
    pace: float = 0.1,
    console_dir: str | None = None,
) -> FastAPI:
    handle = RunHandle(
        _RunConfig(scenario, mode, steps, backend, seed, log_path, human_script, pace)
    )
    app = create_app(handle)
    if console_dir is not None:
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=console_dir, html=True), name="console")
    return app
