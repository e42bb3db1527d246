"""Session server for cockpit clients.

One WebSocket connection owns one kernel session; sessions never share
state.  Clients send {"type": "command", "cmd": ..., "args": {...}} and
receive {"type": "state", ...} pushes after every state-changing
interaction and after every macro-cycle while running, or
{"type": "error", "code": ..., "detail": ...} for rejected commands.
Session errors never take the server down.
"""

from __future__ import annotations

import asyncio
import json
import logging
from typing import Optional

from . import monitor
from .config import SimConfig
from .controller import NoOpHandleMove
from .kernel import FirstEnabledPolicy, Kernel, SeededRandomPolicy
from .scenario import ScenarioError, parse_fault
from .state import canonical_record

log = logging.getLogger("lgsim.server")

COMMANDS = (
    "handle_up",
    "handle_down",
    "inject_fault",
    "clear_faults",
    "pause",
    "resume",
    "step_once",
    "reset",
    "set_policy",
)


class SessionError(Exception):
    def __init__(self, code: str, detail: str):
        super().__init__(detail)
        self.code = code
        self.detail = detail


class Session:
    """Protocol logic of one client session, independent of transport."""

    def __init__(self, config: SimConfig = SimConfig(), seed: int = 0, preset=None):
        self.config = config
        self.seed = seed
        self.preset = preset  # Scenario run to completion before the client takes over
        self.running = False
        self._fresh_kernel()

    def _fresh_kernel(self) -> None:
        self.kernel = Kernel(
            self.config,
            policy=SeededRandomPolicy(self.seed),
            record_events=False,
            check_every_step=True,
        )
        if self.preset is not None:
            from .kernel import run as run_scenario

            result = run_scenario(self.preset, self.config, record_events=False)
            self.kernel.state = result.final_state
            self.kernel.steps = result.trace.footer["steps"]
            self.kernel.cycle = result.trace.footer["cycles"]

    def state_message(self) -> dict:
        s = self.kernel.state
        verdicts = [
            {"requirement": v.requirement, "holds": v.holds, "witness": v.witness}
            for v in monitor.check_safety(s, include_binding=True)
        ]
        return {
            "type": "state",
            "snapshot": canonical_record(s),
            "verdicts": verdicts,
            "enabled_events": self.kernel.enabled_events(),
            "llc": s.llc,
            "cycle": self.kernel.cycle,
            "paused": not self.running,
        }

    def tick(self) -> int:
        """One macro-cycle; returns events fired."""
        return self.kernel.run_cycle()

    def apply_command(self, cmd: str, args: Optional[dict]) -> None:
        args = args or {}
        if cmd not in COMMANDS:
            raise SessionError("bad_command", f"unknown command {cmd!r}")
        if cmd in ("handle_up", "handle_down"):
            try:
                self.kernel.fire_scripted(f"pilot.{cmd}")
            except NoOpHandleMove as e:
                raise SessionError("noop_handle", str(e)) from None
        elif cmd == "inject_fault":
            try:
                fault = parse_fault(args, "fault")
            except ScenarioError as e:
                raise SessionError("bad_fault", str(e)) from None
            self.kernel.fire_scripted(f"fault.inject.{fault.key()}")
        elif cmd == "clear_faults":
            self.kernel.fire_scripted("fault.clear")
        elif cmd == "pause":
            self.running = False
        elif cmd == "resume":
            self.running = True
        elif cmd == "step_once":
            self.tick()
        elif cmd == "reset":
            self.running = False
            self._fresh_kernel()
        elif cmd == "set_policy":
            policy = args.get("policy", "seeded_random")
            if policy == "seeded_random":
                self.seed = int(args.get("seed", 0))
                self.kernel.policy = SeededRandomPolicy(self.seed)
            elif policy == "first":
                self.kernel.policy = FirstEnabledPolicy()
            else:
                raise SessionError("bad_policy", f"unknown policy {policy!r}")


async def _handle(websocket, config: SimConfig, tick_seconds: float, preset=None) -> None:
    session = Session(config, preset=preset)
    await websocket.send(json.dumps(session.state_message()))

    async def ticker():
        while True:
            await asyncio.sleep(tick_seconds)
            if session.running:
                session.tick()
                await websocket.send(json.dumps(session.state_message()))

    tick_task = asyncio.create_task(ticker())
    try:
        async for raw in websocket:
            try:
                msg = json.loads(raw)
            except json.JSONDecodeError:
                await websocket.send(json.dumps(
                    {"type": "error", "code": "bad_json", "detail": "message is not valid JSON"}
                ))
                continue
            if not isinstance(msg, dict) or msg.get("type") != "command":
                await websocket.send(json.dumps(
                    {"type": "error", "code": "bad_command", "detail": "expected a command message"}
                ))
                continue
            try:
                session.apply_command(msg.get("cmd"), msg.get("args"))
            except SessionError as e:
                await websocket.send(json.dumps({"type": "error", "code": e.code, "detail": e.detail}))
                continue
            except Exception:
                log.exception("command failed")
                await websocket.send(json.dumps(
                    {"type": "error", "code": "internal", "detail": "command failed"}
                ))
                continue
            await websocket.send(json.dumps(session.state_message()))
    finally:
        tick_task.cancel()


async def serve(host: str = "127.0.0.1", port: int = 8765,
                config: SimConfig = SimConfig(), tick_seconds: float = 0.5,
                ready: Optional[asyncio.Event] = None, preset=None) -> None:
    from websockets.asyncio.server import serve as ws_serve

    async def handler(websocket):
        try:
            await _handle(websocket, config, tick_seconds, preset)
        except Exception:
            log.exception("session closed abnormally")

    async with ws_serve(handler, host, port):
        log.info("listening on ws://%s:%d", host, port)
        if ready is not None:
            ready.set()
        await asyncio.get_running_loop().create_future()


def main(host: str, port: int, config: SimConfig, tick_seconds: float = 0.5, preset=None) -> None:
    asyncio.run(serve(host, port, config, tick_seconds, preset=preset))
