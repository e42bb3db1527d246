"""Scenario files: scripted pilot moves, fault injections and module
failures bound to macro-cycle numbers, plus run policy and budgets.

Binding actions to macro-cycles (not micro-steps) keeps scenarios stable
across event-catalog edits.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Optional

from .kernel import Policy, FirstEnabledPolicy, ScenarioError, SeededRandomPolicy
from .state import Door, FaultMode, FaultSpec, Gear, Sensor

SCHEMA = 1

_ACTIONS = ("handle_up", "handle_down", "inject_fault", "clear_faults", "force_module_silent")


@dataclass(frozen=True, slots=True)
class Action:
    cycle: int
    name: str
    fault: Optional[FaultSpec] = None
    module: Optional[int] = None

    def event_id(self) -> str:
        if self.name in ("handle_up", "handle_down"):
            return f"pilot.{self.name}"
        if self.name == "clear_faults":
            return "fault.clear"
        if self.name == "force_module_silent":
            return f"fault.module_silent.{self.module}"
        return f"fault.inject.{self.fault.key()}"


@dataclass(frozen=True)
class Scenario:
    name: str = "adhoc"
    script: tuple[Action, ...] = ()
    policy: str = "seeded_random"
    seed: int = 0
    max_steps: int = 2000
    stop_on_violation: bool = True

    def schedule(self) -> dict[int, list[str]]:
        out: dict[int, list[str]] = {}
        for a in self.script:
            cycle = a.cycle
            if a.name == "inject_fault" and a.fault.from_step > cycle:
                cycle = a.fault.from_step
            out.setdefault(cycle, []).append(a.event_id())
        return out

    def make_policy(self) -> Policy:
        if self.policy == "seeded_random":
            return SeededRandomPolicy(self.seed)
        return FirstEnabledPolicy()

    # -- convenience builders -------------------------------------------------

    @staticmethod
    def pilot(name: str, moves, seed: int = 0, max_steps: int = 2000,
              stop_on_violation: bool = True, faults=(), silent_modules=()) -> "Scenario":
        """moves: iterable of (cycle, "up"|"down"); faults and module
        failures land before any same-cycle handle move."""
        script = [Action(0, "force_module_silent", module=m) for m in silent_modules]
        script += [Action(f.from_step, "inject_fault", fault=f) for f in faults]
        script += [Action(c, f"handle_{d}") for c, d in moves]
        script.sort(key=lambda a: a.cycle)
        return Scenario(name, tuple(script), "seeded_random", seed, max_steps, stop_on_violation)


def parse_fault(obj: dict, where: str) -> FaultSpec:
    try:
        sensor = Sensor(obj["sensor"])
    except (KeyError, ValueError) as e:
        raise ScenarioError(f"{where}.sensor: {e}") from None
    device = None
    if obj.get("device") is not None:
        dev = obj["device"]
        try:
            device = Door(dev) if sensor in (Sensor.door_closed, Sensor.door_open) else Gear(dev)
        except ValueError:
            raise ScenarioError(f"{where}.device: {dev!r} does not name a door/gear") from None
    try:
        return FaultSpec(
            sensor=sensor,
            channel=int(obj.get("channel", 0)),
            device=device,
            mode=FaultMode(obj.get("mode", "StuckWrong")),
            from_step=int(obj.get("from_step", 0)),
        )
    except (ValueError, TypeError) as e:
        raise ScenarioError(f"{where}: {e}") from None


def fault_to_json(f: FaultSpec) -> dict:
    return {
        "sensor": f.sensor.value,
        "channel": f.channel,
        "device": f.device.value if f.device else None,
        "mode": f.mode.value,
        "from_step": f.from_step,
    }


def loads(text: str) -> Scenario:
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as e:
        raise ScenarioError(f"not valid JSON: line {e.lineno}, column {e.colno}: {e.msg}") from None
    if not isinstance(obj, dict):
        raise ScenarioError("top level must be an object")
    if obj.get("schema") != SCHEMA:
        raise ScenarioError(f"schema: expected {SCHEMA}, got {obj.get('schema')!r}")

    script: list[Action] = []
    last_cycle = 0
    for i, entry in enumerate(obj.get("script", [])):
        where = f"script[{i}]"
        if not isinstance(entry, dict):
            raise ScenarioError(f"{where}: must be an object")
        action = entry.get("action")
        if action not in _ACTIONS:
            raise ScenarioError(f"{where}.action: {action!r} not one of {_ACTIONS}")
        cycle = entry.get("cycle")
        if not isinstance(cycle, int) or cycle < 0:
            raise ScenarioError(f"{where}.cycle: must be a nonnegative integer")
        if cycle < last_cycle:
            raise ScenarioError(f"{where}.cycle: cycles must be nondecreasing")
        last_cycle = cycle
        fault = module = None
        if action == "inject_fault":
            if "fault" not in entry:
                raise ScenarioError(f"{where}: inject_fault needs a fault object")
            fault = parse_fault(entry["fault"], f"{where}.fault")
        if action == "force_module_silent":
            module = entry.get("module")
            if module not in (1, 2):
                raise ScenarioError(f"{where}.module: must be 1 or 2")
        script.append(Action(cycle, action, fault=fault, module=module))

    policy = obj.get("policy", "seeded_random")
    if policy not in ("seeded_random", "first"):
        raise ScenarioError(f"policy: {policy!r} not one of ('seeded_random', 'first')")
    seed = obj.get("seed", 0)
    if not isinstance(seed, int):
        raise ScenarioError("seed: must be an integer")
    max_steps = obj.get("max_steps", 2000)
    if not isinstance(max_steps, int) or max_steps <= 0:
        raise ScenarioError("max_steps: must be a positive integer")
    return Scenario(
        name=str(obj.get("name", "unnamed")),
        script=tuple(script),
        policy=policy,
        seed=seed,
        max_steps=max_steps,
        stop_on_violation=bool(obj.get("stop_on_violation", True)),
    )


def load(path) -> Scenario:
    try:
        with open(path) as fh:
            return loads(fh.read())
    except OSError as e:
        raise ScenarioError(str(e)) from None


def dumps(s: Scenario) -> str:
    entries = []
    for a in s.script:
        entry: dict = {"cycle": a.cycle, "action": a.name}
        if a.fault is not None:
            entry["fault"] = fault_to_json(a.fault)
        if a.module is not None:
            entry["module"] = a.module
        entries.append(entry)
    return json.dumps(
        {
            "schema": SCHEMA,
            "name": s.name,
            "policy": s.policy,
            "seed": s.seed,
            "max_steps": s.max_steps,
            "stop_on_violation": s.stop_on_violation,
            "script": entries,
        },
        indent=2,
    )
