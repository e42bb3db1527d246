"""Guarded-event scheduler.

Each macro-cycle walks the sense / decision / order phases.  Within a
phase, events live in priority slots (plant motion before sensor
refresh, spawn before voting health before monitoring before the
sequence steps, merge before observation stamping); events inside one
slot commute, so any choice policy reaches the same phase-end state.
An event is enabled iff its guard holds and firing it would actually
change the state; a state with no enabled event in any phase is
quiescent.

Every firing increments the logical clock by one, so distinct events
always carry distinct timestamps.  A Kernel is a value-in/value-out
engine: given the initial state, a scenario and a seed, the produced
trace is byte-for-byte deterministic.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field, replace
from typing import Callable, Iterable, Optional

from . import controller, monitor
from . import plant as plant_ops
from .config import CATALOG_VERSION, Mutant, SimConfig
from .controller import SeqSnapshot, handle_event, force_module_silent
from .state import (
    MODULES,
    FaultSpec,
    HandleState,
    ObsEvent,
    SystemState,
    evolve,
    fingerprint,
    initial_state,
    state_delta,
)

SENSE, DECISION, ORDER = 0, 1, 2
PHASES = (SENSE, DECISION, ORDER)
PHASE_NAMES = {SENSE: "sense", DECISION: "decision", ORDER: "order"}


class ScenarioError(Exception):
    pass


class CatalogMismatch(Exception):
    pass


class FingerprintDivergence(Exception):
    def __init__(self, step: int, detail: str):
        super().__init__(f"step {step}: {detail}")
        self.step = step


@dataclass(frozen=True)
class Event:
    eid: str
    phase: int
    slot: int
    fire: Callable[[SystemState, Optional[SeqSnapshot]], Optional[SystemState]]
    module: Optional[int] = None
    is_seq: bool = False
    once_per_cycle: bool = False
    seq_dir: Optional[str] = None    # "og" / "rt"
    seq_index: Optional[int] = None
    seq_any_counter: bool = False    # mutant steps probed at every counter


def _plant_event(eid: str, slot: int, fn) -> Event:
    def fire(s: SystemState, _snap) -> Optional[SystemState]:
        p = fn(s)
        return None if p is None else evolve(s, plant=p)

    # Devices move one automaton edge per control cycle: the plant is
    # slow relative to the controller, so mid-travel states get sensed.
    return Event(eid, SENSE, slot, fire, once_per_cycle=True)


def build_catalog(config: SimConfig) -> list[Event]:
    interleaved = config.interleaved_devices
    mutant = config.mutant
    events: list[Event] = [
        _plant_event("plant.doors", 0, lambda s: plant_ops.door_transition(s.plant, s.orders, interleaved)),
        _plant_event("plant.gears", 0, lambda s: plant_ops.gear_transition(s.plant, s.orders, interleaved)),
        _plant_event("plant.switch_open", 0, _switch_reopen),
        Event("sense.refresh", SENSE, 1, _fire_refresh),
        Event("ctrl.spawn", DECISION, 0, lambda s, _snap: controller.spawn_inputs(s, mutant)),
        Event("ctrl.health", DECISION, 1, lambda s, _snap: controller.health_step(s, config.voting_threshold)),
    ]
    for m in MODULES:
        events.append(Event(f"ctrl.monitor_gears_locked_down.{m}", DECISION, 2,
                            lambda s, _snap, m=m: controller.monitor_locked_down(s, m), module=m))
        events.append(Event(f"ctrl.monitor_gears_maneuvering.{m}", DECISION, 2,
                            lambda s, _snap, m=m: controller.monitor_maneuvering(s, m), module=m))
        events.append(Event(f"ctrl.monitor_anomaly.{m}", DECISION, 2,
                            lambda s, _snap, m=m: controller.monitor_anomaly(s, m), module=m))
    for m in MODULES:
        slot = 2 + m  # module 1 then module 2
        for outgoing, prefix, table in ((True, "og", controller.OUTGOING), (False, "rt", controller.RETRACTION)):
            for step in table:
                any_counter = (
                    mutant is Mutant.DropGeneralEVGuard and not outgoing and step.index == 8
                )
                events.append(
                    Event(
                        f"ctrl.{prefix}{step.index}_{step.name}.{m}",
                        DECISION,
                        slot,
                        lambda s, snap, m=m, step=step, outgoing=outgoing: controller.seq_step_fire(
                            s, snap if snap is not None else controller.snapshot(s.internals), m, step, outgoing, mutant
                        ),
                        module=m,
                        is_seq=True,
                        seq_dir=prefix,
                        seq_index=step.index,
                        seq_any_counter=any_counter,
                    )
                )
    events.append(Event("ctrl.merge", ORDER, 0, lambda s, _snap: controller.merge_step(s, mutant)))
    events.append(Event("obs.cycle_end", ORDER, 1, _fire_cycle_end))
    return events


def _switch_reopen(s: SystemState):
    if not s.internals.endCycle:
        return None
    p = plant_ops.switch_transition(s.plant, cycle_ended=True)
    return None if p is s.plant else p


def _fire_refresh(s: SystemState, _snap) -> Optional[SystemState]:
    fresh = plant_ops.sense(s.plant)
    return None if fresh == s.inputs else evolve(s, inputs=fresh)


def _fire_cycle_end(s: SystemState, _snap) -> Optional[SystemState]:
    if not s.internals.endCycle or s.outputs.anomaly:
        return None
    outgoing = s.internals.order is HandleState.hDown
    start = ObsEvent.downH if outgoing else ObsEvent.upH
    end = ObsEvent.dcge if outgoing else ObsEvent.doge
    if s.stamp_of(start) is None or s.stamp_of(end) is not None:
        return None
    return monitor.stamp(s, end)


# --- scripted events (pilot, faults, module failures) --------------------------

def scripted_event(eid: str) -> Callable[[SystemState], SystemState]:
    if eid == "pilot.handle_up":
        return lambda s: handle_event(s, HandleState.hUp)
    if eid == "pilot.handle_down":
        return lambda s: handle_event(s, HandleState.hDown)
    if eid == "fault.clear":
        return lambda s: evolve(s, plant=replace(s.plant, faults=()))
    if eid.startswith("fault.module_silent."):
        m = int(eid.rsplit(".", 1)[1])
        return lambda s: force_module_silent(s, m)
    if eid.startswith("fault.inject."):
        spec = FaultSpec.from_key(eid[len("fault.inject."):])

        def inject(s: SystemState) -> SystemState:
            if spec in s.plant.faults:
                return s  # idempotent re-injection
            return evolve(s, plant=replace(s.plant, faults=s.plant.faults + (spec,)))

        return inject
    raise ScenarioError(f"unknown scripted event {eid!r}")


def is_scripted(eid: str) -> bool:
    return eid.startswith(("pilot.", "fault."))


# --- choice policies -----------------------------------------------------------

class Policy:
    """Picks one event among the enabled events of the current slot."""

    def choose(self, eids: list[str]) -> int:
        raise NotImplementedError

    def choose_seq(self, eids: list[str]) -> Optional[int]:
        """Choice among enabled sequence steps of one module; None skips
        the module's sequence slot for this cycle (explorer branching)."""
        return self.choose(eids) if len(eids) > 1 else 0

    def describe(self) -> dict:
        raise NotImplementedError


class FirstEnabledPolicy(Policy):
    """Deterministic catalog order; also what interactive sessions use."""

    def choose(self, eids: list[str]) -> int:
        return 0

    def describe(self) -> dict:
        return {"policy": "first"}


class SeededRandomPolicy(Policy):
    def __init__(self, seed: int):
        self.seed = seed
        self._rng = random.Random(seed)

    def choose(self, eids: list[str]) -> int:
        if len(eids) == 1:
            return 0
        return self._rng.randrange(len(eids))

    def describe(self) -> dict:
        return {"policy": "seeded_random", "seed": self.seed}


# --- traces ---------------------------------------------------------------------

@dataclass(frozen=True, slots=True)
class TraceRecord:
    step: int
    eid: str
    llc: int
    fp: Optional[int]
    delta: Optional[dict]


@dataclass
class Trace:
    header: dict
    records: list[TraceRecord] = field(default_factory=list)
    footer: dict = field(default_factory=dict)

    def event_ids(self) -> list[str]:
        return [r.eid for r in self.records]

    def dumps(self) -> str:
        lines = [json.dumps({"kind": "header", **self.header}, sort_keys=True, separators=(",", ":"))]
        for r in self.records:
            rec = {"kind": "event", "step": r.step, "eid": r.eid, "llc": r.llc}
            if r.fp is not None:
                rec["fp"] = f"{r.fp:016x}"
            if r.delta is not None:
                rec["delta"] = r.delta
            lines.append(json.dumps(rec, sort_keys=True, separators=(",", ":")))
        lines.append(json.dumps({"kind": "footer", **self.footer}, sort_keys=True, separators=(",", ":")))
        return "\n".join(lines) + "\n"

    def dump(self, path) -> None:
        with open(path, "w") as fh:
            fh.write(self.dumps())

    @staticmethod
    def loads(text: str) -> "Trace":
        header: Optional[dict] = None
        footer: dict = {}
        records: list[TraceRecord] = []
        for n, line in enumerate(text.splitlines(), start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as e:
                raise ScenarioError(f"trace line {n}: {e}") from None
            kind = obj.pop("kind", None)
            if kind == "header":
                header = obj
            elif kind == "footer":
                footer = obj
            elif kind == "event":
                records.append(
                    TraceRecord(
                        step=obj["step"],
                        eid=obj["eid"],
                        llc=obj["llc"],
                        fp=int(obj["fp"], 16) if "fp" in obj else None,
                        delta=obj.get("delta"),
                    )
                )
            else:
                raise ScenarioError(f"trace line {n}: unknown record kind {kind!r}")
        if header is None:
            raise ScenarioError("trace has no header line")
        return Trace(header=header, records=records, footer=footer)

    @staticmethod
    def load(path) -> "Trace":
        with open(path) as fh:
            return Trace.loads(fh.read())


# --- the kernel ------------------------------------------------------------------

@dataclass
class StepOutcome:
    state: SystemState
    eid: str


class Kernel:
    """Owns one evolving state plus the per-cycle scheduling cursor."""

    def __init__(
        self,
        config: SimConfig = SimConfig(),
        state: Optional[SystemState] = None,
        policy: Optional[Policy] = None,
        record_events: bool = True,
        record_fingerprints: bool = True,
        record_deltas: bool = False,
        check_every_step: bool = True,
    ):
        self.config = config
        self.catalog = build_catalog(config)
        self.by_eid = {e.eid: e for e in self.catalog}
        self._slots: dict[int, list[tuple[int, list[Event]]]] = {}
        for phase in PHASES:
            slots: dict[int, list[Event]] = {}
            for ev in self.catalog:
                if ev.phase == phase:
                    slots.setdefault(ev.slot, []).append(ev)
            self._slots[phase] = sorted(slots.items())
        self._seq_lookup = {
            (ev.module, ev.seq_dir, ev.seq_index): ev for ev in self.catalog if ev.is_seq
        }
        self._seq_extra = [ev for ev in self.catalog if ev.seq_any_counter]
        self.state = state if state is not None else initial_state()
        self.policy = policy or FirstEnabledPolicy()
        self.record_events = record_events
        self.record_fingerprints = record_fingerprints
        self.record_deltas = record_deltas
        self.check_every_step = check_every_step
        self.cycle = 0
        self.steps = 0
        self.records: list[TraceRecord] = []
        self.violations: list[dict] = []
        self.warnings: list[str] = []
        self._checked_cycle_ends: set = set()
        self._stepper = None  # cursor for single-event stepping

    # -- event evaluation ---------------------------------------------------

    def enabled_events(self, phase: Optional[int] = None) -> list[str]:
        """Effectively enabled events (guard holds and the firing changes
        the state), in catalog order, optionally restricted to a phase."""
        snap = controller.snapshot(self.state.internals)
        out = []
        for ev in self.catalog:
            if phase is not None and ev.phase != phase:
                continue
            if ev.fire(self.state, snap) is not None:
                out.append(ev.eid)
        return out

    def quiescent(self) -> bool:
        return not self.enabled_events()

    # -- firing ---------------------------------------------------------------

    def _commit(self, eid: str, new_state: SystemState) -> None:
        before = self.state
        new_state = evolve(new_state, llc=before.llc + 1)
        self.steps += 1
        self.state = new_state
        if self.record_events:
            fp = fingerprint(new_state) if self.record_fingerprints else None
            delta = state_delta(before, new_state) if self.record_deltas else None
            self.records.append(TraceRecord(self.steps, eid, new_state.llc, fp, delta))
        if self.check_every_step:
            for v in monitor.safety_violations(new_state):
                self._report(v)

    def _report(self, verdict: monitor.Verdict) -> None:
        self.violations.append(
            {
                "requirement": verdict.requirement,
                "step": self.steps,
                "witness": verdict.witness,
                "fp": f"{fingerprint(self.state):016x}",
                # clock-free identity of the violating state: two paths of
                # different lengths reaching the same state are one finding
                "state_key": f"{fingerprint(self.state, include_clock=False):016x}",
            }
        )

    def fire_scripted(self, eid: str) -> None:
        self._stepper = None  # scripted actions bind to cycle boundaries
        self._commit(eid, scripted_event(eid)(self.state))

    def apply_event(self, eid: str, snap: Optional[SeqSnapshot] = None) -> bool:
        """Fire one event by id (replay primitive).  Returns False when the
        event is not enabled in the current state."""
        if is_scripted(eid):
            try:
                self._commit(eid, scripted_event(eid)(self.state))
            except controller.NoOpHandleMove:
                return False
            return True
        ev = self.by_eid.get(eid)
        if ev is None:
            raise CatalogMismatch(f"unknown event {eid!r}")
        new_state = ev.fire(self.state, snap)
        if new_state is None:
            return False
        self._commit(eid, new_state)
        return True

    def _seq_candidates(self, module: int, snap: SeqSnapshot) -> list[Event]:
        """The at most one counter-matching step of the active sequence,
        plus any mutant step probed at every counter."""
        if snap.order is HandleState.hDown:
            key = (module, "og", snap.nextOGseq)
        else:
            key = (module, "rt", snap.nextRTseq)
        out = []
        ev = self._seq_lookup.get(key)
        if ev is not None:
            out.append(ev)
        for extra in self._seq_extra:
            if extra.module == module and extra is not ev:
                out.append(extra)
        return out

    def _slot_frontier(self, phase: int, snap: Optional[SeqSnapshot], seq_budget: dict, spent: set) -> list[tuple[Event, SystemState]]:
        """Enabled events of the first non-empty priority slot of a phase."""
        for _slot, events in self._slots[phase]:
            if events[0].is_seq:
                m = events[0].module
                if seq_budget.get(m, 0) <= 0 or snap is None:
                    continue
                events = self._seq_candidates(m, snap)
            frontier = []
            for ev in events:
                if ev.once_per_cycle and ev.eid in spent:
                    continue
                new_state = ev.fire(self.state, snap)
                if new_state is not None:
                    frontier.append((ev, new_state))
            if frontier:
                return frontier
        return []

    def _phase_microsteps(self, phase: int, max_steps: Optional[int] = None):
        """Drain one phase, yielding each fired event id."""
        snap = controller.snapshot(self.state.internals) if phase == DECISION else None
        seq_budget = {m: 1 for m in MODULES}
        spent: set = set()
        while max_steps is None or self.steps < max_steps:
            frontier = self._slot_frontier(phase, snap, seq_budget, spent)
            if not frontier:
                break
            eids = [e.eid for e, _ in frontier]
            if frontier[0][0].is_seq:
                idx = self.policy.choose_seq(eids)
                if idx is None:
                    for ev, _ in frontier:
                        seq_budget[ev.module] = 0
                    continue
            else:
                idx = self.policy.choose(eids) if len(frontier) > 1 else 0
            ev, new_state = frontier[idx]
            if ev.is_seq:
                seq_budget[ev.module] -= 1
            if ev.once_per_cycle:
                spent.add(ev.eid)
            self._commit(ev.eid, new_state)
            yield ev.eid

    def _cycle_microsteps(self, max_steps: Optional[int] = None):
        """Drive one macro-cycle, yielding each fired event id."""
        for phase in PHASES:
            yield from self._phase_microsteps(phase, max_steps)

    def run_phase(self, phase: int, max_steps: Optional[int] = None) -> int:
        return sum(1 for _ in self._phase_microsteps(phase, max_steps))

    def run_cycle(self, max_steps: Optional[int] = None) -> int:
        """One full sense/decision/order macro-cycle; returns events fired."""
        fired = sum(1 for _ in self._cycle_microsteps(max_steps))
        if max_steps is None or self.steps < max_steps:
            # a budget-truncated cycle stops mid-phase, where the staged
            # module copies are legitimately out of sync
            self._cycle_boundary_checks()
        self.cycle += 1
        return fired

    def step(self) -> Optional[str]:
        """Fire exactly one enabled event under the choice policy.

        Returns the fired event id, or None when the state is quiescent
        (no guard holds anywhere with an effect).  Macro-cycle accounting
        advances automatically as phases drain.
        """
        if not self.enabled_events():
            return None
        while True:
            if self._stepper is None:
                self._stepper = self._cycle_microsteps()
            eid = next(self._stepper, None)
            if eid is not None:
                return eid
            self._stepper = None
            self._cycle_boundary_checks()
            self.cycle += 1

    def _cycle_boundary_checks(self) -> None:
        s = self.state
        if self.check_every_step and not s.outputs.anomaly:
            bind = monitor.check_binding(s)
            if not bind.holds:
                self._report(bind)
        if s.internals.endCycle:
            outgoing = s.internals.order is HandleState.hDown
            end = ObsEvent.dcge if outgoing else ObsEvent.doge
            t = s.stamp_of(end)
            if t is not None and t not in self._checked_cycle_ends:
                self._checked_cycle_ends.add(t)
                try:
                    verdict = monitor.check_R1(monitor.observation_log(s), outgoing)
                except monitor.IncompleteCycle as e:
                    self.warnings.append(str(e))
                    return
                if not verdict.holds:
                    self._report(verdict)


@dataclass
class RunResult:
    trace: Trace
    final_state: SystemState
    stop_reason: str
    violations: list[dict]
    warnings: list[str]


def run(
    scenario: "Scenario",
    config: SimConfig = SimConfig(),
    max_steps: Optional[int] = None,
    record_events: bool = True,
    record_fingerprints: bool = True,
    record_deltas: bool = False,
) -> RunResult:
    """Execute a scenario to quiescence, step budget or first violation."""
    limit = max_steps if max_steps is not None else scenario.max_steps
    if limit <= 0:
        raise ScenarioError("max_steps must be positive")

    policy = scenario.make_policy()
    kernel = Kernel(
        config,
        policy=policy,
        record_events=record_events,
        record_fingerprints=record_fingerprints,
        record_deltas=record_deltas,
    )
    pending = scenario.schedule()
    stop_reason = "max_steps"
    while kernel.steps < limit:
        fired = 0
        actions = pending.pop(kernel.cycle, [])
        for eid in actions:
            try:
                kernel.fire_scripted(eid)
            except controller.NoOpHandleMove:
                kernel.warnings.append(f"cycle {kernel.cycle}: {eid} is a no-op handle move")
            else:
                fired += 1
            if kernel.steps >= limit:
                break
        fired += kernel.run_cycle(limit)
        if scenario.stop_on_violation and kernel.violations:
            stop_reason = "violation"
            break
        if fired == 0 and not pending:
            stop_reason = "quiescent"
            break

    if stop_reason == "max_steps" and kernel.steps < limit:
        stop_reason = "quiescent"

    final = kernel.state
    if not final.internals.endCycle:
        kernel.warnings.append("IncompleteCycle: trace ends inside a control cycle")

    header = {
        "schema": 1,
        "catalog_version": CATALOG_VERSION,
        "scenario": scenario.name,
        "config": config.digest(),
        "voting_threshold": config.voting_threshold,
        "interleaved_devices": config.interleaved_devices,
        "mutant": config.mutant.value if config.mutant else None,
        **policy.describe(),
    }
    if config.mutant is not None:
        header["watermark"] = "MUTANT RUN - NOT NOMINAL EVIDENCE"
    footer = {
        "final_fp": f"{fingerprint(final):016x}",
        "steps": kernel.steps,
        "cycles": kernel.cycle,
        "stop": stop_reason,
        "violations": kernel.violations,
        "warnings": kernel.warnings,
    }
    trace = Trace(header=header, records=kernel.records, footer=footer)
    return RunResult(trace, final, stop_reason, kernel.violations, kernel.warnings)


@dataclass
class ReplayResult:
    ok: bool
    steps: int
    detail: str = ""


def config_from_header(header: dict) -> SimConfig:
    return SimConfig(
        voting_threshold=header.get("voting_threshold", 1),
        interleaved_devices=header.get("interleaved_devices", False),
        mutant=Mutant(header["mutant"]) if header.get("mutant") else None,
    )


def replay(trace: Trace, config: Optional[SimConfig] = None) -> ReplayResult:
    """Re-fire the recorded events and compare clocks and fingerprints.

    The decision-phase snapshot is reconstructed from the static phase of
    each event id, so module pairs re-fire exactly as they did live.
    Without an explicit config the trace header's recorded one is used.
    """
    if config is None:
        config = config_from_header(trace.header)
    if trace.header.get("catalog_version") != CATALOG_VERSION:
        raise CatalogMismatch(
            f"trace catalog {trace.header.get('catalog_version')} != {CATALOG_VERSION}"
        )
    if trace.header.get("config") != config.digest():
        raise CatalogMismatch("trace was recorded under a different configuration")

    kernel = Kernel(config, record_fingerprints=False, check_every_step=False)
    snap: Optional[SeqSnapshot] = None
    prev_phase: Optional[int] = None
    for rec in trace.records:
        ev = kernel.by_eid.get(rec.eid)
        phase = ev.phase if ev is not None else None
        if phase == DECISION and prev_phase != DECISION:
            snap = controller.snapshot(kernel.state.internals)
        prev_phase = phase
        if not kernel.apply_event(rec.eid, snap):
            return ReplayResult(False, rec.step, f"event {rec.eid} not enabled at step {rec.step}")
        if kernel.state.llc != rec.llc:
            return ReplayResult(False, rec.step, f"llc {kernel.state.llc} != recorded {rec.llc}")
        if rec.fp is not None and fingerprint(kernel.state) != rec.fp:
            return ReplayResult(False, rec.step, f"FingerprintDivergence at step {rec.step}")
    final = trace.footer.get("final_fp")
    if final is not None and f"{fingerprint(kernel.state):016x}" != final:
        return ReplayResult(False, len(trace.records), "FingerprintDivergence at final state")
    return ReplayResult(True, len(trace.records))


def apply_events(eids: Iterable[str], config: SimConfig = SimConfig()) -> tuple[SystemState, bool]:
    """Apply a bare event sequence from the initial state (used by the
    counterexample minimizer).  Returns (state, all_fired)."""
    kernel = Kernel(config, record_events=False, record_fingerprints=False, check_every_step=False)
    snap: Optional[SeqSnapshot] = None
    prev_phase: Optional[int] = None
    for eid in eids:
        ev = kernel.by_eid.get(eid)
        phase = ev.phase if ev is not None else None
        if phase == DECISION and prev_phase != DECISION:
            snap = controller.snapshot(kernel.state.internals)
        prev_phase = phase
        if not kernel.apply_event(eid, snap):
            return kernel.state, False
    return kernel.state, True


def trace_from_events(eids: Iterable[str], config: SimConfig = SimConfig(),
                      name: str = "counterexample") -> Trace:
    """Materialize an event sequence as a standard replayable trace file."""
    kernel = Kernel(config, record_events=True, record_fingerprints=True,
                    record_deltas=False, check_every_step=False)
    snap: Optional[SeqSnapshot] = None
    prev_phase: Optional[int] = None
    for eid in eids:
        ev = kernel.by_eid.get(eid)
        phase = ev.phase if ev is not None else None
        if phase == DECISION and prev_phase != DECISION:
            snap = controller.snapshot(kernel.state.internals)
        prev_phase = phase
        if not kernel.apply_event(eid, snap):
            raise ScenarioError(f"event {eid} is not enabled along the given sequence")
    header = {
        "schema": 1,
        "catalog_version": CATALOG_VERSION,
        "scenario": name,
        "config": config.digest(),
        "voting_threshold": config.voting_threshold,
        "interleaved_devices": config.interleaved_devices,
        "mutant": config.mutant.value if config.mutant else None,
        "policy": "scripted",
    }
    if config.mutant is not None:
        header["watermark"] = "MUTANT RUN - NOT NOMINAL EVIDENCE"
    footer = {
        "final_fp": f"{fingerprint(kernel.state):016x}",
        "steps": kernel.steps,
        "cycles": kernel.cycle,
        "stop": "scripted_end",
        "violations": [],
        "warnings": [],
    }
    return Trace(header=header, records=kernel.records, footer=footer)
