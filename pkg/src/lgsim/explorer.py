"""Bounded exhaustive exploration of the reachable state space.

Breadth-first over macro-cycle boundary states.  Branch points are the
pilot's handle moves at each boundary (within a move budget, including
the double flip back within one boundary), the static fault / module
failure subsets activated at the root, and the per-cycle choice of
sequence step when a mutant makes more than one step enabled.  Plant,
sensing, monitoring and merge events commute inside their priority
slots, so they are fired in canonical catalog order; the per-state
monitor checks see every micro-step along each expansion, which keeps
the canonical ordering sound for violation finding.

Counterexamples replay from the initial state: a violation's event list
fed back through the kernel reaches a state where the named requirement
is false.  Reports are fully deterministic (violations sorted on
requirement, depth and state fingerprint), so a partitioned-frontier
parallel run merging by the same ordering would reproduce the
single-worker report bit for bit.
"""

from __future__ import annotations

import heapq
import json
from dataclasses import dataclass, field
from itertools import combinations
from typing import Iterator, Optional

from . import monitor
from .config import Mutant, SimConfig
from .kernel import Kernel, Policy, apply_events
from .state import FaultSpec, HandleState, SystemState, fingerprint


class FrontierBudgetExceeded(Exception):
    def __init__(self, report: "ExploreReport"):
        super().__init__(f"state budget exceeded after {report.states_visited} states")
        self.report = report


class NotReproducible(Exception):
    pass


@dataclass(frozen=True)
class ExploreConfig:
    max_depth: int = 400            # micro-steps along any path
    pilot_budget: int = 2           # handle moves available to the branching pilot
    fault_envelope: tuple[FaultSpec, ...] = ()
    f_max: int = 1                  # activated fault subsets have at most this size
    module_failure_envelope: tuple[int, ...] = ()
    mutant: Optional[Mutant] = None
    dedupe: bool = True
    initial_actions: tuple[str, ...] = ()  # scripted event ids applied before exploring
    max_states: int = 200_000

    def __post_init__(self):
        if self.f_max > len(self.fault_envelope):
            object.__setattr__(self, "f_max", len(self.fault_envelope))

    def sim_config(self) -> SimConfig:
        return SimConfig(mutant=self.mutant)


@dataclass(frozen=True)
class Counterexample:
    requirement: str
    witness: Optional[str]
    events: tuple[str, ...]
    depth: int
    fp: str

    def to_json(self) -> dict:
        return {
            "requirement": self.requirement,
            "witness": self.witness,
            "depth": self.depth,
            "fp": self.fp,
            "events": list(self.events),
        }


@dataclass
class ExploreReport:
    states_visited: int = 0
    edges_fired: int = 0
    max_depth_reached: int = 0
    quiescent_states: int = 0
    violations: list[Counterexample] = field(default_factory=list)
    frontier_exhausted: bool = False
    truncated: bool = False
    mutant: Optional[str] = None

    def to_json(self) -> dict:
        return {
            "schema": 1,
            "states_visited": self.states_visited,
            "edges_fired": self.edges_fired,
            "max_depth_reached": self.max_depth_reached,
            "quiescent_states": self.quiescent_states,
            "frontier_exhausted": self.frontier_exhausted,
            "truncated": self.truncated,
            "mutant": self.mutant,
            "watermark": "MUTANT RUN - NOT NOMINAL EVIDENCE" if self.mutant else None,
            "violations": [c.to_json() for c in self.violations],
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2, sort_keys=True) + "\n"


def _template(eid: str) -> str:
    # "ctrl.og3_stmlt_gear_outgoing.1" -> "og3"
    return eid.split(".", 2)[1].split("_", 1)[0]


class _ProbePolicy(Policy):
    """Canonical order everywhere; records the first sequence-slot choice
    set of the cycle, then sticks to its first template."""

    def __init__(self):
        self.templates: Optional[list[str]] = None
        self.chosen: Optional[str] = None

    def choose(self, eids):
        return 0

    def choose_seq(self, eids):
        if self.templates is None:
            self.templates = [_template(e) for e in eids]
            self.chosen = self.templates[0]
        for i, e in enumerate(eids):
            if _template(e) == self.chosen:
                return i
        return None

    def describe(self):
        return {"policy": "explorer-probe"}


class _PrescribedPolicy(Policy):
    """Canonical order, but every sequence slot follows one prescribed
    step template (both modules make the same choice)."""

    def __init__(self, template: str):
        self.template = template

    def choose(self, eids):
        return 0

    def choose_seq(self, eids):
        for i, e in enumerate(eids):
            if _template(e) == self.template:
                return i
        return None

    def describe(self):
        return {"policy": "explorer-branch", "template": self.template}


@dataclass(frozen=True)
class _Node:
    state: SystemState
    depth: int
    budget: int
    path: tuple[str, ...]


def _flip_id(state: SystemState) -> str:
    up = state.plant.pilot_handle is HandleState.hDown
    return "pilot.handle_up" if up else "pilot.handle_down"


def _expand(node: _Node, cfg: ExploreConfig, policy: Policy, actions: tuple[str, ...]):
    """Run boundary actions plus one macro-cycle; returns the fork kernel."""
    k = Kernel(
        cfg.sim_config(),
        state=node.state,
        policy=policy,
        record_events=True,
        record_fingerprints=False,
        check_every_step=True,
    )
    for eid in actions:
        k.fire_scripted(eid)
    k.run_cycle()
    return k


def _roots(cfg: ExploreConfig) -> Iterator[tuple[str, ...]]:
    fault_subsets: list[tuple[FaultSpec, ...]] = [()]
    for n in range(1, cfg.f_max + 1):
        fault_subsets.extend(combinations(cfg.fault_envelope, n))
    failure_subsets: list[tuple[int, ...]] = [()]
    for n in range(1, len(cfg.module_failure_envelope) + 1):
        failure_subsets.extend(combinations(cfg.module_failure_envelope, n))
    for faults in fault_subsets:
        for failures in failure_subsets:
            yield (
                tuple(cfg.initial_actions)
                + tuple(f"fault.inject.{f.key()}" for f in faults)
                + tuple(f"fault.module_silent.{m}" for m in failures)
            )


def explore(cfg: ExploreConfig) -> ExploreReport:
    report = ExploreReport(mutant=cfg.mutant.value if cfg.mutant else None)
    found: dict[tuple, Counterexample] = {}
    # strictly depth-ordered frontier: every state is expanded at its
    # minimal depth, which makes deduplication blind to path multiplicity
    queue: list[tuple[int, int, _Node]] = []
    tiebreak = 0
    visited: set = set()

    def push(node: _Node) -> None:
        nonlocal tiebreak
        heapq.heappush(queue, (node.depth, tiebreak, node))
        tiebreak += 1

    for prefix in _roots(cfg):
        state, ok = apply_events(prefix, cfg.sim_config())
        assert ok, "root action prefixes always fire"
        push(_Node(state, len(prefix), cfg.pilot_budget, prefix))

    def note_violations(node: _Node, kernel: Kernel) -> None:
        eids = [r.eid for r in kernel.records]
        for v in kernel.violations:
            key = (v["requirement"], v["state_key"])
            depth = node.depth + v["step"]
            if key in found and found[key].depth <= depth:
                continue
            events = node.path + tuple(eids[: v["step"]])
            found[key] = Counterexample(v["requirement"], v["witness"], events, depth, v["state_key"])

    while queue:
        _, _, node = heapq.heappop(queue)
        key = (fingerprint(node.state, include_clock=False), node.budget)
        if cfg.dedupe:
            if key in visited:
                continue
            visited.add(key)
        report.states_visited += 1
        report.max_depth_reached = max(report.max_depth_reached, node.depth)
        if report.states_visited > cfg.max_states:
            raise FrontierBudgetExceeded(report)
        if node.depth >= cfg.max_depth:
            report.truncated = True
            continue

        action_choices: list[tuple[str, ...]] = [()]
        if node.budget >= 1:
            flip = _flip_id(node.state)
            action_choices.append((flip,))
        if node.budget >= 2:
            back = "pilot.handle_down" if flip.endswith("up") else "pilot.handle_up"
            action_choices.append((flip, back))

        for actions in action_choices:
            probe = _ProbePolicy()
            kernel = _expand(node, cfg, probe, actions)
            branches = [kernel]
            if probe.templates is not None:
                for template in probe.templates[1:]:
                    branches.append(_expand(node, cfg, _PrescribedPolicy(template), actions))
            for k in branches:
                report.edges_fired += k.steps
                note_violations(node, k)
                if k.steps == 0:
                    report.quiescent_states += 1
                    continue
                child = _Node(
                    k.state,
                    node.depth + k.steps,
                    node.budget - len(actions),
                    node.path + tuple(r.eid for r in k.records),
                )
                if child.depth > cfg.max_depth:
                    report.truncated = True
                    continue
                push(child)

    report.violations = sorted(found.values(), key=lambda c: (c.requirement, c.depth, c.fp))
    # the queue drained: exploration of the requested (depth-bounded) space
    # is complete; `truncated` records whether the depth bound cut anything
    report.frontier_exhausted = True
    return report


# --- counterexample minimization -----------------------------------------------

def requirement_fails(state: SystemState, requirement: str, cfg: Optional[SimConfig] = None) -> bool:
    if requirement in ("R11bis", "R12bis"):
        try:
            verdict = monitor.check_R1(
                monitor.observation_log(state), outgoing=requirement == "R11bis"
            )
        except monitor.IncompleteCycle:
            return False
        return not verdict.holds
    if requirement == "BIND" and not _settled(state, cfg or SimConfig()):
        # BIND only means something at phase-consistent cuts; a pending
        # spawn or merge makes it transiently false in any run.
        return False
    for v in monitor.check_safety(state, include_binding=True):
        if v.requirement == requirement:
            return not v.holds
    return False


def _settled(state: SystemState, cfg: SimConfig) -> bool:
    from .controller import merge_step, spawn_inputs

    return spawn_inputs(state, cfg.mutant) is None and merge_step(state, cfg.mutant) is None


def minimize(c: Counterexample, sim_config: Optional[SimConfig] = None) -> Counterexample:
    """Greedy event-deletion with replay validation: the result is a
    counterexample of at most the original length violating the same
    requirement."""
    cfg = sim_config or SimConfig()

    # find the earliest prefix reaching the violation (strips any
    # post-violation suffix); no such prefix means not reproducible
    events = list(c.events)
    cut = None
    for i in range(len(events)):
        state, ok = apply_events(events[: i + 1], cfg)
        if not ok:
            break
        if requirement_fails(state, c.requirement, cfg):
            cut = i + 1
            break
    if cut is None:
        raise NotReproducible(c.requirement)
    events = events[:cut]

    # greedy deletion passes until a fixpoint: removing one event can make
    # earlier ones removable
    shrunk = True
    while shrunk:
        shrunk = False
        i = 0
        while i < len(events):
            candidate = events[:i] + events[i + 1 :]
            state, ok = apply_events(candidate, cfg)
            if ok and requirement_fails(state, c.requirement, cfg):
                events = candidate
                shrunk = True
            else:
                i += 1

    state, _ = apply_events(events, cfg)
    return Counterexample(
        c.requirement, c.witness, tuple(events), len(events),
        f"{fingerprint(state, include_clock=False):016x}",
    )
