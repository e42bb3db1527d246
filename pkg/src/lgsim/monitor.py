"""Runtime monitor: every formalized requirement as a predicate.

State predicates (R21..R51, the sensor consistency check ANO and the
module binding check BIND) are evaluated on single states; the
reachability predicates R11bis/R12bis are evaluated on the observation
log of a completed control cycle.

All predicates are conditioned on anomaly = FALSE: they specify the
normal mode, and once the permanent-failure flag latches the controller
deliberately freezes, which would otherwise flag every subsequent state.

BIND compares the global interface variables against their module
copies.  It only holds at phase-consistent cuts (the staged copy of
inputs into modules and of module outputs into the merged orders makes
it transiently false mid-phase by construction), so the scheduler checks
it at macro-cycle boundaries.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .controller import merge_outputs, vote_view
from .state import (
    CHANNELS,
    DOORS,
    GEARS,
    MODULES,
    HandleState,
    ObsEvent,
    SystemState,
    evolve,
)

STATE_REQUIREMENTS = ("R21", "R22", "R31", "R32", "R41", "R42", "R51", "ANO")
CYCLE_REQUIREMENTS = ("R11bis", "R12bis")


@dataclass(frozen=True, slots=True)
class Verdict:
    requirement: str
    holds: bool
    witness: Optional[str] = None
    position: Optional[int] = None

    def at(self, position: int) -> "Verdict":
        return Verdict(self.requirement, self.holds, self.witness, position)


@dataclass(frozen=True, slots=True)
class ObservationLog:
    """ldate snapshot plus the cycle bookkeeping needed by R1."""

    stamps: dict
    end_cycle: bool
    llc: int


class IncompleteCycle(Exception):
    """A control cycle started but its end marker was never stamped; a
    warning at trace end, not a violation."""


def _ok(req: str) -> Verdict:
    return Verdict(req, True)


def _fail(req: str, witness: str) -> Verdict:
    return Verdict(req, False, witness)


def check_safety(s: SystemState, include_binding: bool = True) -> list[Verdict]:
    """Evaluate every state predicate; pure (never touches the state)."""
    out: list[Verdict] = []
    if s.outputs.anomaly:
        return [_ok(r) for r in STATE_REQUIREMENTS] + ([_ok("BIND")] if include_binding else [])

    view = vote_view(s.inputs, s.internals.channel_valid)
    order = s.internals.order

    # R21/R22: an order cannot contradict the (trusted) handle reading.
    if order is HandleState.hDown and view.handle is HandleState.hUp:
        out.append(_fail("R21", "order=hDown but voted handle reads hUp"))
    else:
        out.append(_ok("R21"))
    if order is HandleState.hUp and view.handle is HandleState.hDown:
        out.append(_fail("R22", "order=hUp but voted handle reads hDown"))
    else:
        out.append(_ok("R22"))

    # R31/R32: gears may only maneuver with all doors seen open
    # (checked on the raw sensed image, all nine entries).
    for req, valve in (("R31", s.orders.extend_EV), ("R32", s.orders.retract_EV)):
        if valve:
            bad = [
                (ch, d.value)
                for ch in CHANNELS
                for i, d in enumerate(DOORS)
                if not s.inputs.door_open[ch - 1][i]
            ]
            if bad:
                out.append(_fail(req, f"gear valve on but door_open{bad[0]}=FALSE"))
                continue
        out.append(_ok(req))

    # R41/R42: antagonistic valves are never stimulated together.
    if s.orders.open_EV and s.orders.close_EV:
        out.append(_fail("R41", "open_EV and close_EV both TRUE"))
    else:
        out.append(_ok("R41"))
    if s.orders.extend_EV and s.orders.retract_EV:
        out.append(_fail("R42", "extend_EV and retract_EV both TRUE"))
    else:
        out.append(_ok("R42"))

    # R51: no maneuvering without hydraulic pressure.
    if s.orders.maneuvering() and not s.orders.general_EV:
        out.append(_fail("R51", "maneuvering valve on with general_EV=FALSE"))
    else:
        out.append(_ok("R51"))

    out.append(check_sensor_consistency(s))
    if include_binding:
        out.append(check_binding(s))
    return out


def safety_violations(s: SystemState) -> list[Verdict]:
    """Failures-only evaluation of the per-step state predicates (same
    semantics as check_safety without BIND; the scheduler's hot path)."""
    if s.outputs.anomaly:
        return []
    out: list[Verdict] = []
    order = s.internals.order
    orders = s.orders
    voted_handle = vote_view(s.inputs, s.internals.channel_valid).handle
    if order is HandleState.hDown and voted_handle is HandleState.hUp:
        out.append(_fail("R21", "order=hDown but voted handle reads hUp"))
    elif order is HandleState.hUp and voted_handle is HandleState.hDown:
        out.append(_fail("R22", "order=hUp but voted handle reads hDown"))
    if orders.extend_EV or orders.retract_EV:
        doors_open = all(all(row) for row in s.inputs.door_open)
        if not doors_open:
            if orders.extend_EV:
                out.append(_fail("R31", "gear valve on but a door_open entry is FALSE"))
            if orders.retract_EV:
                out.append(_fail("R32", "gear valve on but a door_open entry is FALSE"))
    if orders.open_EV and orders.close_EV:
        out.append(_fail("R41", "open_EV and close_EV both TRUE"))
    if orders.extend_EV and orders.retract_EV:
        out.append(_fail("R42", "extend_EV and retract_EV both TRUE"))
    if not orders.general_EV and (
        orders.open_EV or orders.close_EV or orders.extend_EV or orders.retract_EV
    ):
        out.append(_fail("R51", "maneuvering valve on with general_EV=FALSE"))
    ano = check_sensor_consistency(s)
    if not ano.holds:
        out.append(ano)
    return out


def check_sensor_consistency(s: SystemState) -> Verdict:
    """ANO: per channel and device, a door is never seen closed and open
    at once, nor a gear extended and retracted at once."""
    for ch in CHANNELS:
        for i, d in enumerate(DOORS):
            if s.inputs.door_closed[ch - 1][i] and s.inputs.door_open[ch - 1][i]:
                return _fail("ANO", f"channel {ch}, door {d.value}: closed and open both TRUE")
        for i, g in enumerate(GEARS):
            if s.inputs.gear_extended[ch - 1][i] and s.inputs.gear_retracted[ch - 1][i]:
                return _fail("ANO", f"channel {ch}, gear {g.value}: extended and retracted both TRUE")
    return _ok("ANO")


def check_binding(s: SystemState) -> Verdict:
    """BIND: each module sees exactly the spawned global inputs, and the
    merged outputs are exactly the OR-promotion of the module outputs."""
    for m in MODULES:
        if s.kstate.inputs(m) != s.inputs:
            return _fail("BIND", f"module {m} input copy differs from the global inputs")
    orders, outputs = merge_outputs(s.kstate)
    if s.orders != orders:
        return _fail("BIND", "global orders differ from the OR of the module orders")
    if (
        s.outputs.gears_locked_down != outputs.gears_locked_down
        or s.outputs.gears_maneuvering != outputs.gears_maneuvering
        or s.outputs.anomaly != outputs.anomaly
    ):
        return _fail("BIND", "global state outputs differ from the OR of the module outputs")
    return _ok("BIND")


# --- observation stamping and the reachability predicates ---------------------

def stamp(s: SystemState, obs: ObsEvent) -> SystemState:
    """Record that ``obs`` happened now.  The logical clock is fresh for
    every fired event, so stamps stay injective."""
    idx = ("downH", "upH", "dcge", "doge").index(obs.value)
    ldate = list(s.ldate)
    ldate[idx] = s.llc
    return evolve(s, ldate=tuple(ldate))


def observation_log(s: SystemState) -> ObservationLog:
    return ObservationLog(stamps=s.stamps(), end_cycle=s.internals.endCycle, llc=s.llc)


def check_R1(log: ObservationLog, outgoing: bool) -> Verdict:
    """R11bis (outgoing) / R12bis (retraction).

    A completed cycle whose end marker is stamped at dj must contain the
    matching pilot order stamped at some di < dj, with no inverse order
    stamped anywhere in [di, dj).  Raises IncompleteCycle when there is
    no end marker to judge.
    """
    req = "R11bis" if outgoing else "R12bis"
    end_marker = ObsEvent.dcge if outgoing else ObsEvent.doge
    start_marker = ObsEvent.downH if outgoing else ObsEvent.upH
    interrupter = ObsEvent.upH if outgoing else ObsEvent.downH

    if not log.end_cycle or end_marker not in log.stamps:
        raise IncompleteCycle(req)
    dj = log.stamps[end_marker]
    if dj >= log.llc:
        raise IncompleteCycle(f"{req}: end marker not in the past of the clock")
    if start_marker not in log.stamps:
        return _fail(req, f"no {start_marker.value} stamp exists before {end_marker.value}@{dj}")
    di = log.stamps[start_marker]
    if di >= dj:
        return _fail(req, f"{start_marker.value}@{di} not before {end_marker.value}@{dj}")
    t = log.stamps.get(interrupter)
    if t is not None and di <= t < dj:
        return _fail(req, f"{interrupter.value}@{t} interrupts [{di}, {dj})")
    return _ok(req)


def violations(verdicts: list[Verdict]) -> list[Verdict]:
    return [v for v in verdicts if not v.holds]
