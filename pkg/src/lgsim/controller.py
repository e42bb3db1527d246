"""Digital part: channel voting, the two redundant computing modules,
the outgoing/retraction step tables, output monitoring and merging.

The two modules run the same pure logic over spawned input copies; their
sequence guards are evaluated against a snapshot of the shared sequence
position taken when the decision phase starts, so both modules fire the
same step of the same cycle regardless of evaluation order and their
order outputs stay identical unless a failure is injected.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from functools import lru_cache
from typing import Callable, NamedTuple, Optional

from .config import Mutant
from .state import (
    CHANNELS,
    DOORS,
    GEARS,
    SENSORS,
    ControllerInternals,
    HandleState,
    KIndexedState,
    Light,
    ObsEvent,
    OrderOutputs,
    SensedInputs,
    Sensor,
    StateOutputs,
    SwitchState,
    SystemState,
    evolve,
    lights_for,
)
from . import plant as plant_ops


class AllChannelsInvalid(Exception):
    """Raised by vote3 when no channel of a sensor can be trusted."""


class NoOpHandleMove(Exception):
    """Handle moves are edges: the pilot cannot re-issue the current order."""


@dataclass(frozen=True, slots=True)
class VoteResult:
    value: object  # None means no decision (caller keeps its previous value)
    valid_channels: tuple[int, ...]
    unanimous: bool
    dissenting: tuple[int, ...]


def vote3(values: tuple, valid: tuple[bool, bool, bool]) -> VoteResult:
    """Majority vote over the valid channels of one triplicated sensor.

    With three valid channels the minority channel is flagged; with two
    valid channels a disagreement cannot be arbitrated, so no value is
    produced and both channels are flagged.
    """
    chans = tuple(ch for ch in CHANNELS if valid[ch - 1])
    if not chans:
        raise AllChannelsInvalid
    vals = [values[ch - 1] for ch in chans]
    first = vals[0]
    if all(v == first for v in vals):
        return VoteResult(first, chans, True, ())
    if len(chans) == 2:
        return VoteResult(None, chans, False, chans)
    # three valid channels, 2-1 split
    for candidate in vals:
        if vals.count(candidate) == 2:
            dissent = tuple(ch for ch in chans if values[ch - 1] != candidate)
            return VoteResult(candidate, chans, False, dissent)
    return VoteResult(None, chans, False, chans)


class VoteView(NamedTuple):
    """All voted inputs of one module plus the per-channel dissent flags."""

    handle: Optional[HandleState]
    analogical_switch: Optional[SwitchState]
    gear_extended: tuple
    gear_retracted: tuple
    door_closed: tuple
    door_open: tuple
    dissent: frozenset


def _vote_or_none(values: tuple, valid: tuple, sensor: Sensor, dissent: set) -> object:
    chans = tuple(ch for ch in CHANNELS if valid[ch - 1])
    if not chans:
        return None
    res = vote3(values, valid)
    dissent.update((sensor, ch) for ch in res.dissenting)
    return res.value


@lru_cache(maxsize=16384)
def vote_view(inputs: SensedInputs, channel_valid: tuple) -> VoteView:
    dissent: set = set()

    def valid_row(sensor: Sensor) -> tuple:
        return channel_valid[SENSORS.index(sensor)]

    def per_device(sensor: Sensor, devices) -> tuple:
        rows = getattr(inputs, sensor.value)
        out = []
        for i in range(len(devices)):
            vals = tuple(rows[ch - 1][i] for ch in CHANNELS)
            out.append(_vote_or_none(vals, valid_row(sensor), sensor, dissent))
        return tuple(out)

    view = VoteView(
        handle=_vote_or_none(inputs.handle, valid_row(Sensor.handle), Sensor.handle, dissent),
        analogical_switch=_vote_or_none(
            inputs.analogical_switch,
            valid_row(Sensor.analogical_switch),
            Sensor.analogical_switch,
            dissent,
        ),
        gear_extended=per_device(Sensor.gear_extended, GEARS),
        gear_retracted=per_device(Sensor.gear_retracted, GEARS),
        door_closed=per_device(Sensor.door_closed, DOORS),
        door_open=per_device(Sensor.door_open, DOORS),
        dissent=frozenset(dissent),
    )
    return view


def _all_true(vals: tuple) -> bool:
    return all(v is True for v in vals)


def _all_false(vals: tuple) -> bool:
    return all(v is False for v in vals)


_ZERO_COUNTS = tuple((0, 0, 0) for _ in SENSORS)


def update_channel_health(internals: ControllerInternals, dissent: frozenset, threshold: int = 1) -> ControllerInternals:
    """Fold one round of dissent flags into the channel bookkeeping.

    A valid channel that dissented gets its counter bumped (and is
    invalidated at the threshold); a valid channel that agreed everywhere
    resets to zero.  Invalid channels never come back.
    """
    if not dissent and internals.disagree_count == _ZERO_COUNTS:
        return internals
    counts = [list(row) for row in internals.disagree_count]
    valid = [list(row) for row in internals.channel_valid]
    for si, sensor in enumerate(SENSORS):
        for ch in CHANNELS:
            if not valid[si][ch - 1]:
                continue
            if (sensor, ch) in dissent:
                counts[si][ch - 1] += 1
                if counts[si][ch - 1] >= threshold:
                    valid[si][ch - 1] = False
            else:
                counts[si][ch - 1] = 0
    new_counts = tuple(tuple(r) for r in counts)
    new_valid = tuple(tuple(r) for r in valid)
    if new_counts == internals.disagree_count and new_valid == internals.channel_valid:
        return internals
    return replace(internals, disagree_count=new_counts, channel_valid=new_valid)


# --- k-indexed plumbing -------------------------------------------------------

def _with_module(t: tuple, m: int, value) -> tuple:
    return (value, t[1]) if m == 1 else (t[0], value)


def spawn_inputs(state: SystemState, mutant: Optional[Mutant] = None) -> Optional[SystemState]:
    """Copy the global inputs into both modules (the binding between the
    interface variables and their module copies holds by construction).
    Returns None when nothing changes or the controller is down."""
    if state.outputs.anomaly:
        return None
    k = state.kstate
    new_inputs = (state.inputs, state.inputs if mutant is not Mutant.SkipSpawn else k.k_inputs[1])
    if new_inputs == k.k_inputs:
        return None
    return evolve(state, kstate=replace(k, k_inputs=new_inputs))


def health_step(state: SystemState, threshold: int = 1) -> Optional[SystemState]:
    if state.outputs.anomaly:
        return None
    view = vote_view(state.inputs, state.internals.channel_valid)
    internals = update_channel_health(state.internals, view.dissent, threshold)
    if internals is state.internals:
        return None
    return evolve(state, internals=internals)


def merge_outputs(k: KIndexedState, mutant: Optional[Mutant] = None) -> tuple[OrderOutputs, StateOutputs]:
    """Promote the module outputs to the digital part: every boolean is
    the OR of the two module values, and the cockpit lights mirror the
    merged state outputs."""
    o1, o2 = k.k_orders
    s1, s2 = k.k_state_outputs
    if mutant is Mutant.SwapMergeToAND:
        orders = OrderOutputs(
            o1.general_EV and o2.general_EV,
            o1.open_EV and o2.open_EV,
            o1.close_EV and o2.close_EV,
            o1.extend_EV and o2.extend_EV,
            o1.retract_EV and o2.retract_EV,
        )
        locked = s1.gears_locked_down and s2.gears_locked_down
        maneuvering = s1.gears_maneuvering and s2.gears_maneuvering
        anomaly = s1.anomaly and s2.anomaly
    else:
        orders = OrderOutputs(
            o1.general_EV or o2.general_EV,
            o1.open_EV or o2.open_EV,
            o1.close_EV or o2.close_EV,
            o1.extend_EV or o2.extend_EV,
            o1.retract_EV or o2.retract_EV,
        )
        locked = s1.gears_locked_down or s2.gears_locked_down
        maneuvering = s1.gears_maneuvering or s2.gears_maneuvering
        anomaly = s1.anomaly or s2.anomaly
    outputs = StateOutputs(locked, maneuvering, anomaly,
                           **lights_for(locked, maneuvering, anomaly))
    return orders, outputs


def merge_step(state: SystemState, mutant: Optional[Mutant] = None) -> Optional[SystemState]:
    orders, outputs = merge_outputs(state.kstate, mutant)
    if orders == state.orders and outputs == state.outputs:
        return None
    return evolve(state, orders=orders, outputs=outputs)


# --- monitoring events --------------------------------------------------------

def _module_down(state: SystemState, m: int) -> bool:
    return (
        state.outputs.anomaly
        or state.kstate.state_outputs(m).anomaly
        or state.internals.silent_modules[m - 1]
    )


def monitor_locked_down(state: SystemState, m: int) -> Optional[SystemState]:
    """gears_locked_down tracks "the three gears are seen locked in the
    extended position" under the module's voted sensor image."""
    if _module_down(state, m):
        return None
    view = vote_view(state.kstate.inputs(m), state.internals.channel_valid)
    if any(v is None for v in view.gear_extended):
        return None  # no decision: keep the previous value
    new = _all_true(view.gear_extended)
    out = state.kstate.state_outputs(m)
    if out.gears_locked_down == new:
        return None
    out = replace(out, gears_locked_down=new,
                  greenLight=Light.lightON if new else Light.lightOFF)
    k = replace(state.kstate, k_state_outputs=_with_module(state.kstate.k_state_outputs, m, out))
    return evolve(state, kstate=k)


def monitor_maneuvering(state: SystemState, m: int) -> Optional[SystemState]:
    if _module_down(state, m):
        return None
    new = state.kstate.orders(m).maneuvering()
    out = state.kstate.state_outputs(m)
    if out.gears_maneuvering == new:
        return None
    out = replace(out, gears_maneuvering=new,
                  orangeLight=Light.lightON if new else Light.lightOFF)
    k = replace(state.kstate, k_state_outputs=_with_module(state.kstate.k_state_outputs, m, out))
    return evolve(state, kstate=k)


def monitor_anomaly(state: SystemState, m: int) -> Optional[SystemState]:
    """Latches the module anomaly flag once the voting health leaves a
    sensor with at most one trusted channel.  Never resets."""
    out = state.kstate.state_outputs(m)
    if out.anomaly or state.internals.silent_modules[m - 1]:
        return None
    if not state.internals.anomaly_armed():
        return None
    out = replace(out, anomaly=True, redLight=Light.lightON)
    k = replace(state.kstate, k_state_outputs=_with_module(state.kstate.k_state_outputs, m, out))
    return evolve(state, kstate=k)


# --- outgoing / retraction step tables ----------------------------------------

class SeqSnapshot(NamedTuple):
    """Sequence position at the start of the decision phase; both modules
    evaluate their step guards against it."""

    order: HandleState
    nextOGseq: int
    nextRTseq: int


def snapshot(internals: ControllerInternals) -> SeqSnapshot:
    return SeqSnapshot(internals.order, internals.nextOGseq, internals.nextRTseq)


@dataclass(frozen=True, slots=True)
class SeqStep:
    index: int
    name: str
    valve: Optional[str]
    value: bool
    guard: Optional[Callable[[OrderOutputs, VoteView, HandleState], bool]] = None
    ends_cycle: bool = False


def _g_doors_open(o: OrderOutputs, v: VoteView, h: HandleState) -> bool:
    return (
        o.general_EV
        and v.handle is h
        and _all_true(v.door_open)
        and _all_false(v.door_closed)
    )


def _g_doors_open_nodoorcheck(o: OrderOutputs, v: VoteView, h: HandleState) -> bool:
    # DropDoorGuardOnExtend: the door position conjuncts are gone.
    return o.general_EV and v.handle is h


OUTGOING = (
    SeqStep(1, "stmlt_general_EV", "general_EV", True),
    SeqStep(2, "stmlt_door_opening", "open_EV", True,
            lambda o, v, h: o.general_EV and not o.close_EV),
    SeqStep(3, "stmlt_gear_outgoing", "extend_EV", True,
            lambda o, v, h: _g_doors_open(o, v, h) and not o.retract_EV),
    SeqStep(4, "stop_stmlt_gear_outgoing", "extend_EV", False,
            lambda o, v, h: _all_true(v.gear_extended)),
    SeqStep(5, "stop_stmlt_door_opening", "open_EV", False),
    SeqStep(6, "stmlt_door_closure", "close_EV", True,
            lambda o, v, h: o.general_EV and not o.open_EV),
    SeqStep(7, "stop_stmlt_door_closure", "close_EV", False,
            lambda o, v, h: _all_true(v.door_closed) and _all_false(v.door_open)),
    SeqStep(8, "stop_stmlt_general_EV", "general_EV", False, ends_cycle=True),
)

RETRACTION = (
    SeqStep(1, "stmlt_general_EV", "general_EV", True),
    SeqStep(2, "stmlt_door_opening", "open_EV", True,
            lambda o, v, h: o.general_EV and not o.close_EV),
    SeqStep(3, "stmlt_gear_retraction", "retract_EV", True,
            lambda o, v, h: _g_doors_open(o, v, h) and not o.extend_EV),
    SeqStep(4, "stop_stmlt_gear_retraction", "retract_EV", False,
            lambda o, v, h: _all_true(v.gear_retracted)),
    SeqStep(5, "stop_stmlt_door_opening", "open_EV", False),
    SeqStep(6, "stmlt_door_closure", "close_EV", True,
            lambda o, v, h: o.general_EV and not o.open_EV),
    SeqStep(7, "stop_stmlt_door_closure", "close_EV", False,
            lambda o, v, h: _all_true(v.door_closed) and _all_false(v.door_open)),
    SeqStep(8, "stop_stmlt_general_EV", "general_EV", False, ends_cycle=True),
)


def _mutated_step(step: SeqStep, outgoing: bool, mutant: Optional[Mutant]) -> tuple[SeqStep, bool]:
    """Returns (step, ignore_counter).  Exactly one guard changes per mutant."""
    if mutant is Mutant.DropDoorGuardOnExtend and outgoing and step.index == 3:
        return replace(step, guard=lambda o, v, h: _g_doors_open_nodoorcheck(o, v, h) and not o.retract_EV), False
    if mutant is Mutant.DropGeneralEVGuard and not outgoing and step.index == 8:
        return step, True
    return step, False


def seq_step_fire(
    state: SystemState,
    snap: SeqSnapshot,
    m: int,
    step: SeqStep,
    outgoing: bool,
    mutant: Optional[Mutant] = None,
) -> Optional[SystemState]:
    """Fire one step of one module's sequence, or None when disabled.

    The position guard reads the decision-phase snapshot; the write goes
    to the live state (both modules propose the same advance, so the
    second write is idempotent on the shared counter).
    """
    if _module_down(state, m):
        return None
    want_order = HandleState.hDown if outgoing else HandleState.hUp
    if snap.order is not want_order:
        return None
    step, ignore_counter = _mutated_step(step, outgoing, mutant)
    counter = snap.nextOGseq if outgoing else snap.nextRTseq
    if not ignore_counter and counter != step.index:
        return None
    if ignore_counter and counter == 0:
        return None  # no active sequence to cut short
    if step.guard is not None:
        view = vote_view(state.kstate.inputs(m), state.internals.channel_valid)
        if not step.guard(state.kstate.orders(m), view, want_order):
            return None

    new_orders = state.kstate.orders(m)
    if step.valve is not None:
        new_orders = replace(new_orders, **{step.valve: step.value})
    next_index = 0 if step.ends_cycle else step.index + 1
    internals = state.internals
    if outgoing:
        if internals.nextOGseq != next_index:
            internals = replace(internals, nextOGseq=next_index)
    else:
        if internals.nextRTseq != next_index:
            internals = replace(internals, nextRTseq=next_index)
    if step.ends_cycle and not internals.endCycle:
        internals = replace(internals, endCycle=True)

    if new_orders == state.kstate.orders(m) and internals is state.internals:
        return None
    k = replace(state.kstate, k_orders=_with_module(state.kstate.k_orders, m, new_orders))
    return evolve(state, kstate=k, internals=internals)


# --- pilot handle --------------------------------------------------------------

# Resume step of the opposite sequence when the pilot inverts the order at
# step index s, plus the maneuver valves that must drop immediately
# ("reverse the gear valve first").  Indexed by the aborted sequence's
# position 0..8; positions 3..6 mean the doors are already open (or
# opening), 7..8 that they are closing again.
INVERSION_RESUME: dict[int, tuple[int, tuple[str, ...]]] = {
    0: (1, ()),
    1: (1, ()),
    2: (2, ()),
    3: (3, ()),
    4: (3, ("extend_EV", "retract_EV")),
    5: (3, ()),
    6: (3, ()),
    7: (2, ("close_EV",)),
    8: (2, ()),
}


def handle_event(state: SystemState, direction: HandleState) -> SystemState:
    """Pilot handle move: an edge, never a level.

    Atomically moves the lever, closes the analogical switch, refreshes
    the handle sensor channels, flips the internal order, resets the
    observation log (stamping downH/upH at the current clock) and enters
    the opposite sequence at its resume step.  With a latched anomaly
    only the physical effects happen; the controller ignores the lever.
    """
    if direction is state.plant.pilot_handle and (
        state.outputs.anomaly or direction is state.internals.order
    ):
        raise NoOpHandleMove(f"handle already {direction.value}")

    plant = replace(state.plant, pilot_handle=direction, switch=SwitchState.closedSW)
    inputs = replace(state.inputs, handle=plant_ops.sense_handle_channels(plant))
    if state.outputs.anomaly:
        return evolve(state, plant=plant, inputs=inputs)

    if direction is HandleState.hUp:
        resume, cleared = INVERSION_RESUME[state.internals.nextOGseq]
        og, rt = 0, resume
    else:
        resume, cleared = INVERSION_RESUME[state.internals.nextRTseq]
        og, rt = resume, 0
    internals = replace(
        state.internals, order=direction, nextOGseq=og, nextRTseq=rt, endCycle=False
    )

    kstate, orders = state.kstate, state.orders
    if cleared:
        drops = {f: False for f in cleared}
        k_orders = tuple(replace(o, **drops) for o in kstate.k_orders)
        kstate = replace(kstate, k_orders=k_orders)
        orders = replace(orders, **drops)

    obs = ObsEvent.upH if direction is HandleState.hUp else ObsEvent.downH
    ldate: list = [None, None, None, None]
    ldate[("downH", "upH", "dcge", "doge").index(obs.value)] = state.llc
    return evolve(
        state,
        plant=plant,
        inputs=inputs,
        internals=internals,
        kstate=kstate,
        orders=orders,
        ldate=tuple(ldate),
    )


def force_module_silent(state: SystemState, m: int) -> SystemState:
    """Module failure injection: the module stops firing events and all
    its outputs drop to FALSE."""
    if state.internals.silent_modules[m - 1]:
        return state
    internals = replace(
        state.internals, silent_modules=_with_module(state.internals.silent_modules, m, True)
    )
    k = replace(
        state.kstate,
        k_orders=_with_module(state.kstate.k_orders, m, OrderOutputs()),
        k_state_outputs=_with_module(state.kstate.k_state_outputs, m, StateOutputs()),
    )
    return evolve(state, internals=internals, kstate=k)
