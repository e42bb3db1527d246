"""Physical environment: door and gear automata, analogical switch and
the triplicated micro-sensors with fault injection.

All functions are pure; transition functions return None when no edge is
enabled (the hydraulic supply gates everything: without general_EV the
maneuvering valves have no effect).
"""

from __future__ import annotations

from dataclasses import replace
from functools import lru_cache
from typing import Optional

from .state import (
    CHANNELS,
    DOORS,
    GEARS,
    Door,
    DoorState,
    FaultMode,
    FaultSpec,
    Gear,
    GearState,
    HandleState,
    OrderOutputs,
    PlantState,
    SensedInputs,
    Sensor,
    SwitchState,
    truthful_inputs,
)

# Door automaton edges, keyed by the driving valve.
_DOOR_OPENING = {
    DoorState.ClosedLocked: DoorState.ClosedUnlocked,
    DoorState.ClosedUnlocked: DoorState.OpenUnlocked,
}
_DOOR_CLOSING = {
    DoorState.OpenUnlocked: DoorState.ClosedUnlocked,
    DoorState.ClosedUnlocked: DoorState.ClosedLocked,
}

_GEAR_EXTENDING = {
    GearState.RetractedLocked: GearState.RetractedUnlocked,
    GearState.RetractedUnlocked: GearState.ExtendedUnlocked,
    GearState.ExtendedUnlocked: GearState.ExtendedLocked,
}
_GEAR_RETRACTING = {
    GearState.ExtendedLocked: GearState.ExtendedUnlocked,
    GearState.ExtendedUnlocked: GearState.RetractedUnlocked,
    GearState.RetractedUnlocked: GearState.RetractedLocked,
}

DOOR_EDGES = frozenset(
    list(_DOOR_OPENING.items()) + list(_DOOR_CLOSING.items())
)
GEAR_EDGES = frozenset(
    list(_GEAR_EXTENDING.items()) + list(_GEAR_RETRACTING.items())
)


def _step_devices(states: tuple, table: dict, interleaved: bool) -> Optional[tuple]:
    """Advance all movable devices together, or only the first movable one
    in interleaved mode.  None when no device can move."""
    if interleaved:
        out = list(states)
        for i, st in enumerate(states):
            if st in table:
                out[i] = table[st]
                return tuple(out)
        return None
    moved = tuple(table.get(st, st) for st in states)
    return moved if moved != states else None


def door_transition(plant: PlantState, orders: OrderOutputs, interleaved: bool = False) -> Optional[PlantState]:
    """One firing of the door automaton under the current valve orders.

    Opening wins if both door valves are (illegally) stimulated; that
    situation is a monitored requirement violation, not a plant error.
    """
    if not orders.general_EV:
        return None
    table = None
    if orders.open_EV:
        table = _DOOR_OPENING
    elif orders.close_EV:
        table = _DOOR_CLOSING
    if table is None:
        return None
    moved = _step_devices(plant.doors, table, interleaved)
    return None if moved is None else replace(plant, doors=moved)


def gear_transition(plant: PlantState, orders: OrderOutputs, interleaved: bool = False) -> Optional[PlantState]:
    """One firing of the gear automaton (extension or retraction chain)."""
    if not orders.general_EV:
        return None
    table = None
    if orders.extend_EV:
        table = _GEAR_EXTENDING
    elif orders.retract_EV:
        table = _GEAR_RETRACTING
    if table is None:
        return None
    moved = _step_devices(plant.gears, table, interleaved)
    return None if moved is None else replace(plant, gears=moved)


def switch_transition(plant: PlantState, handle_moved: bool = False, cycle_ended: bool = False) -> PlantState:
    """Analogical switch: closes on any handle move, reopens at cycle end."""
    if handle_moved:
        target = SwitchState.closedSW
    elif cycle_ended:
        target = SwitchState.openSW
    else:
        return plant
    return plant if plant.switch is target else replace(plant, switch=target)


def _fault_for(faults, sensor: Sensor, channel: int, device=None) -> Optional[FaultSpec]:
    for f in faults:
        if f.sensor is sensor and f.channel == channel and f.device == device:
            return f
    return None


def _faulty_bool(truth: bool, mode: FaultMode) -> bool:
    if mode is FaultMode.StuckWrong:
        return not truth
    return mode is FaultMode.StuckTrue


@lru_cache(maxsize=4096)
def sense(plant: PlantState) -> SensedInputs:
    """Refresh the whole triplicated sensor image from the plant.

    Channels with an active fault report the fault value (StuckWrong is
    the negation of the true reading); everything else reports the truth.
    """
    truth = truthful_inputs(plant)
    if not plant.faults:
        return truth

    handle = list(truth.handle)
    switch = list(truth.analogical_switch)
    for ch in CHANNELS:
        if _fault_for(plant.faults, Sensor.handle, ch) is not None:
            handle[ch - 1] = handle[ch - 1].opposite()
        if _fault_for(plant.faults, Sensor.analogical_switch, ch) is not None:
            switch[ch - 1] = (
                SwitchState.closedSW if switch[ch - 1] is SwitchState.openSW else SwitchState.openSW
            )

    def patched(name: str, devices) -> tuple:
        rows = [list(r) for r in getattr(truth, name)]
        for ch in CHANNELS:
            for i, dev in enumerate(devices):
                f = _fault_for(plant.faults, Sensor(name), ch, dev)
                if f is not None:
                    rows[ch - 1][i] = _faulty_bool(rows[ch - 1][i], f.mode)
        return tuple(tuple(r) for r in rows)

    return SensedInputs(
        handle=tuple(handle),
        analogical_switch=tuple(switch),
        gear_extended=patched("gear_extended", GEARS),
        gear_retracted=patched("gear_retracted", GEARS),
        door_closed=patched("door_closed", DOORS),
        door_open=patched("door_open", DOORS),
    )


def sense_handle_channels(plant: PlantState) -> tuple[HandleState, HandleState, HandleState]:
    """Fresh handle channels only (the handle sensor reacts to the lever
    itself, so its image updates with the pilot action)."""
    out = []
    for ch in CHANNELS:
        v = plant.pilot_handle
        if _fault_for(plant.faults, Sensor.handle, ch) is not None:
            v = v.opposite()
        out.append(v)
    return tuple(out)


def all_single_channel_faults(mode: FaultMode = FaultMode.StuckWrong) -> list[FaultSpec]:
    """Every injectable single micro-sensor fault target."""
    out: list[FaultSpec] = []
    for ch in CHANNELS:
        out.append(FaultSpec(Sensor.handle, ch))
        out.append(FaultSpec(Sensor.analogical_switch, ch))
        for sensor, devices in (
            (Sensor.gear_extended, GEARS),
            (Sensor.gear_retracted, GEARS),
            (Sensor.door_closed, DOORS),
            (Sensor.door_open, DOORS),
        ):
            for dev in devices:
                out.append(FaultSpec(sensor, ch, dev, mode))
    return out
