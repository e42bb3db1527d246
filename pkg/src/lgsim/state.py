"""Domain types and the canonical system state.

Every value object here is immutable and hashable: a simulation step
produces a new ``SystemState`` instead of mutating one in place, which
makes states safe to share across explorer workers and trivially usable
as visited-set keys.

The flat serialization produced by :func:`canonical_record` is the wire
and file format used everywhere (traces, explorer reports, the session
server): field order is fixed, booleans serialize as JSON true/false and
enumerations as their conventional short names (hDown, ClosedLocked, ...).
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Iterator, Optional, Union


class HandleState(Enum):
    hDown = "hDown"
    hUp = "hUp"

    def opposite(self) -> "HandleState":
        return HandleState.hUp if self is HandleState.hDown else HandleState.hDown


class SwitchState(Enum):
    openSW = "openSW"
    closedSW = "closedSW"


class Door(Enum):
    FD = "FD"
    RD = "RD"
    LD = "LD"


class Gear(Enum):
    FG = "FG"
    LG = "LG"
    RG = "RG"


DOORS = (Door.FD, Door.RD, Door.LD)
GEARS = (Gear.FG, Gear.LG, Gear.RG)
CHANNELS = (1, 2, 3)
MODULES = (1, 2)


class DoorState(Enum):
    """Door automaton states (notOpenLocked / notOpenNotLocked are aliases
    of the first two used by some descriptions of the same automaton)."""

    ClosedLocked = "ClosedLocked"
    ClosedUnlocked = "ClosedUnlocked"
    OpenUnlocked = "OpenUnlocked"


class GearState(Enum):
    RetractedLocked = "RetractedLocked"
    RetractedUnlocked = "RetractedUnlocked"
    ExtendedUnlocked = "ExtendedUnlocked"
    ExtendedLocked = "ExtendedLocked"


class Light(Enum):
    lightON = "lightON"
    lightOFF = "lightOFF"


class ObsEvent(Enum):
    """Observable events stamped with logical-clock timestamps.

    downH / upH mark the pilot orders; dcge ("doors closed, gears
    extended") marks the end of an outgoing cycle and doge the symmetric
    end of a retraction cycle.
    """

    downH = "downH"
    upH = "upH"
    dcge = "dcge"
    doge = "doge"


OBS_EVENTS = (ObsEvent.downH, ObsEvent.upH, ObsEvent.dcge, ObsEvent.doge)


class Sensor(Enum):
    handle = "handle"
    analogical_switch = "analogical_switch"
    gear_extended = "gear_extended"
    gear_retracted = "gear_retracted"
    door_closed = "door_closed"
    door_open = "door_open"


SENSORS = tuple(Sensor)

# Sensors indexed per device (all others are indexed by channel only).
PER_DEVICE_SENSORS = {
    Sensor.gear_extended: GEARS,
    Sensor.gear_retracted: GEARS,
    Sensor.door_closed: DOORS,
    Sensor.door_open: DOORS,
}

Device = Union[Door, Gear]


class FaultMode(Enum):
    StuckWrong = "StuckWrong"  # negation of the true reading
    StuckTrue = "StuckTrue"
    StuckFalse = "StuckFalse"


@dataclass(frozen=True, slots=True)
class FaultSpec:
    """A failed micro-sensor channel.

    ``device`` is required exactly for the per-device sensors
    (gear_extended/gear_retracted/door_closed/door_open) and must be
    absent for handle and analogical_switch.  ``from_step`` is the
    macro-cycle at which the fault becomes active; the scheduler adds
    it to the live fault set at that cycle.
    """

    sensor: Sensor
    channel: int
    device: Optional[Device] = None
    mode: FaultMode = FaultMode.StuckWrong
    from_step: int = 0

    def __post_init__(self) -> None:
        if self.channel not in CHANNELS:
            raise ValueError(f"channel must be in 1..3, got {self.channel}")
        per_device = self.sensor in PER_DEVICE_SENSORS
        if per_device and self.device is None:
            raise ValueError(f"{self.sensor.value} fault needs a device")
        if not per_device and self.device is not None:
            raise ValueError(f"{self.sensor.value} fault takes no device")
        if per_device and self.device not in PER_DEVICE_SENSORS[self.sensor]:
            raise ValueError(f"device {self.device} does not match {self.sensor.value}")
        if self.sensor in (Sensor.handle, Sensor.analogical_switch) and self.mode is not FaultMode.StuckWrong:
            raise ValueError("handle/switch channels only support StuckWrong")
        if self.from_step < 0:
            raise ValueError("from_step must be >= 0")

    def key(self) -> str:
        dev = self.device.value if self.device is not None else "-"
        return f"{self.sensor.value}:{self.channel}:{dev}:{self.mode.value}:{self.from_step}"

    @staticmethod
    def from_key(key: str) -> "FaultSpec":
        sensor_s, channel_s, dev_s, mode_s, step_s = key.split(":")
        sensor = Sensor(sensor_s)
        device: Optional[Device] = None
        if dev_s != "-":
            device = Door(dev_s) if sensor in (Sensor.door_closed, Sensor.door_open) else Gear(dev_s)
        return FaultSpec(sensor, int(channel_s), device, FaultMode(mode_s), int(step_s))


@dataclass(frozen=True, slots=True)
class PlantState:
    """Physical side: door/gear automata, analogical switch, the pilot
    handle itself and the set of currently active sensor faults."""

    doors: tuple[DoorState, DoorState, DoorState]
    gears: tuple[GearState, GearState, GearState]
    switch: SwitchState
    pilot_handle: HandleState
    faults: tuple[FaultSpec, ...] = ()

    def door(self, d: Door) -> DoorState:
        return self.doors[DOORS.index(d)]

    def gear(self, g: Gear) -> GearState:
        return self.gears[GEARS.index(g)]


@dataclass(frozen=True, slots=True)
class SensedInputs:
    """Triplicated sensor image as seen by the digital part.

    Per-device boolean maps are stored channel-major:
    ``gear_extended[ch - 1][GEARS.index(g)]``.
    """

    handle: tuple[HandleState, HandleState, HandleState]
    analogical_switch: tuple[SwitchState, SwitchState, SwitchState]
    gear_extended: tuple[tuple[bool, bool, bool], ...]
    gear_retracted: tuple[tuple[bool, bool, bool], ...]
    door_closed: tuple[tuple[bool, bool, bool], ...]
    door_open: tuple[tuple[bool, bool, bool], ...]
    _hash: Optional[int] = field(default=None, init=False, compare=False, repr=False)

    def __hash__(self) -> int:
        h = self._hash
        if h is None:
            h = hash((self.handle, self.analogical_switch, self.gear_extended,
                      self.gear_retracted, self.door_closed, self.door_open))
            object.__setattr__(self, "_hash", h)
        return h

    def channel_value(self, sensor: Sensor, channel: int, device: Optional[Device] = None):
        if sensor is Sensor.handle:
            return self.handle[channel - 1]
        if sensor is Sensor.analogical_switch:
            return self.analogical_switch[channel - 1]
        row = getattr(self, sensor.value)[channel - 1]
        devices = PER_DEVICE_SENSORS[sensor]
        return row[devices.index(device)]


@dataclass(frozen=True, slots=True)
class OrderOutputs:
    general_EV: bool = False
    open_EV: bool = False
    close_EV: bool = False
    extend_EV: bool = False
    retract_EV: bool = False

    def maneuvering(self) -> bool:
        return self.open_EV or self.close_EV or self.extend_EV or self.retract_EV


ORDER_FIELDS = ("general_EV", "open_EV", "close_EV", "extend_EV", "retract_EV")


@dataclass(frozen=True, slots=True)
class StateOutputs:
    gears_locked_down: bool = False
    gears_maneuvering: bool = False
    anomaly: bool = False
    greenLight: Light = Light.lightOFF
    orangeLight: Light = Light.lightOFF
    redLight: Light = Light.lightOFF


STATE_BOOL_FIELDS = ("gears_locked_down", "gears_maneuvering", "anomaly")


def lights_for(locked_down: bool, maneuvering: bool, anomaly: bool) -> dict:
    """Each light mirrors its own flag; this keeps the light-binding
    invariant (gears_locked_down implies green on) true by construction."""
    return {
        "greenLight": Light.lightON if locked_down else Light.lightOFF,
        "orangeLight": Light.lightON if maneuvering else Light.lightOFF,
        "redLight": Light.lightON if anomaly else Light.lightOFF,
    }


@dataclass(frozen=True, slots=True)
class ControllerInternals:
    """Shared controller bookkeeping.

    nextOGseq / nextRTseq are indices into the outgoing / retraction step
    tables; 0 means the sequence is inactive and at most one of the two
    is nonzero.  channel_valid / disagree_count implement the voting
    health bookkeeping, indexed [sensor][channel - 1].  silent_modules
    records injected computing-module failures.
    """

    order: HandleState = HandleState.hDown
    nextOGseq: int = 0
    nextRTseq: int = 0
    endCycle: bool = True
    channel_valid: tuple[tuple[bool, bool, bool], ...] = tuple((True, True, True) for _ in SENSORS)
    disagree_count: tuple[tuple[int, int, int], ...] = tuple((0, 0, 0) for _ in SENSORS)
    silent_modules: tuple[bool, bool] = (False, False)

    def valid(self, sensor: Sensor, channel: int) -> bool:
        return self.channel_valid[SENSORS.index(sensor)][channel - 1]

    def valid_channels(self, sensor: Sensor) -> tuple[int, ...]:
        row = self.channel_valid[SENSORS.index(sensor)]
        return tuple(ch for ch in CHANNELS if row[ch - 1])

    def anomaly_armed(self) -> bool:
        for row in self.channel_valid:
            if row[0] + row[1] + row[2] <= 1:
                return True
        return False


@dataclass(frozen=True, slots=True)
class KIndexedState:
    """Per computing-module copies of the interface variables."""

    k_inputs: tuple[SensedInputs, SensedInputs]
    k_orders: tuple[OrderOutputs, OrderOutputs]
    k_state_outputs: tuple[StateOutputs, StateOutputs]

    def inputs(self, m: int) -> SensedInputs:
        return self.k_inputs[m - 1]

    def orders(self, m: int) -> OrderOutputs:
        return self.k_orders[m - 1]

    def state_outputs(self, m: int) -> StateOutputs:
        return self.k_state_outputs[m - 1]


@dataclass(frozen=True, slots=True)
class SystemState:
    """Complete snapshot of plant, controller and observation bookkeeping.

    ``llc`` is the logical clock: it increments by one on every fired
    event, so no two observations can share a timestamp.  ``ldate`` maps
    each observable event to its stamp (None when unstamped); it is reset
    at each pilot order so that one entry per observable suffices for a
    control cycle.
    """

    plant: PlantState
    inputs: SensedInputs
    internals: ControllerInternals
    kstate: KIndexedState
    orders: OrderOutputs
    outputs: StateOutputs
    llc: int = 0
    ldate: tuple[Optional[int], Optional[int], Optional[int], Optional[int]] = (None, None, None, None)

    def stamp_of(self, obs: ObsEvent) -> Optional[int]:
        return self.ldate[OBS_EVENTS.index(obs)]

    def stamps(self) -> dict[ObsEvent, int]:
        return {o: t for o, t in zip(OBS_EVENTS, self.ldate) if t is not None}


def _all_rows(value: bool) -> tuple[tuple[bool, bool, bool], ...]:
    return tuple((value, value, value) for _ in CHANNELS)


def truthful_inputs(plant: PlantState) -> SensedInputs:
    """Fault-free sensor image of a plant state."""
    return SensedInputs(
        handle=(plant.pilot_handle,) * 3,
        analogical_switch=(plant.switch,) * 3,
        gear_extended=tuple(
            tuple(plant.gear(g) is GearState.ExtendedLocked for g in GEARS) for _ in CHANNELS
        ),
        gear_retracted=tuple(
            tuple(plant.gear(g) is GearState.RetractedLocked for g in GEARS) for _ in CHANNELS
        ),
        door_closed=tuple(
            tuple(plant.door(d) is DoorState.ClosedLocked for d in DOORS) for _ in CHANNELS
        ),
        door_open=tuple(
            tuple(plant.door(d) is DoorState.OpenUnlocked for d in DOORS) for _ in CHANNELS
        ),
    )


def initial_state() -> SystemState:
    """Plane on ground: gears extended and locked, doors closed and
    locked, handle down, no order stimulated, green light on."""
    plant = PlantState(
        doors=(DoorState.ClosedLocked,) * 3,
        gears=(GearState.ExtendedLocked,) * 3,
        switch=SwitchState.openSW,
        pilot_handle=HandleState.hDown,
    )
    inputs = truthful_inputs(plant)
    orders = OrderOutputs()
    outputs = StateOutputs(
        gears_locked_down=True,
        gears_maneuvering=False,
        anomaly=False,
        **lights_for(True, False, False),
    )
    kstate = KIndexedState(
        k_inputs=(inputs, inputs),
        k_orders=(orders, orders),
        k_state_outputs=(outputs, outputs),
    )
    return SystemState(
        plant=plant,
        inputs=inputs,
        internals=ControllerInternals(),
        kstate=kstate,
        orders=orders,
        outputs=outputs,
    )


# --- canonical serialization ------------------------------------------------

def _sensed_values(inputs: SensedInputs) -> Iterator[object]:
    for h in inputs.handle:
        yield h.value
    for sw in inputs.analogical_switch:
        yield sw.value
    for rows in (inputs.gear_extended, inputs.gear_retracted, inputs.door_closed, inputs.door_open):
        for row in rows:
            yield from row


def _order_values(orders: OrderOutputs) -> tuple:
    return (orders.general_EV, orders.open_EV, orders.close_EV, orders.extend_EV, orders.retract_EV)


def _output_values(out: StateOutputs) -> tuple:
    return (out.gears_locked_down, out.gears_maneuvering, out.anomaly,
            out.greenLight.value, out.orangeLight.value, out.redLight.value)


def canonical_values(s: SystemState, include_clock: bool = True) -> tuple:
    """State as a flat value tuple in the documented field order.

    ``include_clock=False`` drops llc/ldate, which is the canonical form
    used by the explorer so that the strictly increasing clock does not
    make every state unique.
    """
    internals = s.internals
    values: list = [d.value for d in s.plant.doors]
    values += [g.value for g in s.plant.gears]
    values.append(s.plant.switch.value)
    values.append(s.plant.pilot_handle.value)
    values.append(",".join(sorted(f.key() for f in s.plant.faults)))
    values.extend(_sensed_values(s.inputs))
    values.append(internals.order.value)
    values += [internals.nextOGseq, internals.nextRTseq, internals.endCycle]
    for row in internals.channel_valid:
        values.extend(row)
    for row in internals.disagree_count:
        values.extend(row)
    values.extend(internals.silent_modules)
    for m in MODULES:
        values.extend(_sensed_values(s.kstate.inputs(m)))
        values.extend(_order_values(s.kstate.orders(m)))
        values.extend(_output_values(s.kstate.state_outputs(m)))
    values.extend(_order_values(s.orders))
    values.extend(_output_values(s.outputs))
    if include_clock:
        values.append(s.llc)
        values += [-1 if t is None else t for t in s.ldate]
    return tuple(values)


def _sensed_keys(prefix: str) -> list[str]:
    keys = [f"{prefix}handle.{ch}" for ch in CHANNELS]
    keys += [f"{prefix}analogical_switch.{ch}" for ch in CHANNELS]
    for name, devices in (
        ("gear_extended", GEARS),
        ("gear_retracted", GEARS),
        ("door_closed", DOORS),
        ("door_open", DOORS),
    ):
        keys += [f"{prefix}{name}.{ch}.{dev.value}" for ch in CHANNELS for dev in devices]
    return keys


def _canonical_keys() -> tuple[str, ...]:
    keys = [f"doorState.{d.value}" for d in DOORS]
    keys += [f"gearState.{g.value}" for g in GEARS]
    keys += ["switch", "pilot_handle", "faults"]
    keys += _sensed_keys("")
    keys += ["order", "nextOGseq", "nextRTseq", "endCycle"]
    keys += [f"channel_valid.{sensor.value}.{ch}" for sensor in SENSORS for ch in CHANNELS]
    keys += [f"disagree_count.{sensor.value}.{ch}" for sensor in SENSORS for ch in CHANNELS]
    keys += [f"module_silent.{m}" for m in MODULES]
    for m in MODULES:
        keys += _sensed_keys(f"k{m}.")
        keys += [f"k{m}.{f}" for f in ORDER_FIELDS]
        keys += [f"k{m}.{f}" for f in STATE_BOOL_FIELDS]
        keys += [f"k{m}.greenLight", f"k{m}.orangeLight", f"k{m}.redLight"]
    keys += list(ORDER_FIELDS)
    keys += list(STATE_BOOL_FIELDS) + ["greenLight", "orangeLight", "redLight"]
    return tuple(keys)


CANONICAL_KEYS_NOCLOCK = _canonical_keys()
CANONICAL_KEYS = CANONICAL_KEYS_NOCLOCK + ("llc",) + tuple(f"ldate.{o.value}" for o in OBS_EVENTS)


def canonical_items(s: SystemState, include_clock: bool = True) -> Iterator[tuple[str, object]]:
    keys = CANONICAL_KEYS if include_clock else CANONICAL_KEYS_NOCLOCK
    return zip(keys, canonical_values(s, include_clock))


def canonical_record(s: SystemState, include_clock: bool = True) -> dict[str, object]:
    return dict(canonical_items(s, include_clock))


def fingerprint(s: SystemState, include_clock: bool = True) -> int:
    """64-bit stable digest of the canonical record.

    Deterministic across processes (no hash seeding) and independent of
    any trace bookkeeping; with ``include_clock=False`` two states that
    differ only in llc/ldate collide on purpose.
    """
    payload = repr(canonical_values(s, include_clock))
    return int.from_bytes(hashlib.blake2b(payload.encode(), digest_size=8).digest(), "big")


def state_delta(before: SystemState, after: SystemState) -> dict[str, list]:
    """Changed canonical fields as {field: [old, new]} (clock included)."""
    old = canonical_record(before)
    new = canonical_record(after)
    return {k: [old[k], new[k]] for k in old if old[k] != new[k]}


def evolve(s: SystemState, **fields) -> SystemState:
    return replace(s, **fields)
