import { describe, expect, it } from "vitest";

import { StateMessage, Snapshot } from "../src/protocol.js";
import { buildViewModel, ClientStatus } from "../src/viewModel.js";

const OK_STATUS: ClientStatus = { connected: true, stale: false, leverPending: false, lastError: "" };

function snapshot(overrides: Record<string, unknown> = {}): Snapshot {
  const base: Record<string, unknown> = {
    order: "hDown",
    pilot_handle: "hDown",
    nextOGseq: 0,
    nextRTseq: 0,
    endCycle: true,
    general_EV: false,
    open_EV: false,
    close_EV: false,
    extend_EV: false,
    retract_EV: false,
    gears_locked_down: true,
    gears_maneuvering: false,
    anomaly: false,
    greenLight: "lightON",
    orangeLight: "lightOFF",
    redLight: "lightOFF",
    switch: "openSW",
    faults: "",
    llc: 0,
    "doorState.FD": "ClosedLocked",
    "doorState.RD": "ClosedLocked",
    "doorState.LD": "ClosedLocked",
    "gearState.FG": "ExtendedLocked",
    "gearState.LG": "ExtendedLocked",
    "gearState.RG": "ExtendedLocked",
  };
  for (const sensor of ["handle", "analogical_switch"]) {
    for (const ch of [1, 2, 3]) {
      base[`${sensor}.${ch}`] = sensor === "handle" ? "hDown" : "openSW";
      base[`channel_valid.${sensor}.${ch}`] = true;
    }
  }
  for (const [sensor, devices] of [
    ["gear_extended", ["FG", "LG", "RG"]],
    ["gear_retracted", ["FG", "LG", "RG"]],
    ["door_closed", ["FD", "RD", "LD"]],
    ["door_open", ["FD", "RD", "LD"]],
  ] as const) {
    for (const ch of [1, 2, 3]) {
      base[`channel_valid.${sensor}.${ch}`] = true;
      for (const dev of devices) {
        base[`${sensor}.${ch}.${dev}`] = sensor === "gear_extended" || sensor === "door_closed";
      }
    }
  }
  return { ...base, ...overrides } as Snapshot;
}

function push(overrides: Record<string, unknown> = {}, verdicts: StateMessage["verdicts"] = []): StateMessage {
  return {
    type: "state",
    snapshot: snapshot(overrides),
    verdicts,
    enabled_events: [],
    llc: 0,
    cycle: 0,
    paused: true,
  };
}

describe("lamps mirror the snapshot exactly", () => {
  it("locked down lights green only", () => {
    const vm = buildViewModel(push({ gears_locked_down: true }), OK_STATUS);
    expect(vm.lamps).toEqual({ green: true, orange: false, red: false });
  });

  it("anomaly lights red and disables everything but reset", () => {
    const vm = buildViewModel(
      push({ anomaly: true, redLight: "lightON", greenLight: "lightOFF" }),
      OK_STATUS,
    );
    expect(vm.lamps.red).toBe(true);
    expect(vm.lever.disabled).toBe(true);
    expect(vm.lever.reason).toBe("anomaly");
    expect(vm.faultInjectionEnabled).toBe(false);
  });
});

describe("sequence and schematic", () => {
  it("highlights the pending retraction step", () => {
    const vm = buildViewModel(push({ nextRTseq: 1, endCycle: false, order: "hUp" }), OK_STATUS);
    expect(vm.sequence).toEqual({ active: "retraction", step: 1, endCycle: false });
    expect(vm.lever.position).toBe("UP");
  });

  it("mid-outgoing step 3 shows the extend badge path and open doors", () => {
    const vm = buildViewModel(
      push({
        nextOGseq: 3,
        endCycle: false,
        general_EV: true,
        open_EV: true,
        "doorState.FD": "OpenUnlocked",
        "doorState.RD": "OpenUnlocked",
        "doorState.LD": "OpenUnlocked",
      }),
      OK_STATUS,
    );
    expect(vm.sequence).toEqual({ active: "outgoing", step: 3, endCycle: false });
    expect(vm.doors.every((d) => d.state === "OpenUnlocked")).toBe(true);
    expect(vm.valves.find((v) => v.name === "open_EV")?.on).toBe(true);
  });
});

describe("channel table", () => {
  it("flags invalid channels", () => {
    const vm = buildViewModel(push({ "channel_valid.gear_extended.2": false }), OK_STATUS);
    const bad = vm.channels.filter((c) => !c.valid);
    expect(bad.length).toBe(3); // one gear_extended channel across its three devices
    expect(bad.every((c) => c.sensor === "gear_extended" && c.channel === 2)).toBe(true);
  });

  it("lists every triplicated reading", () => {
    const vm = buildViewModel(push(), OK_STATUS);
    expect(vm.channels.length).toBe(2 * 3 + 4 * 3 * 3); // handle/switch + 4 per-device sensors
  });
});

describe("annunciator", () => {
  it("flashes violated requirements", () => {
    const vm = buildViewModel(
      push({}, [
        { requirement: "R31", holds: false, witness: "gear valve on" },
        { requirement: "R41", holds: true, witness: null },
      ]),
      OK_STATUS,
    );
    expect(vm.annunciator[0]).toMatchObject({ requirement: "R31", flash: true });
    expect(vm.annunciator[1]).toMatchObject({ requirement: "R41", flash: false });
  });
});

describe("connection states", () => {
  it("optimistic-disable keeps the lever locked until confirmation", () => {
    const vm = buildViewModel(push(), { ...OK_STATUS, leverPending: true });
    expect(vm.lever.disabled).toBe(true);
    expect(vm.lever.reason).toBe("pending");
  });

  it("disconnection disables the lever and shows the banner state", () => {
    const vm = buildViewModel(push(), { ...OK_STATUS, connected: false });
    expect(vm.lever.disabled).toBe(true);
    expect(vm.lever.reason).toBe("disconnected");
    expect(vm.connected).toBe(false);
  });

  it("renders identically for the same push and status", () => {
    // re-sync after a reload shows exactly the same view
    const a = buildViewModel(push({ nextRTseq: 2, order: "hUp" }), OK_STATUS);
    const b = buildViewModel(push({ nextRTseq: 2, order: "hUp" }), OK_STATUS);
    expect(b).toEqual(a);
  });

  it("without any push the view is a safe placeholder", () => {
    const vm = buildViewModel(null, { ...OK_STATUS, connected: false });
    expect(vm.stale).toBe(true);
    expect(vm.lever.disabled).toBe(true);
    expect(vm.channels).toEqual([]);
  });
});
