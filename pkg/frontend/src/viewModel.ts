/**
 * Pure view model: every rendered value is a function of the latest
 * server push (plus connection bookkeeping).  No control logic lives
 * here; the lights, steps and channel flags mirror the snapshot exactly.
 */

import {
  CHANNELS,
  DOORS,
  GEARS,
  SENSORS,
  Snapshot,
  StateMessage,
  Verdict,
  channelValid,
  channelValue,
} from "./protocol.js";

export interface LampView {
  green: boolean;
  orange: boolean;
  red: boolean;
}

export interface LeverView {
  position: "UP" | "DOWN";
  /** disabled while awaiting confirmation, disconnected, or anomaly-latched */
  disabled: boolean;
  reason: "" | "pending" | "disconnected" | "anomaly";
}

export interface ValveView {
  name: string;
  on: boolean;
}

export interface ChannelCell {
  sensor: string;
  channel: number;
  device: string | null;
  value: string;
  valid: boolean;
}

export interface SequenceView {
  active: "outgoing" | "retraction" | "none";
  /** 1..8 step about to fire, 0 when idle */
  step: number;
  endCycle: boolean;
}

export interface AnnunciatorEntry {
  requirement: string;
  holds: boolean;
  witness: string | null;
  flash: boolean;
}

export interface ViewModel {
  connected: boolean;
  stale: boolean;
  lamps: LampView;
  lever: LeverView;
  doors: { id: string; state: string }[];
  gears: { id: string; state: string }[];
  valves: ValveView[];
  switchClosed: boolean;
  sequence: SequenceView;
  channels: ChannelCell[];
  annunciator: AnnunciatorEntry[];
  faultInjectionEnabled: boolean;
  llc: number;
  cycle: number;
  paused: boolean;
  lastError: string;
}

export interface ClientStatus {
  connected: boolean;
  stale: boolean;
  leverPending: boolean;
  lastError: string;
}

const VALVES = ["general_EV", "open_EV", "close_EV", "extend_EV", "retract_EV"] as const;

function channelTable(snap: Snapshot): ChannelCell[] {
  const cells: ChannelCell[] = [];
  for (const sensor of SENSORS) {
    const devices =
      sensor === "gear_extended" || sensor === "gear_retracted"
        ? [...GEARS]
        : sensor === "door_closed" || sensor === "door_open"
          ? [...DOORS]
          : [null];
    for (const device of devices) {
      for (const ch of CHANNELS) {
        const value = channelValue(snap, sensor, ch, device ?? undefined);
        cells.push({
          sensor,
          channel: ch,
          device,
          value: String(value),
          valid: channelValid(snap, sensor, ch),
        });
      }
    }
  }
  return cells;
}

export function buildViewModel(push: StateMessage | null, status: ClientStatus): ViewModel {
  if (push === null) {
    return emptyView(status);
  }
  const snap = push.snapshot;
  const anomaly = snap.anomaly === true;
  const retraction = snap.nextRTseq > 0;
  const outgoing = snap.nextOGseq > 0;

  const lever: LeverView = {
    position: snap.order === "hUp" ? "UP" : "DOWN",
    disabled: anomaly || status.leverPending || !status.connected,
    reason: !status.connected
      ? "disconnected"
      : anomaly
        ? "anomaly"
        : status.leverPending
          ? "pending"
          : "",
  };

  return {
    connected: status.connected,
    stale: status.stale,
    lamps: {
      green: snap.greenLight === "lightON",
      orange: snap.orangeLight === "lightON",
      red: snap.redLight === "lightON",
    },
    lever,
    doors: DOORS.map((d) => ({ id: d, state: String(snap[`doorState.${d}`]) })),
    gears: GEARS.map((g) => ({ id: g, state: String(snap[`gearState.${g}`]) })),
    valves: VALVES.map((name) => ({ name, on: snap[name] === true })),
    switchClosed: snap.switch === "closedSW",
    sequence: {
      active: retraction ? "retraction" : outgoing ? "outgoing" : "none",
      step: retraction ? snap.nextRTseq : outgoing ? snap.nextOGseq : 0,
      endCycle: snap.endCycle === true,
    },
    channels: channelTable(snap),
    annunciator: push.verdicts.map((v: Verdict) => ({
      requirement: v.requirement,
      holds: v.holds,
      witness: v.witness,
      flash: !v.holds,
    })),
    faultInjectionEnabled: status.connected && !anomaly,
    llc: push.llc,
    cycle: push.cycle,
    paused: push.paused,
    lastError: status.lastError,
  };
}

function emptyView(status: ClientStatus): ViewModel {
  return {
    connected: status.connected,
    stale: true,
    lamps: { green: false, orange: false, red: false },
    lever: { position: "DOWN", disabled: true, reason: "disconnected" },
    doors: DOORS.map((d) => ({ id: d, state: "?" })),
    gears: GEARS.map((g) => ({ id: g, state: "?" })),
    valves: VALVES.map((name) => ({ name, on: false })),
    switchClosed: false,
    sequence: { active: "none", step: 0, endCycle: false },
    channels: [],
    annunciator: [],
    faultInjectionEnabled: false,
    llc: -1,
    cycle: -1,
    paused: true,
    lastError: status.lastError,
  };
}
