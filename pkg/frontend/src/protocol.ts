/**
 * Wire protocol of the session server.
 *
 * The server pushes full-state messages after every state-changing
 * interaction; the snapshot is the flat canonical record (fixed field
 * names, booleans as JSON booleans, enumerations as their short names).
 * The client sends {type: "command", cmd, args}.
 */

export type HandlePos = "hDown" | "hUp";
export type LightValue = "lightON" | "lightOFF";
export type DoorPos = "ClosedLocked" | "ClosedUnlocked" | "OpenUnlocked";
export type GearPos =
  | "RetractedLocked"
  | "RetractedUnlocked"
  | "ExtendedUnlocked"
  | "ExtendedLocked";

export const DOORS = ["FD", "RD", "LD"] as const;
export const GEARS = ["FG", "LG", "RG"] as const;
export const CHANNELS = [1, 2, 3] as const;
export const SENSORS = [
  "handle",
  "analogical_switch",
  "gear_extended",
  "gear_retracted",
  "door_closed",
  "door_open",
] as const;

export type SensorName = (typeof SENSORS)[number];

/** Flat canonical record; only the fields the cockpit reads are typed. */
export interface Snapshot {
  order: HandlePos;
  pilot_handle: HandlePos;
  nextOGseq: number;
  nextRTseq: number;
  endCycle: boolean;
  general_EV: boolean;
  open_EV: boolean;
  close_EV: boolean;
  extend_EV: boolean;
  retract_EV: boolean;
  gears_locked_down: boolean;
  gears_maneuvering: boolean;
  anomaly: boolean;
  greenLight: LightValue;
  orangeLight: LightValue;
  redLight: LightValue;
  switch: "openSW" | "closedSW";
  faults: string;
  llc: number;
  [key: string]: unknown; // remaining canonical fields (per-channel values etc.)
}

export interface Verdict {
  requirement: string;
  holds: boolean;
  witness: string | null;
}

export interface StateMessage {
  type: "state";
  snapshot: Snapshot;
  verdicts: Verdict[];
  enabled_events: string[];
  llc: number;
  cycle: number;
  paused: boolean;
}

export interface ErrorMessage {
  type: "error";
  code: string;
  detail: string;
}

export type ServerMessage = StateMessage | ErrorMessage;

export type CommandName =
  | "handle_up"
  | "handle_down"
  | "inject_fault"
  | "clear_faults"
  | "pause"
  | "resume"
  | "step_once"
  | "reset"
  | "set_policy";

export interface CommandMessage {
  type: "command";
  cmd: CommandName;
  args?: Record<string, unknown>;
}

export interface FaultArgs {
  sensor: SensorName;
  channel: 1 | 2 | 3;
  device?: string | null;
  mode?: "StuckWrong" | "StuckTrue" | "StuckFalse";
}

export class ProtocolError extends Error {}

export function parseServerMessage(raw: string): ServerMessage {
  let obj: unknown;
  try {
    obj = JSON.parse(raw);
  } catch {
    throw new ProtocolError("server message is not valid JSON");
  }
  if (typeof obj !== "object" || obj === null || !("type" in obj)) {
    throw new ProtocolError("server message has no type");
  }
  const msg = obj as Record<string, unknown>;
  if (msg.type === "error") {
    if (typeof msg.code !== "string" || typeof msg.detail !== "string") {
      throw new ProtocolError("malformed error message");
    }
    return { type: "error", code: msg.code, detail: msg.detail };
  }
  if (msg.type === "state") {
    const snapshot = msg.snapshot;
    if (typeof snapshot !== "object" || snapshot === null) {
      throw new ProtocolError("state message without snapshot");
    }
    const snap = snapshot as Snapshot;
    for (const field of ["order", "anomaly", "greenLight", "nextOGseq", "nextRTseq"]) {
      if (!(field in snap)) {
        throw new ProtocolError(`snapshot is missing ${field}`);
      }
    }
    return {
      type: "state",
      snapshot: snap,
      verdicts: (msg.verdicts as Verdict[]) ?? [],
      enabled_events: (msg.enabled_events as string[]) ?? [],
      llc: (msg.llc as number) ?? snap.llc,
      cycle: (msg.cycle as number) ?? 0,
      paused: Boolean(msg.paused),
    };
  }
  throw new ProtocolError(`unknown server message type ${String(msg.type)}`);
}

export function command(cmd: CommandName, args?: Record<string, unknown>): string {
  const msg: CommandMessage = args === undefined ? { type: "command", cmd } : { type: "command", cmd, args };
  return JSON.stringify(msg);
}

export function injectFault(fault: FaultArgs): string {
  return command("inject_fault", { ...fault });
}

/** Per-channel sensed value from the flat record, e.g. ("door_open", 2, "LD"). */
export function channelValue(
  snap: Snapshot,
  sensor: SensorName,
  channel: number,
  device?: string,
): unknown {
  const key = device === undefined ? `${sensor}.${channel}` : `${sensor}.${channel}.${device}`;
  return snap[key];
}

export function channelValid(snap: Snapshot, sensor: SensorName, channel: number): boolean {
  return snap[`channel_valid.${sensor}.${channel}`] === true;
}
