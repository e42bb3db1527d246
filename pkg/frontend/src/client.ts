/**
 * Connection to the session server.
 *
 * Commands are only ever sent from an explicit method call (a user
 * gesture upstream); nothing is synthesized locally.  The lever uses
 * optimistic-disable: after a handle command it stays locked until the
 * next push confirms the new order, so the cockpit can never display a
 * state the server has not held.
 */

import { CommandName, FaultArgs, ServerMessage, StateMessage, command, injectFault, parseServerMessage } from "./protocol.js";

/** Minimal WebSocket surface so tests can inject an implementation. */
export interface SocketLike {
  send(data: string): void;
  close(): void;
  onopen: ((ev?: unknown) => void) | null;
  onmessage: ((ev: { data: unknown }) => void) | null;
  onclose: ((ev?: unknown) => void) | null;
  onerror: ((ev?: unknown) => void) | null;
}

export type SocketFactory = (url: string) => SocketLike;

export interface CockpitEvents {
  onPush?: (msg: StateMessage) => void;
  onError?: (code: string, detail: string) => void;
  onStatus?: () => void;
}

export class NotConnected extends Error {
  constructor() {
    super("not connected; reconnect before sending commands");
  }
}

export class CockpitClient {
  connected = false;
  stale = false;
  leverPending = false;
  lastError = "";
  lastPush: StateMessage | null = null;

  private socket: SocketLike | null = null;
  private staleTimer: ReturnType<typeof setTimeout> | null = null;

  constructor(
    private readonly url: string,
    private readonly events: CockpitEvents = {},
    private readonly makeSocket: SocketFactory = (u) =>
      new (globalThis as { WebSocket: new (url: string) => SocketLike }).WebSocket(u),
    private readonly heartbeatMs = 5000,
  ) {}

  connect(): void {
    const ws = this.makeSocket(this.url);
    this.socket = ws;
    ws.onopen = () => {
      this.connected = true;
      this.lastError = "";
      this.events.onStatus?.();
    };
    ws.onmessage = (ev) => this.receive(String(ev.data));
    ws.onclose = () => {
      this.connected = false;
      this.leverPending = false;
      this.clearStaleTimer();
      this.events.onStatus?.();
    };
    ws.onerror = () => {
      this.lastError = "connection error";
      this.events.onStatus?.();
    };
  }

  disconnect(): void {
    this.socket?.close();
    this.socket = null;
    this.connected = false;
    this.clearStaleTimer();
  }

  private receive(raw: string): void {
    let msg: ServerMessage;
    try {
      msg = parseServerMessage(raw);
    } catch (e) {
      this.lastError = String(e instanceof Error ? e.message : e);
      this.events.onStatus?.();
      return;
    }
    if (msg.type === "error") {
      this.lastError = `${msg.code}: ${msg.detail}`;
      this.leverPending = false; // the rejected command will not change anything
      this.events.onError?.(msg.code, msg.detail);
      this.events.onStatus?.();
      return;
    }
    this.lastPush = msg;
    this.stale = false;
    this.leverPending = false; // any push reflects the settled server state
    if (msg.paused) {
      this.clearStaleTimer(); // a paused session pushes nothing on its own
    } else {
      this.armStaleTimer();
    }
    this.events.onPush?.(msg);
  }

  private send(payload: string): void {
    if (!this.connected || this.socket === null) {
      throw new NotConnected();
    }
    this.socket.send(payload);
  }

  /** Lever gesture; locks the lever until the next push. */
  moveHandle(direction: "up" | "down"): void {
    this.send(command(direction === "up" ? "handle_up" : "handle_down"));
    this.leverPending = true;
    this.events.onStatus?.();
  }

  injectFault(fault: FaultArgs): void {
    this.send(injectFault(fault));
  }

  sendCommand(cmd: CommandName, args?: Record<string, unknown>): void {
    this.send(command(cmd, args));
  }

  private armStaleTimer(): void {
    this.clearStaleTimer();
    if (this.heartbeatMs > 0) {
      this.staleTimer = setTimeout(() => {
        this.stale = true;
        this.events.onStatus?.();
      }, this.heartbeatMs);
    }
  }

  private clearStaleTimer(): void {
    if (this.staleTimer !== null) {
      clearTimeout(this.staleTimer);
      this.staleTimer = null;
    }
  }
}
