import { describe, expect, it } from "vitest";

import { CockpitClient, NotConnected, SocketLike } from "../src/client.js";

class FakeSocket implements SocketLike {
  sent: string[] = [];
  closed = false;
  onopen: ((ev?: unknown) => void) | null = null;
  onmessage: ((ev: { data: unknown }) => void) | null = null;
  onclose: ((ev?: unknown) => void) | null = null;
  onerror: ((ev?: unknown) => void) | null = null;

  send(data: string): void {
    this.sent.push(data);
  }

  close(): void {
    this.closed = true;
    this.onclose?.();
  }

  open(): void {
    this.onopen?.();
  }

  push(obj: unknown): void {
    this.onmessage?.({ data: JSON.stringify(obj) });
  }
}

function statePush(order: "hUp" | "hDown", paused = true): unknown {
  return {
    type: "state",
    snapshot: {
      order,
      pilot_handle: order,
      nextOGseq: 0,
      nextRTseq: order === "hUp" ? 1 : 0,
      endCycle: false,
      anomaly: false,
      greenLight: "lightOFF",
      orangeLight: "lightOFF",
      redLight: "lightOFF",
      llc: 1,
    },
    verdicts: [],
    enabled_events: [],
    llc: 1,
    cycle: 0,
    paused,
  };
}

function makeClient() {
  const socket = new FakeSocket();
  const pushes: unknown[] = [];
  const errors: string[] = [];
  const client = new CockpitClient(
    "ws://test",
    { onPush: (m) => pushes.push(m), onError: (c) => errors.push(c) },
    () => socket,
    0, // no heartbeat timer in unit tests
  );
  client.connect();
  return { socket, client, pushes, errors };
}

describe("CockpitClient", () => {
  it("rejects commands while disconnected instead of queueing", () => {
    const { client } = makeClient();
    expect(() => client.moveHandle("up")).toThrow(NotConnected);
  });

  it("sends exactly the lever command and locks until the next push", () => {
    const { socket, client } = makeClient();
    socket.open();
    client.moveHandle("up");
    expect(JSON.parse(socket.sent[0]!)).toEqual({ type: "command", cmd: "handle_up" });
    expect(client.leverPending).toBe(true);
    socket.push(statePush("hUp"));
    expect(client.leverPending).toBe(false);
    expect(client.lastPush?.snapshot.order).toBe("hUp");
  });

  it("a protocol error releases the lever lock and surfaces the code", () => {
    const { socket, client, errors } = makeClient();
    socket.open();
    client.moveHandle("up");
    socket.push({ type: "error", code: "noop_handle", detail: "handle already hUp" });
    expect(client.leverPending).toBe(false);
    expect(errors).toEqual(["noop_handle"]);
    expect(client.lastError).toContain("noop_handle");
  });

  it("never sends anything without an explicit call", () => {
    const { socket } = makeClient();
    socket.open();
    socket.push(statePush("hDown"));
    socket.push(statePush("hUp"));
    expect(socket.sent).toEqual([]);
  });

  it("drops the connection state on close", () => {
    const { socket, client } = makeClient();
    socket.open();
    expect(client.connected).toBe(true);
    socket.close();
    expect(client.connected).toBe(false);
    expect(() => client.sendCommand("step_once")).toThrow(NotConnected);
  });

  it("ignores malformed pushes but keeps the last good state", () => {
    const { socket, client } = makeClient();
    socket.open();
    socket.push(statePush("hUp"));
    socket.onmessage?.({ data: "garbage" });
    expect(client.lastPush?.snapshot.order).toBe("hUp");
    expect(client.lastError).toContain("JSON");
  });
});
