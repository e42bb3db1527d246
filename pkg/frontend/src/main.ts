import { CockpitClient } from "./client.js";
import { renderView, } from "./dom.js";
import { FaultArgs, SensorName } from "./protocol.js";
import { buildViewModel } from "./viewModel.js";

const params = new URLSearchParams(location.search);
const url = params.get("server") ?? `ws://${location.hostname || "127.0.0.1"}:8765`;

let frame: number | null = null;

const client = new CockpitClient(url, {
  onPush: scheduleRender,
  onError: scheduleRender,
  onStatus: scheduleRender,
});

function scheduleRender(): void {
  if (frame !== null) {
    return; // renders coalesce to animation frames
  }
  frame = requestAnimationFrame(() => {
    frame = null;
    renderView(
      buildViewModel(client.lastPush, {
        connected: client.connected,
        stale: client.stale,
        leverPending: client.leverPending,
        lastError: client.lastError,
      }),
    );
  });
}

function byId<T extends HTMLElement>(id: string): T {
  return document.getElementById(id) as T;
}

byId<HTMLButtonElement>("lever").addEventListener("click", () => {
  const direction = client.lastPush?.snapshot.order === "hUp" ? "down" : "up";
  client.moveHandle(direction);
});
byId<HTMLButtonElement>("btn-step").addEventListener("click", () => client.sendCommand("step_once"));
byId<HTMLButtonElement>("btn-pause").addEventListener("click", () => client.sendCommand("pause"));
byId<HTMLButtonElement>("btn-resume").addEventListener("click", () => client.sendCommand("resume"));
byId<HTMLButtonElement>("btn-reset").addEventListener("click", () => client.sendCommand("reset"));
byId<HTMLButtonElement>("btn-clear-faults").addEventListener("click", () =>
  client.sendCommand("clear_faults"),
);
byId<HTMLButtonElement>("btn-inject").addEventListener("click", () => {
  const sensor = byId<HTMLSelectElement>("fault-sensor").value as SensorName;
  const channel = Number(byId<HTMLSelectElement>("fault-channel").value) as 1 | 2 | 3;
  const device = byId<HTMLSelectElement>("fault-device").value;
  const fault: FaultArgs = { sensor, channel };
  if (device !== "-") {
    fault.device = device;
  }
  client.injectFault(fault);
});

client.connect();
scheduleRender();
