/** Thin DOM applier: writes a ViewModel into the static cockpit layout. */

import { ViewModel } from "./viewModel.js";

function el(id: string): HTMLElement {
  const node = document.getElementById(id);
  if (node === null) {
    throw new Error(`cockpit layout is missing #${id}`);
  }
  return node;
}

function setLamp(id: string, on: boolean): void {
  el(id).classList.toggle("on", on);
}

export function renderView(vm: ViewModel): void {
  el("banner").hidden = !(vm.stale || !vm.connected);
  el("banner").textContent = !vm.connected
    ? "DISCONNECTED - reconnect to send commands"
    : "STALE DATA - no push within the heartbeat window";

  setLamp("lamp-green", vm.lamps.green);
  setLamp("lamp-orange", vm.lamps.orange);
  setLamp("lamp-red", vm.lamps.red);

  const lever = el("lever") as HTMLButtonElement;
  lever.textContent = `LEVER ${vm.lever.position}`;
  lever.disabled = vm.lever.disabled;
  lever.dataset.position = vm.lever.position;
  lever.title = vm.lever.reason;

  for (const d of vm.doors) {
    el(`door-${d.id}`).textContent = `${d.id}: ${d.state}`;
  }
  for (const g of vm.gears) {
    el(`gear-${g.id}`).textContent = `${g.id}: ${g.state}`;
  }
  for (const v of vm.valves) {
    el(`valve-${v.name}`).classList.toggle("on", v.on);
  }
  el("switch").textContent = vm.switchClosed ? "switch: closed" : "switch: open";

  const seq = el("sequence");
  seq.textContent =
    vm.sequence.active === "none"
      ? vm.sequence.endCycle
        ? "sequence: idle (cycle complete)"
        : "sequence: idle"
      : `sequence: ${vm.sequence.active}, step ${vm.sequence.step}`;
  for (let i = 1; i <= 8; i++) {
    el(`step-${i}`).classList.toggle(
      "active",
      vm.sequence.active !== "none" && vm.sequence.step === i,
    );
  }

  const table = el("channels");
  table.replaceChildren();
  for (const cell of vm.channels) {
    const row = document.createElement("tr");
    row.className = cell.valid ? "" : "invalid";
    const target = cell.device === null ? cell.sensor : `${cell.sensor} ${cell.device}`;
    row.innerHTML = `<td>${target}</td><td>ch${cell.channel}</td><td>${cell.value}</td><td>${cell.valid ? "ok" : "INVALID"}</td>`;
    table.appendChild(row);
  }

  const feed = el("annunciator");
  feed.replaceChildren();
  for (const entry of vm.annunciator) {
    const line = document.createElement("div");
    line.className = entry.holds ? "verdict ok" : "verdict violated flash";
    line.textContent = entry.holds
      ? `${entry.requirement} ok`
      : `${entry.requirement} VIOLATED: ${entry.witness ?? ""}`;
    feed.appendChild(line);
  }

  el("meta").textContent = `llc ${vm.llc} | cycle ${vm.cycle} | ${vm.paused ? "paused" : "running"}`;
  el("error").textContent = vm.lastError;

  for (const id of ["btn-step", "btn-pause", "btn-resume", "btn-clear-faults"]) {
    (el(id) as HTMLButtonElement).disabled = !vm.connected;
  }
  (el("btn-inject") as HTMLButtonElement).disabled = !vm.faultInjectionEnabled;
}
