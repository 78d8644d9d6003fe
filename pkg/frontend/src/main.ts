// Entry point: one socket, one canvas, buttons for cues and toggles.

import { ClientCommand, CueValue, parseServerMessage } from "./protocol.js";
import { render, renderActionPanel } from "./render.js";
import { ViewModel, initialViewModel, reduce } from "./viewmodel.js";

const canvas = document.getElementById("scene") as HTMLCanvasElement;
const panel = document.getElementById("actions") as HTMLElement;
const status = document.getElementById("status") as HTMLElement;
const banner = document.getElementById("banner") as HTMLElement;

let vm: ViewModel = initialViewModel();
const pending: ClientCommand[] = [];
let socket: WebSocket | null = null;

function send(cmd: ClientCommand): void {
  if (socket && socket.readyState === WebSocket.OPEN) {
    socket.send(JSON.stringify(cmd));
  } else {
    pending.push(cmd); // queued with a warning until the socket reconnects
    banner.textContent = "disconnected: cue queued";
  }
}

function connect(): void {
  const url = `ws://${location.host}/ws`;
  socket = new WebSocket(url);
  socket.onopen = () => {
    banner.textContent = "";
    while (pending.length > 0) send(pending.shift()!);
  };
  socket.onmessage = (event: MessageEvent) => {
    vm = reduce(vm, parseServerMessage(String(event.data)));
    refresh();
  };
  socket.onclose = () => {
    banner.textContent = "connection closed - reconnecting";
    setTimeout(connect, 1000);
  };
  socket.onerror = () => socket?.close();
}

function refresh(): void {
  render(vm, canvas);
  renderActionPanel(vm, panel);
  if (vm.lastError) banner.textContent = vm.lastError;
  const s = vm.state;
  if (s) {
    status.textContent =
      `step ${s.step} | cue ${s.cue} | reward ${s.total_reward.toFixed(2)}` +
      ` | collisions ${s.collisions}` +
      (s.paused ? " | paused" : "") +
      (vm.lastAck ? ` | ack ${vm.lastAck}` : "");
  }
  const overlay = document.getElementById("terminal") as HTMLElement;
  if (vm.terminal) {
    overlay.style.display = "block";
    overlay.textContent =
      `episode done: ${vm.terminal.steps} steps, ` +
      `${vm.terminal.collisions} collisions, ` +
      `reward ${vm.terminal.total_reward.toFixed(2)} (reset to go again)`;
  } else {
    overlay.style.display = "none";
  }
}

function cueButton(id: string, value: CueValue, delay = 0): void {
  const el = document.getElementById(id);
  el?.addEventListener("click", () =>
    send(delay > 0 ? { type: "cue", value, delay_steps: delay } : { type: "cue", value }),
  );
}

cueButton("cue-forward", "forward");
cueButton("cue-left", "left");
cueButton("cue-right", "right");
cueButton("cue-stop", "stop");
// deliberate timing errors: the "early" case is just pressing before the
// turn; the late button delays the cue by five ticks
cueButton("cue-left-late", "left", 5);
cueButton("cue-right-late", "right", 5);

document.getElementById("pause")?.addEventListener("click", () => send({ type: "pause" }));
document.getElementById("resume")?.addEventListener("click", () => send({ type: "resume" }));
document.getElementById("reset")?.addEventListener("click", () => send({ type: "reset" }));

const betaSelect = document.getElementById("beta") as HTMLSelectElement;
betaSelect?.addEventListener("change", () =>
  send({ type: "config", beta: Number(betaSelect.value) }),
);
const noiseToggle = document.getElementById("noise") as HTMLInputElement;
noiseToggle?.addEventListener("change", () =>
  send({ type: "config", noise_sigma: noiseToggle.checked ? 0.05 : 0.0 }),
);

for (const id of ["show-lidar", "show-hull", "show-suppressed"] as const) {
  const el = document.getElementById(id) as HTMLInputElement;
  el?.addEventListener("change", () => {
    vm = {
      ...vm,
      toggles: {
        showLidar: (document.getElementById("show-lidar") as HTMLInputElement).checked,
        showHull: (document.getElementById("show-hull") as HTMLInputElement).checked,
        showSuppressed: (document.getElementById("show-suppressed") as HTMLInputElement).checked,
      },
    };
    refresh();
  });
}

connect();
