// Canvas renderer: draws whatever the view model holds, nothing more.

import { StateMessage } from "./protocol.js";
import { ViewModel, actionChips, chosenHull, makeTransform } from "./viewmodel.js";

const ROBOT_RADIUS = 0.35;
const HUMAN_RADIUS = 0.3;

export function render(vm: ViewModel, canvas: HTMLCanvasElement): void {
  const ctx = canvas.getContext("2d");
  if (!ctx || !vm.world) return;
  const { width, height } = canvas;
  const tf = makeTransform(vm.world.extent, width, height);
  ctx.fillStyle = "#10141a";
  ctx.fillRect(0, 0, width, height);

  // obstacles
  ctx.fillStyle = "#3b4252";
  for (const [x0, y0, x1, y1] of vm.world.boxes) {
    const [cx, cy] = tf.toCanvas(x0, y1);
    ctx.fillRect(cx, cy, (x1 - x0) * tf.scale, (y1 - y0) * tf.scale);
  }

  const state = vm.state;
  if (!state) return;

  if (vm.toggles.showLidar) drawLidar(ctx, tf, state);
  if (vm.toggles.showHull) drawHull(ctx, tf, state);
  drawTrail(ctx, tf, vm.robotTrail, "#88c0d0");
  drawTrail(ctx, tf, vm.humanTrail, "#ebcb8b");

  // harness link
  const [rx, ry] = tf.toCanvas(state.robot[0], state.robot[1]);
  const [hx, hy] = tf.toCanvas(state.human[0], state.human[1]);
  ctx.strokeStyle = "#d8dee9";
  ctx.lineWidth = 2;
  ctx.beginPath();
  ctx.moveTo(rx, ry);
  ctx.lineTo(hx, hy);
  ctx.stroke();

  drawAgent(ctx, tf, state.robot, ROBOT_RADIUS, "#5e81ac");
  drawAgent(ctx, tf, state.human, HUMAN_RADIUS, "#d08770");
}

function drawAgent(
  ctx: CanvasRenderingContext2D,
  tf: ReturnType<typeof makeTransform>,
  pose: number[],
  radius: number,
  color: string,
): void {
  const [cx, cy] = tf.toCanvas(pose[0], pose[1]);
  ctx.fillStyle = color;
  ctx.beginPath();
  ctx.arc(cx, cy, radius * tf.scale, 0, 2 * Math.PI);
  ctx.fill();
  // heading tick
  const [tx, ty] = tf.toCanvas(
    pose[0] + radius * Math.cos(pose[2]),
    pose[1] + radius * Math.sin(pose[2]),
  );
  ctx.strokeStyle = "#eceff4";
  ctx.lineWidth = 2;
  ctx.beginPath();
  ctx.moveTo(cx, cy);
  ctx.lineTo(tx, ty);
  ctx.stroke();
}

function drawLidar(
  ctx: CanvasRenderingContext2D,
  tf: ReturnType<typeof makeTransform>,
  state: StateMessage,
): void {
  const [rx, ry, rtheta] = state.robot;
  ctx.strokeStyle = "rgba(136, 192, 208, 0.25)";
  ctx.lineWidth = 1;
  ctx.beginPath();
  for (let i = 0; i < state.lidar.length; i++) {
    const angle = rtheta + state.lidar_angles[i];
    const r = state.lidar[i];
    const [ax, ay] = tf.toCanvas(rx, ry);
    const [bx, by] = tf.toCanvas(rx + r * Math.cos(angle), ry + r * Math.sin(angle));
    ctx.moveTo(ax, ay);
    ctx.lineTo(bx, by);
  }
  ctx.stroke();
}

function drawHull(
  ctx: CanvasRenderingContext2D,
  tf: ReturnType<typeof makeTransform>,
  state: StateMessage,
): void {
  const hull = chosenHull(state);
  if (!hull || hull.length < 3) return;
  ctx.strokeStyle = "#a3be8c";
  ctx.lineWidth = 2;
  ctx.beginPath();
  const [sx, sy] = tf.toCanvas(hull[0][0], hull[0][1]);
  ctx.moveTo(sx, sy);
  for (const [x, y] of hull.slice(1)) {
    const [cx, cy] = tf.toCanvas(x, y);
    ctx.lineTo(cx, cy);
  }
  ctx.closePath();
  ctx.stroke();
}

function drawTrail(
  ctx: CanvasRenderingContext2D,
  tf: ReturnType<typeof makeTransform>,
  trail: [number, number][],
  color: string,
): void {
  if (trail.length < 2) return;
  ctx.strokeStyle = color;
  ctx.lineWidth = 1;
  ctx.beginPath();
  const [sx, sy] = tf.toCanvas(trail[0][0], trail[0][1]);
  ctx.moveTo(sx, sy);
  for (const [x, y] of trail.slice(1)) {
    const [cx, cy] = tf.toCanvas(x, y);
    ctx.lineTo(cx, cy);
  }
  ctx.stroke();
}

/** Refresh the HTML action panel; suppressed actions get the dimmed class. */
export function renderActionPanel(vm: ViewModel, panel: HTMLElement): void {
  panel.innerHTML = "";
  if (!vm.state) return;
  for (const chip of actionChips(vm.state)) {
    if (chip.suppressed && !vm.toggles.showSuppressed) continue;
    const el = document.createElement("span");
    el.className = chip.suppressed ? "chip suppressed" : "chip";
    el.textContent = `${chip.name} ${(chip.prob * 100).toFixed(0)}%`;
    panel.appendChild(el);
  }
}
