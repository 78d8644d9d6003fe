// Pure view state: everything rendered derives from the message stream
// plus local toggles, so replaying a recorded stream reproduces the view.

import {
  ServerMessage,
  StateMessage,
  TerminalMessage,
  WorldMessage,
} from "./protocol.js";

export interface Toggles {
  showLidar: boolean;
  showHull: boolean;
  showSuppressed: boolean;
}

export interface ViewModel {
  world: WorldMessage | null;
  state: StateMessage | null;
  terminal: TerminalMessage["summary"] | null;
  robotTrail: [number, number][];
  humanTrail: [number, number][];
  lastError: string | null;
  lastAck: string | null;
  toggles: Toggles;
}

export function initialViewModel(): ViewModel {
  return {
    world: null,
    state: null,
    terminal: null,
    robotTrail: [],
    humanTrail: [],
    lastError: null,
    lastAck: null,
    toggles: { showLidar: true, showHull: true, showSuppressed: true },
  };
}

const TRAIL_LIMIT = 600;

/** Fold one server message into the view model (new object, no mutation). */
export function reduce(vm: ViewModel, msg: ServerMessage | null): ViewModel {
  if (msg === null) {
    // malformed frame: keep the last good state, surface a banner
    return { ...vm, lastError: "malformed message from server" };
  }
  switch (msg.type) {
    case "world":
      return {
        ...initialViewModel(),
        toggles: vm.toggles,
        world: msg,
      };
    case "state":
      return foldState(vm, msg);
    case "terminal":
      return { ...foldState(vm, msg.state), terminal: msg.summary };
    case "ack":
      return { ...vm, lastAck: `${msg.cue} @ step ${msg.effective_step}` };
    case "error":
      return { ...vm, lastError: msg.message };
  }
}

function foldState(vm: ViewModel, state: StateMessage): ViewModel {
  const robotTrail = [...vm.robotTrail, point(state.robot)].slice(-TRAIL_LIMIT);
  const humanTrail = [...vm.humanTrail, point(state.human)].slice(-TRAIL_LIMIT);
  return { ...vm, state, robotTrail, humanTrail, lastError: null };
}

function point(pose: number[]): [number, number] {
  return [pose[0], pose[1]];
}

/** Vertex list of the hull drawn for an action, exactly as received. */
export function hullVertices(
  state: StateMessage,
  action: string,
): number[][] | null {
  if (!state.shield) return null;
  const idx = state.shield.actions.indexOf(action);
  if (idx < 0) return null;
  return state.shield.hulls[idx];
}

/** Hull shown by default: the action the server just executed. */
export function chosenHull(state: StateMessage): number[][] | null {
  if (!state.action) return null;
  return hullVertices(state, state.action);
}

export interface ActionChip {
  name: string;
  prob: number;
  suppressed: boolean;
}

/** Action panel rows; suppressed actions are dimmed by the renderer. */
export function actionChips(state: StateMessage): ActionChip[] {
  if (!state.shield) {
    return [];
  }
  return state.shield.actions.map((name, i) => ({
    name,
    prob: state.shield!.probs[i],
    suppressed: state.shield!.unsafe[i],
  }));
}

/** World-to-canvas transform: fit the extent, y up. */
export function makeTransform(
  extent: [number, number],
  width: number,
  height: number,
) {
  const scale = Math.min(width / extent[0], height / extent[1]);
  return {
    scale,
    toCanvas(x: number, y: number): [number, number] {
      return [x * scale, height - y * scale];
    },
  };
}
