// Wire protocol spoken with the session server. Every server message
// carries a step index; the client performs no physics of its own.

export type CueValue = "forward" | "left" | "right" | "stop";

export interface ShieldInfo {
  actions: string[];
  hulls: number[][][]; // per action: list of [x, y] vertices
  thresholds: (number | null)[][];
  unsafe: boolean[];
  probs: number[];
  fallback_used: boolean;
}

export interface WorldMessage {
  type: "world";
  step: number;
  session: number;
  cell_size: number;
  extent: [number, number];
  boxes: number[][]; // [x0, y0, x1, y1]
  start: number[];
  actions: string[];
  tick_ms: number;
}

export interface StateMessage {
  type: "state";
  step: number;
  robot: number[]; // [x, y, theta]
  human: number[];
  lidar: number[];
  lidar_angles: number[];
  max_range: number;
  shield: ShieldInfo | null;
  reward: number;
  total_reward: number;
  cue: CueValue;
  collided: boolean;
  collisions: number;
  done: boolean;
  paused: boolean;
  action?: string;
}

export interface TerminalMessage {
  type: "terminal";
  step: number;
  summary: { steps: number; collisions: number; total_reward: number };
  state: StateMessage;
}

export interface AckMessage {
  type: "ack";
  step: number;
  cue: CueValue;
  effective_step: number;
}

export interface ErrorMessage {
  type: "error";
  step: number;
  message: string;
}

export type ServerMessage =
  | WorldMessage
  | StateMessage
  | TerminalMessage
  | AckMessage
  | ErrorMessage;

export interface CueCommand {
  type: "cue";
  value: CueValue;
  delay_steps?: number;
}

export type ClientCommand =
  | CueCommand
  | { type: "pause" }
  | { type: "resume" }
  | { type: "reset" }
  | { type: "config"; beta?: number; noise_sigma?: number; tick_ms?: number };

const SERVER_TYPES = new Set(["world", "state", "terminal", "ack", "error"]);

/** Parse one raw frame; returns null for anything malformed. */
export function parseServerMessage(raw: string): ServerMessage | null {
  let doc: unknown;
  try {
    doc = JSON.parse(raw);
  } catch {
    return null;
  }
  if (typeof doc !== "object" || doc === null) return null;
  const msg = doc as Record<string, unknown>;
  if (typeof msg.type !== "string" || !SERVER_TYPES.has(msg.type)) return null;
  if (typeof msg.step !== "number") return null;
  if (msg.type === "state") {
    if (!Array.isArray(msg.robot) || !Array.isArray(msg.human)) return null;
    if (!Array.isArray(msg.lidar)) return null;
  }
  if (msg.type === "world" && !Array.isArray(msg.boxes)) return null;
  return msg as unknown as ServerMessage;
}
