// Live round trip against the real session server: every cue must be
// reflected in the next state message, and the hull the UI would draw must
// equal the shield report vertices the server sent for that step.

import { ChildProcess, spawn } from "node:child_process";
import { afterAll, beforeAll, describe, expect, it } from "vitest";
import WebSocket from "ws";

import { parseServerMessage, ServerMessage, StateMessage } from "../src/protocol.js";
import { chosenHull, initialViewModel, reduce } from "../src/viewmodel.js";

const PORT = 8741;
let server: ChildProcess;

function waitForServer(port: number, timeoutMs = 20000): Promise<void> {
  const deadline = Date.now() + timeoutMs;
  return new Promise((resolve, reject) => {
    const attempt = () => {
      const ws = new WebSocket(`ws://127.0.0.1:${port}/ws`);
      ws.on("open", () => {
        ws.close();
        resolve();
      });
      ws.on("error", () => {
        if (Date.now() > deadline) reject(new Error("server did not start"));
        else setTimeout(attempt, 250);
      });
    };
    attempt();
  });
}

class Client {
  ws: WebSocket;
  queue: ServerMessage[] = [];
  waiters: ((msg: ServerMessage) => void)[] = [];

  constructor(port: number) {
    this.ws = new WebSocket(`ws://127.0.0.1:${port}/ws`);
    this.ws.on("message", (data) => {
      const msg = parseServerMessage(data.toString());
      if (!msg) return;
      const waiter = this.waiters.shift();
      if (waiter) waiter(msg);
      else this.queue.push(msg);
    });
  }

  open(): Promise<void> {
    return new Promise((resolve) => this.ws.on("open", () => resolve()));
  }

  next(timeoutMs = 5000): Promise<ServerMessage> {
    const queued = this.queue.shift();
    if (queued) return Promise.resolve(queued);
    return new Promise((resolve, reject) => {
      const timer = setTimeout(
        () => reject(new Error("timed out waiting for message")),
        timeoutMs,
      );
      this.waiters.push((msg) => {
        clearTimeout(timer);
        resolve(msg);
      });
    });
  }

  async nextOfType<T extends ServerMessage>(
    type: T["type"],
    timeoutMs = 5000,
  ): Promise<T> {
    for (;;) {
      const msg = await this.next(timeoutMs);
      if (msg.type === type) return msg as T;
      if (msg.type === "terminal" && type === "state") {
        return (msg as { state: StateMessage }).state as unknown as T;
      }
    }
  }

  send(obj: unknown): void {
    this.ws.send(JSON.stringify(obj));
  }

  close(): void {
    this.ws.close();
  }
}

beforeAll(async () => {
  server = spawn(
    "python3",
    ["-m", "dyadnav", "serve", "--port", String(PORT), "--world",
     "builtin:corridor", "--tick-ms", "30"],
    { stdio: "ignore" },
  );
  await waitForServer(PORT);
}, 30000);

afterAll(() => {
  server?.kill();
});

describe("UI round trip with the live server", () => {
  it("reflects forward, left and stop cues in the next state", async () => {
    const client = new Client(PORT);
    await client.open();
    await client.nextOfType("world");
    await client.nextOfType("state");

    client.send({ type: "cue", value: "forward" });
    const ackF = await client.nextOfType<{ type: "ack"; effective_step: number }>("ack");
    client.send({ type: "resume" });
    let state = await client.nextOfType<StateMessage>("state");
    while (state.step < ackF.effective_step) {
      state = await client.nextOfType<StateMessage>("state");
    }
    expect(state.cue).toBe("forward");

    client.send({ type: "cue", value: "left" });
    const ackL = await client.nextOfType<{ type: "ack"; effective_step: number }>("ack");
    state = await client.nextOfType<StateMessage>("state");
    while (state.step < ackL.effective_step) {
      state = await client.nextOfType<StateMessage>("state");
    }
    expect(state.cue).toBe("left");

    client.send({ type: "cue", value: "stop" });
    const ackS = await client.nextOfType<{ type: "ack"; effective_step: number }>("ack");
    state = await client.nextOfType<StateMessage>("state");
    while (state.step < ackS.effective_step) {
      state = await client.nextOfType<StateMessage>("state");
    }
    expect(state.cue).toBe("stop");
    client.send({ type: "pause" });
    client.close();
  }, 30000);

  it("renders exactly the hull vertices from the shield report", async () => {
    const client = new Client(PORT);
    await client.open();
    await client.nextOfType("world");
    await client.nextOfType("state");
    client.send({ type: "resume" });
    await client.nextOfType("state");

    let vm = initialViewModel();
    let checked = 0;
    for (let i = 0; i < 8 && checked < 3; i++) {
      const state = await client.nextOfType<StateMessage>("state");
      vm = reduce(vm, state);
      if (!state.shield || !state.action) continue;
      const drawn = chosenHull(vm.state!);
      const idx = state.shield.actions.indexOf(state.action);
      expect(drawn).toEqual(state.shield.hulls[idx]);
      checked++;
    }
    expect(checked).toBeGreaterThanOrEqual(3);
    client.send({ type: "pause" });
    client.close();
  }, 30000);
});
