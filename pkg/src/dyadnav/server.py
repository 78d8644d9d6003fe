"""Session server: live interactive episodes over a WebSocket JSON protocol.

One environment per session, advanced on a fixed tick. The human client
issues directional cues that take effect at the next tick, so early/late
cue timing arises naturally from when the human presses the button.

Wire protocol (all JSON, every server message carries "step"):
  client -> server:
    {"type": "cue", "value": "forward|left|right|stop", "delay_steps": 0}
    {"type": "pause"} | {"type": "resume"} | {"type": "reset"}
    {"type": "config", "beta": 0.0, "noise_sigma": 0.0, "tick_ms": 100,
     "scenario": "builtin:corridor", "seed": 0}
  server -> client:
    {"type": "world", step, session, cell_size, extent, boxes, start}
    {"type": "state", step, robot, human, lidar, shield, reward, cue,
     collided, done, paused}
    {"type": "ack", step, cue, effective_step}
    {"type": "terminal", step, summary}
    {"type": "error", step, message}
"""

from __future__ import annotations

import asyncio
import itertools
import json
import traceback
from pathlib import Path

from fastapi import FastAPI, WebSocket, WebSocketDisconnect

from . import config as cfgmod
from .env import CUES
from .policy import GreedyPolicy
from .suites import scenario_spec

_session_counter = itertools.count(1)


class SessionCore:
    """Synchronous session state machine; the WebSocket layer is a thin shim."""

    def __init__(self, cfg: dict):
        self.cfg = cfg
        self.session_id = next(_session_counter)
        self._build()

    def _build(self):
        cfg = self.cfg
        self.scenario = scenario_spec(cfg["server"]["scenario"])
        self.model = cfgmod.interaction_model(cfg)
        self.env = self.scenario.make_env(
            self.model, noise_sigma=float(cfg["lidar"]["sigma"]),
            seed=int(cfg["seed"]))
        self.policy = GreedyPolicy(self.model, cfgmod.shield_config(cfg),
                                   cfgmod.greedy_config(cfg))
        self.paused = bool(cfg["server"].get("paused", True))
        self.tick_ms = int(cfg["server"]["tick_ms"])
        self.done = False
        self.cue_log: list[dict] = []
        self.total_reward = 0.0
        self._last_reward = 0.0
        self._last_collided = False

    def world_message(self) -> dict:
        world = self.env.world
        return {
            "type": "world",
            "step": self.env.step_count,
            "session": self.session_id,
            "cell_size": world.cell_size,
            "extent": list(world.extent),
            "boxes": world.occupied_boxes(),
            "start": list(self.env.start.as_array()),
            "actions": self.env.action_names,
            "tick_ms": self.tick_ms,
        }

    def state_message(self) -> dict:
        env = self.env
        scan = env.scan()
        report = self.policy.last_report
        return {
            "type": "state",
            "step": env.step_count,
            "robot": list(env.state.robot.as_array()),
            "human": list(env.state.human.as_array()),
            "lidar": [round(float(r), 4) for r in scan.ranges],
            "lidar_angles": [round(float(a), 6) for a in scan.angles],
            "max_range": scan.max_range,
            "shield": report.to_json_dict() if report is not None else None,
            "reward": self._last_reward,
            "total_reward": self.total_reward,
            "cue": env.active_cue,
            "collided": self._last_collided,
            "collisions": env.collision_count,
            "done": self.done,
            "paused": self.paused,
        }

    def apply(self, msg: dict) -> list[dict]:
        """Handle one client message; returns reply messages."""
        step = self.env.step_count
        mtype = msg.get("type")
        if mtype == "cue":
            value = msg.get("value")
            if value not in CUES:
                return [self._error(f"unknown cue: {value!r}")]
            delay = max(0, int(msg.get("delay_steps", 0)))
            effective = step + 1 + delay
            try:
                self.env.add_cue(value, effective)
            except ValueError as exc:
                return [self._error(str(exc))]
            self.cue_log.append({"cue": value, "effective_step": effective})
            return [{"type": "ack", "step": step, "cue": value,
                     "effective_step": effective}]
        if mtype == "pause":
            self.paused = True
            return [self.state_message()]
        if mtype == "resume":
            self.paused = False
            return [self.state_message()]
        if mtype == "reset":
            self._build()
            return [self.world_message(), self.state_message()]
        if mtype == "config":
            try:
                overrides = {}
                if "beta" in msg:
                    overrides["shield"] = {"beta": float(msg["beta"])}
                if "noise_sigma" in msg:
                    overrides["lidar"] = {"sigma": float(msg["noise_sigma"])}
                server_over = {}
                if "tick_ms" in msg:
                    server_over["tick_ms"] = int(msg["tick_ms"])
                if "scenario" in msg:
                    server_over["scenario"] = str(msg["scenario"])
                if server_over:
                    overrides["server"] = server_over
                if "seed" in msg:
                    overrides["seed"] = int(msg["seed"])
                self.cfg = _merge(self.cfg, overrides)
                self._build()
            except (ValueError, KeyError, FileNotFoundError) as exc:
                return [self._error(f"bad config: {exc}")]
            return [self.world_message(), self.state_message()]
        return [self._error(f"unknown message type: {mtype!r}")]

    def tick(self) -> dict | None:
        """Advance one step; returns the state (or terminal) message."""
        if self.paused or self.done:
            return None
        env = self.env
        action = self.policy.act(env)
        _obs, reward, done, info = env.step(action)
        self._last_reward = reward
        self._last_collided = bool(info["collided_robot"] or info["collided_human"])
        self.total_reward += reward
        msg = self.state_message()
        msg["action"] = action
        if done:
            self.done = True
            return {
                "type": "terminal",
                "step": env.step_count,
                "summary": {
                    "steps": env.step_count,
                    "collisions": env.collision_count,
                    "total_reward": self.total_reward,
                },
                "state": msg,
            }
        return msg

    def _error(self, message: str) -> dict:
        return {"type": "error", "step": self.env.step_count, "message": message}


def _merge(cfg: dict, overrides: dict) -> dict:
    import copy
    out = copy.deepcopy(cfg)
    cfgmod._deep_update(out, overrides)
    return out


def create_app(cfg: dict | None = None, static_dir: str | None = None):
    """FastAPI app exposing /ws plus the static web UI when present."""
    app = FastAPI(title="dyadnav session server")
    base_cfg = cfg or cfgmod.merged_config()

    @app.websocket("/ws")
    async def ws_endpoint(ws: WebSocket):
        await ws.accept()
        task = None
        try:
            core = SessionCore(base_cfg)
            lock = asyncio.Lock()
            await ws.send_json(core.world_message())
            await ws.send_json(core.state_message())

            async def ticker():
                while True:
                    await asyncio.sleep(max(core.tick_ms, 1) / 1000.0)
                    async with lock:
                        msg = core.tick()
                        if msg is not None:
                            await ws.send_json(msg)

            task = asyncio.create_task(ticker())
            while True:
                raw = await ws.receive_text()
                try:
                    msg = json.loads(raw)
                except json.JSONDecodeError:
                    await ws.send_json(core._error("message is not valid JSON"))
                    continue
                async with lock:
                    replies = core.apply(msg)
                    for reply in replies:
                        await ws.send_json(reply)
        except WebSocketDisconnect:
            pass
        except Exception:  # log and drop the session, never kill the server
            traceback.print_exc()
        finally:
            if task is not None:
                task.cancel()

    root = _find_static(static_dir)
    if root is not None:
        from fastapi.staticfiles import StaticFiles
        app.mount("/", StaticFiles(directory=root, html=True), name="ui")
    return app


def _find_static(static_dir: str | None) -> str | None:
    if static_dir:
        return static_dir if Path(static_dir).is_dir() else None
    here = Path(__file__).resolve()
    for parent in [Path.cwd(), *here.parents]:
        candidate = parent / "frontend" / "dist"
        if (candidate / "index.html").exists():
            return str(candidate)
    return None
