"""One documented config schema for every runnable entry point.

All numeric defaults live here so a run manifest (config + seed +
versions) is enough to reproduce any experiment byte for byte.
"""

from __future__ import annotations

import copy
import json
import math
import platform

import numpy as np

from . import __version__, core
from .env import RewardParams
from .geometry import Pose2
from .interaction import (DelayedHarnessParams, FixedHarnessParams,
                          RotatingRodParams, make_model)
from .policy import GreedyConfig
from .shield import ShieldConfig

DEFAULTS: dict = {
    "seed": 0,
    "interaction": {
        "kind": "delayed",  # fixed | delayed | rod
        "offset": [-0.9, 0.0, 0.0],  # delayed: default offset [dx, dy, dtheta]
        "alpha": 0.8,  # delayed: decay weight on the stale offset
        "d": -0.9,  # fixed: signed distance along the robot heading
        "rod_length": 0.9,  # rod
        "attach": [0.0, 0.0, 0.0],  # rod: pivot in the robot frame
    },
    "shield": {
        "beta": 0.0,
        "robot_radius": 0.35,
        "human_radius": 0.30,
        "circle_samples": 32,
        "fallback": "stop",
        "safety_margin": 0.02,
    },
    "reward": {"a": 1.0, "b_deg": 15.0, "c_collide": 1.0, "lambda": 0.01},
    "lidar": {"n_beams": 72, "max_range": 10.0, "sigma": 0.0},
    "policy": {
        "kind": "greedy",  # greedy | linear
        "heading_weight": 3.0,
        "align_weight": 0.5,
        "line_weight": 1.0,
        "prev_line_weight": 0.5,
        "temperature": 0.25,
    },
    "server": {"tick_ms": 100, "scenario": "builtin:corridor", "paused": True},
}


def merged_config(overrides: dict | None = None) -> dict:
    cfg = copy.deepcopy(DEFAULTS)
    if overrides:
        _deep_update(cfg, overrides)
    return cfg


def _deep_update(base: dict, update: dict) -> None:
    for key, value in update.items():
        if isinstance(value, dict) and isinstance(base.get(key), dict):
            _deep_update(base[key], value)
        else:
            base[key] = value


def interaction_model(cfg: dict):
    sub = cfg["interaction"]
    kind = sub["kind"]
    if kind == "fixed":
        return make_model("fixed", FixedHarnessParams(d=float(sub["d"])))
    if kind == "delayed":
        return make_model("delayed", DelayedHarnessParams(
            default_offset=Pose2(*sub["offset"]), alpha=float(sub["alpha"])))
    if kind == "rod":
        return make_model("rod", RotatingRodParams(
            rod_length=float(sub["rod_length"]),
            attach_offset=Pose2(*sub["attach"])))
    raise ValueError(f"unknown interaction kind: {kind!r}")


def shield_config(cfg: dict, beta: float | None = None) -> ShieldConfig:
    sub = cfg["shield"]
    return ShieldConfig(
        beta=float(sub["beta"] if beta is None else beta),
        robot_radius=float(sub["robot_radius"]),
        human_radius=float(sub["human_radius"]),
        circle_samples=int(sub["circle_samples"]),
        fallback=str(sub["fallback"]),
        safety_margin=float(sub["safety_margin"]),
    )


def reward_params(cfg: dict) -> RewardParams:
    sub = cfg["reward"]
    return RewardParams(a=float(sub["a"]), b=math.radians(float(sub["b_deg"])),
                        c_collide=float(sub["c_collide"]),
                        lam=float(sub["lambda"]))


def greedy_config(cfg: dict) -> GreedyConfig:
    sub = cfg["policy"]
    return GreedyConfig(
        heading_weight=float(sub["heading_weight"]),
        align_weight=float(sub["align_weight"]),
        line_weight=float(sub["line_weight"]),
        prev_line_weight=float(sub["prev_line_weight"]),
        temperature=float(sub["temperature"]),
    )


def versions() -> dict:
    return {
        "dyadnav": __version__,
        "python": platform.python_version(),
        "numpy": np.__version__,
        "core_backend": core.BACKEND,
    }


def dump_json(obj, path) -> None:
    """Canonical JSON writer: sorted keys, stable floats, trailing newline."""
    with open(path, "w", encoding="utf-8") as f:
        json.dump(obj, f, indent=2, sort_keys=True, allow_nan=False)
        f.write("\n")


def manifest(subcommand: str, options: dict) -> dict:
    return {"subcommand": subcommand, "options": options, "versions": versions()}
