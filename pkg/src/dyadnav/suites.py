"""Scenario definitions: worlds, cue schedules, and the evaluation suites.

Scenario geometry is deterministic; randomized elements (box placement)
derive from fixed seeds so every suite is reproducible byte-for-byte.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .env import STEP_LENGTH, ErrorInjection, RewardParams, WayfindEnv
from .geometry import Pose2
from .world import (DEFAULT_MAX_RANGE, DEFAULT_N_BEAMS, OccupancyWorld,
                    SensorNoise, build_world)

WALL = 0.3  # wall thickness around carved corridors


def carve_world(extent, free_rects, obstacle_boxes=(), cell: float = 0.05) -> OccupancyWorld:
    """Occupied-everywhere grid with free rectangles carved out."""
    nx = max(1, round(extent[0] / cell))
    ny = max(1, round(extent[1] / cell))
    grid = np.ones((ny, nx), dtype=np.uint8)
    for x0, y0, x1, y1 in free_rects:
        ix0 = max(0, math.ceil(x0 / cell - 0.5))
        ix1 = min(nx, math.floor(x1 / cell - 0.5) + 1)
        iy0 = max(0, math.ceil(y0 / cell - 0.5))
        iy1 = min(ny, math.floor(y1 / cell - 0.5) + 1)
        grid[iy0:iy1, ix0:ix1] = 0
    for x0, y0, x1, y1 in obstacle_boxes:
        ix0 = max(0, math.floor(x0 / cell + 1e-12))
        ix1 = min(nx, math.ceil(x1 / cell - 1e-12))
        iy0 = max(0, math.floor(y0 / cell + 1e-12))
        iy1 = min(ny, math.ceil(y1 / cell - 1e-12))
        grid[iy0:iy1, ix0:ix1] = 1
    return OccupancyWorld(cell_size=cell, grid=grid)


def corridor_world(length: float = 8.0, width: float = 2.0) -> OccupancyWorld:
    return carve_world((length + 2 * WALL, width + 2 * WALL),
                       [(WALL, WALL, WALL + length, WALL + width)])


def l_corner_world(stem: float = 4.5, branch: float = 3.5, width: float = 2.0,
                   turn: str = "left") -> OccupancyWorld:
    """Corridor along +x ending in a corner branch along +y (left) or -y."""
    x_end = WALL + stem
    if turn == "left":
        extent = (x_end + WALL, WALL + width + branch + WALL)
        stem_rect = (WALL, WALL, x_end, WALL + width)
        branch_rect = (x_end - width, WALL, x_end, WALL + width + branch)
    else:
        extent = (x_end + WALL, WALL + branch + width + WALL)
        y0 = WALL + branch
        stem_rect = (WALL, y0, x_end, y0 + width)
        branch_rect = (x_end - width, WALL, x_end, y0 + width)
    return carve_world(extent, [stem_rect, branch_rect])


def t_junction_world(stem: float = 4.5, branch: float = 3.5,
                     width: float = 2.0) -> OccupancyWorld:
    """Corridor along +x ending in a cross-corridor along both +y and -y."""
    x_end = WALL + stem
    cy = WALL + branch  # stem floor y
    extent = (x_end + WALL, WALL + branch + width + branch + WALL)
    stem_rect = (WALL, cy, x_end, cy + width)
    cross_rect = (x_end - width, WALL, x_end, WALL + branch + width + branch)
    return carve_world(extent, [stem_rect, cross_rect])


def box_room_world(w: float = 7.0, h: float = 7.0, boxes=()) -> OccupancyWorld:
    return carve_world((w + 2 * WALL, h + 2 * WALL),
                       [(WALL, WALL, WALL + w, WALL + h)], obstacle_boxes=boxes)


@dataclass(frozen=True)
class Scenario:
    name: str
    world: OccupancyWorld
    start: Pose2
    cues: tuple = ((0, "forward"),)
    errors: ErrorInjection = field(default_factory=ErrorInjection)
    reward: RewardParams = field(default_factory=RewardParams)
    max_steps: int = 80
    n_beams: int = DEFAULT_N_BEAMS
    max_range: float = DEFAULT_MAX_RANGE
    robot_radius: float = 0.35
    human_radius: float = 0.30

    def make_env(self, model, noise_sigma: float = 0.0, seed: int = 0) -> WayfindEnv:
        return WayfindEnv(
            world=self.world, start=self.start, model=model, cue_schedule=self.cues,
            errors=self.errors, reward=self.reward, max_steps=self.max_steps,
            n_beams=self.n_beams, max_range=self.max_range,
            noise=SensorNoise(noise_sigma, seed),
            robot_radius=self.robot_radius, human_radius=self.human_radius)


def _corridor_start(width: float) -> Pose2:
    # leave room for the trailing human disc behind the robot
    return Pose2(1.6, WALL + width / 2.0, 0.0)


def fig_corridor_scenario(orientation_deg: float = 20.0, length: float = 8.0,
                          width: float = 2.0, name: str = "corridor-orient") -> Scenario:
    """Forward cue down a corridor with a deliberate heading bias."""
    return Scenario(
        name=name,
        world=corridor_world(length, width),
        start=_corridor_start(width),
        cues=((0, "forward"),),
        errors=ErrorInjection(orientation_error=math.radians(orientation_deg)),
        max_steps=70,
    )


def corner_scenario(turn: str = "left", timing_steps: int = 0,
                    stem: float = 4.5, branch: float = 3.5, width: float = 2.0,
                    name: str | None = None) -> Scenario:
    """Turn cue at an L-corner, optionally issued early (<0) or late (>0)."""
    world = l_corner_world(stem, branch, width, turn)
    if turn == "left":
        start = Pose2(1.6, WALL + width / 2.0, 0.0)
    else:
        start = Pose2(1.6, WALL + branch + width / 2.0, 0.0)
    corner_entry = stem - width / 2.0 - (start.x - WALL)
    cue_step = max(1, round(corner_entry / STEP_LENGTH))
    return Scenario(
        name=name or f"corner-{turn}",
        world=world,
        start=start,
        cues=((0, "forward"), (cue_step, turn)),
        errors=ErrorInjection(timing_steps=timing_steps),
        max_steps=90,
    )


def t_junction_scenario(turn: str = "left", timing_steps: int = 0,
                        stem: float = 4.5, branch: float = 3.5,
                        width: float = 2.0, name: str | None = None) -> Scenario:
    world = t_junction_world(stem, branch, width)
    start = Pose2(1.6, WALL + branch + width / 2.0, 0.0)
    corner_entry = stem - width / 2.0 - (start.x - WALL)
    cue_step = max(1, round(corner_entry / STEP_LENGTH))
    return Scenario(
        name=name or f"tjunction-{turn}",
        world=world,
        start=start,
        cues=((0, "forward"), (cue_step, turn)),
        errors=ErrorInjection(timing_steps=timing_steps),
        max_steps=90,
    )


def box_room_scenario(seed: int, n_boxes: int = 4, orientation_deg: float = 0.0,
                      name: str | None = None) -> Scenario:
    """Forward cue across a room scattered with box obstacles."""
    rng = np.random.default_rng(seed)
    boxes = []
    for _ in range(n_boxes):
        side = 0.5 + 0.5 * rng.random()
        # keep a clear spawn area near the start and a clear goal strip
        x0 = 2.2 + (4.0 - side) * rng.random()
        y0 = WALL + 0.4 + (6.2 - side) * rng.random()
        boxes.append((x0, y0, x0 + side, y0 + side))
    world = box_room_world(7.0, 7.0, boxes)
    return Scenario(
        name=name or f"boxroom-{seed}",
        world=world,
        start=Pose2(1.6, WALL + 3.5, 0.0),
        cues=((0, "forward"),),
        errors=ErrorInjection(orientation_error=math.radians(orientation_deg)),
        max_steps=70,
    )


def fig5a_scenario() -> Scenario:
    """Forward cue with a 20 degree orientation error in a 2 m corridor."""
    return fig_corridor_scenario(20.0, length=8.0, width=2.0, name="fig5a")


def fig5b_scenario() -> Scenario:
    """Left cue issued 5 steps early before a T-junction."""
    base = t_junction_scenario("left", timing_steps=-5, name="fig5b")
    return replace(base, max_steps=110)


def training_corridor_scenario() -> Scenario:
    """Plain forward corridor used by the policy-gradient trainer."""
    return Scenario(
        name="train-corridor",
        world=corridor_world(6.0, 2.4),
        start=_corridor_start(2.4),
        cues=((0, "forward"),),
        max_steps=40,
        n_beams=24,
    )


def wedge_scenario() -> Scenario:
    """Dead-end tube so tight that every move fails the shield check.

    Under the rigid harness model every action except stop sweeps a disc
    into a wall, so a suppression factor of zero pins the policy to stop
    from the first step: the scenario that makes a trainer's divergence
    detector fire. Band edges sit on cell boundaries (0.35 and 1.25) so
    the carved tube is exactly 0.90 m wide.
    """
    world = carve_world((3.1, 1.6), [(0.3, 0.35, 2.8, 1.25)])
    return Scenario(
        name="wedge",
        world=world,
        start=Pose2(2.35, 0.8, 0.0),
        cues=((0, "forward"),),
        max_steps=60,
    )


def table3_suite() -> list[Scenario]:
    """25 fixed scenarios for the shielding ablation."""
    scenarios = []
    corridor_params = [
        (22.0, 8.0, 2.0), (-24.0, 7.5, 2.1), (26.0, 9.0, 2.0),
        (-22.0, 8.5, 2.2), (28.0, 7.0, 1.9), (24.0, 8.0, 2.0),
        (-26.0, 9.5, 2.1), (23.0, 7.5, 2.0), (-28.0, 8.0, 2.2),
        (25.0, 9.0, 2.0),
    ]
    for i, (err, length, width) in enumerate(corridor_params):
        scenarios.append(fig_corridor_scenario(err, length, width,
                                               name=f"corridor-{i}"))
    corner_params = [("left", 0), ("left", -3), ("right", 0),
                     ("right", 3), ("left", 3)]
    for i, (turn, shift) in enumerate(corner_params):
        scenarios.append(corner_scenario(turn, shift, name=f"corner-{i}"))
    tj_params = [("left", -4), ("left", 4), ("right", -4),
                 ("right", 4), ("left", 0)]
    for i, (turn, shift) in enumerate(tj_params):
        scenarios.append(t_junction_scenario(turn, shift, name=f"tjunction-{i}"))
    for i in range(5):
        scenarios.append(box_room_scenario(seed=100 + i, n_boxes=4,
                                           orientation_deg=(-1) ** i * 10.0,
                                           name=f"boxroom-{i}"))
    return scenarios


def mismatch_suite() -> list[Scenario]:
    """Corner-heavy corridor suite for train/test model-mismatch runs."""
    out = []
    for i, (turn, shift) in enumerate([("left", 0), ("right", 0),
                                       ("left", -2), ("right", 2)]):
        out.append(corner_scenario(turn, shift, width=1.8,
                                   name=f"mm-corner-{i}"))
    for i, (turn, shift) in enumerate([("left", -3), ("right", 3)]):
        out.append(t_junction_scenario(turn, shift, width=1.8,
                                       name=f"mm-tjunction-{i}"))
    out.append(fig_corridor_scenario(20.0, 7.0, 1.8, name="mm-corridor-0"))
    out.append(fig_corridor_scenario(-20.0, 7.0, 1.8, name="mm-corridor-1"))
    return out


BUILTIN_SCENARIOS = {
    "fig5a": fig5a_scenario,
    "fig5b": fig5b_scenario,
    "corridor": lambda: fig_corridor_scenario(0.0, name="corridor"),
    "train-corridor": training_corridor_scenario,
    "wedge": wedge_scenario,
}


def builtin_scenario(name: str) -> Scenario:
    if name not in BUILTIN_SCENARIOS:
        raise ValueError(f"unknown builtin scenario: {name!r} "
                         f"(have {sorted(BUILTIN_SCENARIOS)})")
    return BUILTIN_SCENARIOS[name]()


def scenario_from_file(path) -> Scenario:
    """Load a scenario JSON file (world path resolved relative to it)."""
    path = Path(path)
    doc = json.loads(path.read_text())
    world_ref = doc["world"]
    if isinstance(world_ref, str) and world_ref.startswith("builtin:"):
        world = builtin_scenario(world_ref.split(":", 1)[1]).world
    else:
        world = build_world(Path(path.parent / world_ref))
    err = doc.get("errors", {})
    rew = doc.get("reward", {})
    return Scenario(
        name=doc.get("name", path.stem),
        world=world,
        start=Pose2(*doc["start"]),
        cues=tuple((int(c["step"]), str(c["cue"])) for c in doc.get("cues", [])),
        errors=ErrorInjection(
            orientation_error=math.radians(float(err.get("orientation_deg", 0.0))),
            timing_steps=int(err.get("timing_steps", 0))),
        reward=RewardParams(
            a=float(rew.get("a", 1.0)),
            b=math.radians(float(rew.get("b_deg", 15.0))),
            c_collide=float(rew.get("c_collide", 1.0)),
            lam=float(rew.get("lambda", 0.01))),
        max_steps=int(doc.get("max_steps", 80)),
        n_beams=int(doc.get("n_beams", DEFAULT_N_BEAMS)),
        max_range=float(doc.get("max_range", DEFAULT_MAX_RANGE)),
    )


def scenario_spec(name: str) -> Scenario:
    """Resolve 'builtin:<name>' or a JSON file path to a Scenario."""
    if name.startswith("builtin:"):
        return builtin_scenario(name.split(":", 1)[1])
    return scenario_from_file(name)
