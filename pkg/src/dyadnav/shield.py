"""Convex-hull action shielding.

For every candidate action the next dyad pose is predicted through the
interaction model, the swept region of both agents over the two timesteps
is hulled, and per-beam lidar thresholds are taken at the hull's far
boundary: a return closer than the exit distance means something intrudes
into the region the dyad is about to sweep, so the action's probability
is scaled by the suppression factor and the vector renormalized.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .env import ActionSpec
from .geometry import Pose2, Polygon2, circle_points, compose, convex_hull
from .interaction import DyadState
from .world import LidarScan

from . import core


@dataclass(frozen=True)
class ShieldConfig:
    beta: float = 0.0
    robot_radius: float = 0.35
    human_radius: float = 0.30
    circle_samples: int = 32
    fallback: str = "stop"  # or "least_unsafe"
    # extra disc inflation for moving agents: a shallow graze between two
    # adjacent beams subtends too little angle for the lidar to see, so pad
    # zones by roughly (distance * beam gap)^2 / (8 r). Scales with the
    # agent's predicted displacement and is exactly zero for stop, keeping
    # the stop zone equal to the current footprint.
    safety_margin: float = 0.02

    def __post_init__(self):
        if not 0.0 <= self.beta <= 1.0:
            raise ValueError("beta must lie in [0, 1]")
        if self.robot_radius <= 0 or self.human_radius <= 0:
            raise ValueError("agent radii must be positive")
        if self.circle_samples < 12:
            raise ValueError("need at least 12 circle samples")
        if self.fallback not in ("stop", "least_unsafe"):
            raise ValueError("fallback must be 'stop' or 'least_unsafe'")
        if self.safety_margin < 0:
            raise ValueError("safety_margin must be >= 0")


@dataclass
class ShieldReport:
    action_names: list[str]
    hulls: list[Polygon2]
    thresholds: list[np.ndarray]  # per-beam exit distances, NaN = beam misses
    unsafe: np.ndarray  # bool per action
    margins: np.ndarray  # worst threshold-minus-reading violation per action
    modified_probs: np.ndarray
    fallback_used: bool = False

    def to_json_dict(self) -> dict:
        return {
            "actions": self.action_names,
            "hulls": [h.vertices.tolist() for h in self.hulls],
            "thresholds": [[None if math.isnan(v) else v for v in t]
                           for t in self.thresholds],
            "unsafe": self.unsafe.tolist(),
            "probs": self.modified_probs.tolist(),
            "fallback_used": self.fallback_used,
        }


def estimate_next(model, state: DyadState, action: ActionSpec) -> DyadState:
    """Predicted dyad state after the action; stop is a strict no-op."""
    if action.is_stop:
        return state
    robot_next = compose(state.robot, Pose2(action.dx, action.dy, action.dtheta))
    return model.step(state, robot_next)


def inflated_radius(radius: float, samples: int) -> float:
    """Radius plus the chord sagitta so the sample polygon circumscribes the disc."""
    return radius * (2.0 - math.cos(math.pi / samples))


def _motion_margin(cfg: ShieldConfig, pose_t: Pose2, pose_t1: Pose2) -> float:
    # the blind gap between adjacent beams is a property of the lidar, not
    # of step size, so any motion at all warrants the full margin; only a
    # perfectly stationary disc (stop) goes unpadded
    disp = math.hypot(pose_t1.x - pose_t.x, pose_t1.y - pose_t.y)
    return cfg.safety_margin if disp > 1e-12 else 0.0


def shield_zone(state_t: DyadState, state_t1: DyadState,
                cfg: ShieldConfig) -> Polygon2:
    """Convex hull of both agents' discs at the current and next timestep."""
    rr = inflated_radius(cfg.robot_radius, cfg.circle_samples) \
        + _motion_margin(cfg, state_t.robot, state_t1.robot)
    hr = inflated_radius(cfg.human_radius, cfg.circle_samples) \
        + _motion_margin(cfg, state_t.human, state_t1.human)
    pts = np.vstack([
        circle_points(state_t.robot.xy, rr, cfg.circle_samples),
        circle_points(state_t.human.xy, hr, cfg.circle_samples),
        circle_points(state_t1.robot.xy, rr, cfg.circle_samples),
        circle_points(state_t1.human.xy, hr, cfg.circle_samples),
    ])
    return convex_hull(pts)


def lidar_thresholds(zone: Polygon2, beam_angles: np.ndarray,
                     robot_pose: Pose2) -> np.ndarray:
    """Exit distance of each beam through the zone; NaN where a beam misses."""
    world_angles = np.asarray(beam_angles, dtype=np.float64) + robot_pose.theta
    return core.hull_thresholds(zone.vertices, robot_pose.x, robot_pose.y,
                                world_angles)


def apply_shield(probs, actions, state: DyadState, scan: LidarScan, model,
                 cfg: ShieldConfig) -> ShieldReport:
    """Suppress actions whose swept zone shows a lidar intrusion.

    If suppression empties the distribution (beta = 0 with every action
    unsafe), the fallback picks stop when available, otherwise the action
    with the smallest worst-case violation margin.
    """
    probs = np.asarray(probs, dtype=np.float64)
    if len(probs) != len(actions):
        raise ValueError("probs and actions must align")
    if abs(probs.sum() - 1.0) > 1e-6 or np.any(probs < 0):
        raise ValueError("probs must be a probability vector")

    n = len(actions)
    hulls = []
    thresholds = []
    unsafe = np.zeros(n, dtype=bool)
    margins = np.full(n, -np.inf)
    ranges = scan.ranges
    for i, action in enumerate(actions):
        nxt = estimate_next(model, state, action)
        zone = shield_zone(state, nxt, cfg)
        thr = lidar_thresholds(zone, scan.angles, state.robot)
        viol = thr - ranges
        viol[np.isnan(thr)] = -np.inf
        worst = float(viol.max()) if len(viol) else -np.inf
        margins[i] = worst
        unsafe[i] = worst > 0.0
        hulls.append(zone)
        thresholds.append(thr)

    modified = probs.copy()
    modified[unsafe] *= cfg.beta
    total = modified.sum()
    fallback_used = False
    if total <= 0.0:
        fallback_used = True
        modified = np.zeros(n)
        stop_idx = next((i for i, a in enumerate(actions) if a.is_stop), None)
        if cfg.fallback == "stop" and stop_idx is not None:
            modified[stop_idx] = 1.0
        else:
            modified[int(np.argmin(margins))] = 1.0
    else:
        modified = modified / total
    return ShieldReport(
        action_names=[a.name for a in actions],
        hulls=hulls,
        thresholds=thresholds,
        unsafe=unsafe,
        margins=margins,
        modified_probs=modified,
        fallback_used=fallback_used,
    )
