"""Trajectory dataset IO, scripted robot paths, synthetic dyad generation.

The five scripted robot trajectories mirror the motion-capture collection
runs: forward segments, in-place turns, and one gradual (constant
curvature) turn. Synthetic dyad data drives the fitting experiments.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .geometry import Pose2, compose, wrap_angle
from .interaction import (DelayedHarnessParams, DyadTrajectory, _rollout_array)

NOMINAL_DT = 0.1  # seconds between records in trajectory files
DEFAULT_ARC_RADIUS = 1.0


@dataclass(frozen=True)
class Segment:
    kind: str  # "forward" | "turn" | "arc"
    length: float = 0.0  # meters, forward only
    angle_deg: float = 0.0  # signed, CCW positive; turn and arc
    radius: float = DEFAULT_ARC_RADIUS  # arc only


def forward(length: float) -> Segment:
    return Segment("forward", length=length)


def turn(angle_deg: float) -> Segment:
    return Segment("turn", angle_deg=angle_deg)


def arc(angle_deg: float, radius: float = DEFAULT_ARC_RADIUS) -> Segment:
    return Segment("arc", angle_deg=angle_deg, radius=radius)


@dataclass(frozen=True)
class ScriptedTrajectory:
    id: int
    segments: tuple[Segment, ...]


# Unqualified turns are treated as in-place; only the one turn described
# as gradual is an arc.
SCRIPTED_TRAJECTORIES = {
    1: ScriptedTrajectory(1, (forward(2.5), turn(90))),
    2: ScriptedTrajectory(2, (forward(1.2), turn(90))),
    3: ScriptedTrajectory(3, (forward(0.75), arc(45), turn(-135))),
    4: ScriptedTrajectory(4, (forward(0.5), turn(-90), forward(0.5),
                              turn(90), forward(0.5))),
    5: ScriptedTrajectory(5, (forward(0.6), turn(-90), forward(0.6),
                              turn(180), forward(0.6), turn(-90), forward(0.6))),
}


def script_trajectory(traj_id: int, step_length: float = 0.1,
                      turn_step_deg: float = 10.0,
                      arc_radius: float = DEFAULT_ARC_RADIUS) -> list[Pose2]:
    """Discretized robot pose sequence for one scripted trajectory."""
    if traj_id not in SCRIPTED_TRAJECTORIES:
        raise ValueError(f"unknown trajectory id: {traj_id!r} (expected 1..5)")
    if step_length <= 0 or turn_step_deg <= 0:
        raise ValueError("step_length and turn_step_deg must be positive")
    poses = [Pose2()]
    for seg in SCRIPTED_TRAJECTORIES[traj_id].segments:
        cur = poses[-1]
        if seg.kind == "forward":
            n = max(1, round(seg.length / step_length))
            step = seg.length / n
            for k in range(1, n + 1):
                poses.append(Pose2(cur.x + k * step * math.cos(cur.theta),
                                   cur.y + k * step * math.sin(cur.theta),
                                   cur.theta))
        elif seg.kind == "turn":
            n = max(1, round(abs(seg.angle_deg) / turn_step_deg))
            dth = math.radians(seg.angle_deg) / n
            for k in range(1, n + 1):
                poses.append(Pose2(cur.x, cur.y, cur.theta + k * dth))
        elif seg.kind == "arc":
            radius = seg.radius if seg.radius else arc_radius
            n = max(1, round(abs(seg.angle_deg) / turn_step_deg))
            total = math.radians(seg.angle_deg)
            side = 1.0 if total >= 0 else -1.0
            # arc center sits perpendicular to the heading
            cx = cur.x - side * radius * math.sin(cur.theta)
            cy = cur.y + side * radius * math.cos(cur.theta)
            phi0 = math.atan2(cur.y - cy, cur.x - cx)
            for k in range(1, n + 1):
                phi = phi0 + k * total / n
                poses.append(Pose2(cx + radius * math.cos(phi),
                                   cy + radius * math.sin(phi),
                                   cur.theta + k * total / n))
    return poses


def path_length(poses) -> float:
    pts = np.array([[p.x, p.y] for p in poses])
    return float(np.sum(np.hypot(*np.diff(pts, axis=0).T))) if len(pts) > 1 else 0.0


@dataclass(frozen=True)
class SubjectProfile:
    subject_id: str
    params: DelayedHarnessParams = field(default_factory=DelayedHarnessParams)
    noise_sigma: float = 0.0

    def __post_init__(self):
        if self.noise_sigma < 0:
            raise ValueError("noise_sigma must be >= 0")


def synthesize_dyad(profile: SubjectProfile, robot_traj, seed: int = 0) -> DyadTrajectory:
    """Generate one dyad trajectory: model rollout plus position noise."""
    if isinstance(robot_traj, np.ndarray):
        robot = np.asarray(robot_traj, dtype=np.float64)
    else:
        robot = np.array([p.as_array() for p in robot_traj])
    if len(robot) == 0:
        raise ValueError("robot trajectory must be non-empty")
    r0 = Pose2.from_array(robot[0])
    human0 = compose(r0, profile.params.default_offset)
    human = _rollout_array("delayed", profile.params, robot, human0.as_array())
    if profile.noise_sigma > 0:
        rng = np.random.default_rng(seed)
        human = human.copy()
        human[:, :2] += rng.normal(0.0, profile.noise_sigma, (len(human), 2))
    t = NOMINAL_DT * np.arange(len(robot))
    return DyadTrajectory(t=t, robot=robot, human=human)


def save_trajectory(traj: DyadTrajectory, path) -> None:
    """Write one trajectory as line-delimited JSON records."""
    path = Path(path)
    with path.open("w", encoding="utf-8") as f:
        for k in range(len(traj)):
            rec = {
                "t": round(float(traj.t[k]), 9),
                "robot": [float(v) for v in traj.robot[k]],
                "human": [float(v) for v in traj.human[k]],
            }
            f.write(json.dumps(rec) + "\n")


def _parse_record(line: str, path, line_no: int) -> dict:
    try:
        rec = json.loads(line)
        t = float(rec["t"])
        robot = [float(v) for v in rec["robot"]]
        human = [float(v) for v in rec["human"]]
        if len(robot) != 3 or len(human) != 3:
            raise ValueError("robot/human must be [x, y, theta]")
    except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
        raise ValueError(f"{path}: bad record at line {line_no}: {exc}") from None
    return {"t": t, "robot": robot, "human": human}


def load_trajectory_file(path) -> DyadTrajectory | None:
    """Parse one JSONL trajectory file; None when the file has no records."""
    path = Path(path)
    records = []
    with path.open("r", encoding="utf-8") as f:
        for line_no, line in enumerate(f, start=1):
            if not line.strip():
                continue
            records.append(_parse_record(line, path, line_no))
    if not records:
        return None
    t = np.array([r["t"] for r in records])
    robot = np.array([r["robot"] for r in records])
    human = np.array([r["human"] for r in records])
    if np.any(np.diff(t) <= 0):
        bad = int(np.argmax(np.diff(t) <= 0)) + 2
        raise ValueError(f"{path}: non-monotone timestamp at line {bad}")
    if not (np.all(np.isfinite(robot)) and np.all(np.isfinite(human))):
        raise ValueError(f"{path}: non-finite pose values")
    return DyadTrajectory(t=t, robot=robot, human=human)


def load_trajectories(path) -> list[DyadTrajectory]:
    """Load trajectories from one JSONL file or a directory of them."""
    path = Path(path)
    if path.is_dir():
        out = []
        for child in sorted(path.glob("*.jsonl")):
            traj = load_trajectory_file(child)
            if traj is not None:
                out.append(traj)
        return out
    if not path.exists():
        raise FileNotFoundError(f"no such trajectory file: {path}")
    traj = load_trajectory_file(path)
    return [] if traj is None else [traj]


def default_profiles() -> list[SubjectProfile]:
    """Three heterogeneous synthetic subjects with distinct offsets/decay."""
    return [
        SubjectProfile("s1", DelayedHarnessParams(Pose2(-0.70, -0.30, 0.0), 0.80), 0.02),
        SubjectProfile("s2", DelayedHarnessParams(Pose2(-0.95, 0.25, wrap_angle(0.15)), 0.55), 0.02),
        SubjectProfile("s3", DelayedHarnessParams(Pose2(-0.55, 0.40, wrap_angle(-0.20)), 0.90), 0.02),
    ]


def generate_dataset(out_dir, profiles=None, repeats: int = 3, seed: int = 0,
                     step_length: float = 0.1, turn_step_deg: float = 10.0) -> list[Path]:
    """Write profiles x five scripted trajectories x repeats JSONL files."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    profiles = profiles if profiles is not None else default_profiles()
    written = []
    for p_idx, profile in enumerate(profiles):
        for traj_id in sorted(SCRIPTED_TRAJECTORIES):
            robot = script_trajectory(traj_id, step_length, turn_step_deg)
            for rep in range(repeats):
                traj_seed = int(np.random.SeedSequence(
                    entropy=seed, spawn_key=(p_idx, traj_id, rep)).generate_state(1)[0])
                dyad = synthesize_dyad(profile, robot, seed=traj_seed)
                name = f"{profile.subject_id}_traj{traj_id}_rep{rep}.jsonl"
                save_trajectory(dyad, out_dir / name)
                written.append(out_dir / name)
    return written
