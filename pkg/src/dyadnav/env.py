"""Wayfinding MDP: observations, discrete actions, reward, error injection.

The human issues high-level directional cues; the robot takes discrete
steps while the configured interaction model drags the human along. All
reward terms are human-centric: travel distance, heading error and the
collision penalty are measured on the human, not the robot.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .geometry import Pose2, compose, invert, wrap_angle
from .interaction import DyadState
from .world import (DEFAULT_MAX_RANGE, DEFAULT_N_BEAMS, LidarScan,
                    OccupancyWorld, SensorNoise, lidar_scan)

CUES = ("forward", "left", "right", "stop")

# target heading change implied by each cue, relative to the human heading
# at the moment the cue takes effect
CUE_DELTA = {"forward": 0.0, "left": math.pi / 2, "right": -math.pi / 2}

STEP_LENGTH = 0.25
TURN_DEG = 10.0
_DIAG = STEP_LENGTH * math.sqrt(0.5)


@dataclass(frozen=True)
class ActionSpec:
    """Robot-frame displacement (dx, dy, dtheta) of one discrete action."""

    name: str
    dx: float
    dy: float
    dtheta: float

    @property
    def is_stop(self) -> bool:
        return self.name == "stop"


DEFAULT_ACTIONS: tuple[ActionSpec, ...] = (
    ActionSpec("stop", 0.0, 0.0, 0.0),
    ActionSpec("forward", STEP_LENGTH, 0.0, 0.0),
    ActionSpec("turn_left_10", 0.0, 0.0, math.radians(TURN_DEG)),
    ActionSpec("turn_right_10", 0.0, 0.0, -math.radians(TURN_DEG)),
    ActionSpec("sidestep_left", 0.0, STEP_LENGTH, 0.0),
    ActionSpec("sidestep_right", 0.0, -STEP_LENGTH, 0.0),
    ActionSpec("diagonal_front_left", _DIAG, _DIAG, 0.0),
    ActionSpec("diagonal_front_right", _DIAG, -_DIAG, 0.0),
)
# two catalog slots are intentionally left open: pass extra ActionSpecs via
# WayfindEnv(actions=...) to extend the set without touching callers


@dataclass(frozen=True)
class Cue:
    cue: str
    issued_at: int

    def __post_init__(self):
        if self.cue not in CUES:
            raise ValueError(f"unknown cue: {self.cue!r}")
        if self.issued_at < 0:
            raise ValueError("issued_at must be >= 0")


@dataclass(frozen=True)
class ErrorInjection:
    """Handler-error model: heading bias on cue targets, shifted cue timing."""

    orientation_error: float = 0.0  # radians added to each cue's target heading
    timing_steps: int = 0  # signed shift of every scheduled cue after step 0

    def __post_init__(self):
        if abs(self.orientation_error) > math.pi / 2:
            raise ValueError("|orientation_error| must be <= pi/2")


@dataclass(frozen=True)
class RewardParams:
    a: float = 1.0
    b: float = math.radians(15.0)
    c_collide: float = 1.0
    lam: float = 0.01

    def __post_init__(self):
        if min(self.a, self.b, self.c_collide, self.lam) < 0:
            raise ValueError("reward weights must be >= 0")


@dataclass(frozen=True)
class Observation:
    lidar: np.ndarray  # ranges normalized by max_range, in [0, 1]
    rel_from_start: np.ndarray  # (dx, dy, dtheta) of the robot in the start frame
    cue_onehot: np.ndarray  # order: forward, left, right, stop


def heading_error(theta_target: float, theta: float, b: float) -> float:
    """Margin-activated orientation error: max(|wrap(target - theta)| - b, 0)."""
    return max(abs(wrap_angle(theta_target - theta)) - b, 0.0)


def compute_reward(d_prev: float, d_cur: float, e_prev: float, e_cur: float,
                   collided: bool, params: RewardParams) -> float:
    """Distance gain minus orientation-error increase, collision and time cost."""
    r = (d_cur - d_prev) - params.a * (e_cur - e_prev) - params.lam
    if collided:
        r -= params.c_collide
    return r


class EpisodeDone(RuntimeError):
    pass


class WayfindEnv:
    """One dyad episode in a static world.

    Deterministic given (world, schedule, errors, seed, action sequence).
    The stop action freezes both agents for the tick; every other action
    moves the robot and advances the human through the interaction model.
    Colliding moves are rejected: poses hold, the penalty applies, and the
    episode continues.
    """

    def __init__(self, world: OccupancyWorld, start: Pose2, model,
                 cue_schedule=(), errors: ErrorInjection | None = None,
                 reward: RewardParams | None = None, max_steps: int = 200,
                 n_beams: int = DEFAULT_N_BEAMS, max_range: float = DEFAULT_MAX_RANGE,
                 noise: SensorNoise | None = None, robot_radius: float = 0.35,
                 human_radius: float = 0.30, actions=DEFAULT_ACTIONS,
                 seed: int = 0):
        self.world = world
        self.start = start
        self.model = model
        self.errors = errors or ErrorInjection()
        self.reward_params = reward or RewardParams()
        self.max_steps = max_steps
        self.n_beams = n_beams
        self.max_range = max_range
        self.noise = noise if noise is not None else SensorNoise(0.0, seed)
        self.robot_radius = robot_radius
        self.human_radius = human_radius
        self.actions = tuple(actions)
        self.action_names = [a.name for a in self.actions]
        self._schedule = self._effective_schedule(cue_schedule)
        self.reset()

    def _effective_schedule(self, cue_schedule) -> list[Cue]:
        cues = []
        for item in cue_schedule:
            if isinstance(item, Cue):
                cues.append(item)
            else:
                step, name = item
                cues.append(Cue(cue=str(name), issued_at=int(step)))
        cues.sort(key=lambda c: c.issued_at)
        if not any(c.issued_at == 0 for c in cues):
            cues.insert(0, Cue("forward", 0))
        shift = self.errors.timing_steps
        out = []
        for c in cues:
            if c.issued_at > 0 and shift != 0:
                moved = min(max(c.issued_at + shift, 1), self.max_steps - 1)
                out.append(Cue(c.cue, moved))
            else:
                out.append(c)
        out.sort(key=lambda c: c.issued_at)
        return out

    @property
    def schedule(self) -> list[Cue]:
        return list(self._schedule)

    def reset(self) -> Observation:
        robot = self.start
        human = compose(robot, self.model.default_offset())
        if self.world.circle_collides(robot.xy, self.robot_radius) or \
                self.world.circle_collides(human.xy, self.human_radius):
            raise ValueError("invalid start: agent discs collide with the world")
        self.state = DyadState.of(robot, human)
        self.human_start = human
        self._step_count = 0
        self._done = False
        self._cue_idx = -1
        self._active_cue = None
        self._theta_target = human.theta
        self._theta_target_prev = human.theta
        self._d_prev = 0.0
        self._e_prev = 0.0
        self._advance_cue()
        self._theta_target_prev = self._theta_target
        self._e_prev = heading_error(self._theta_target, human.theta,
                                     self.reward_params.b)
        self.collision_count = 0
        return self.observe()

    def _advance_cue(self) -> bool:
        """Activate the newest cue with issued_at <= current step."""
        changed = False
        while (self._cue_idx + 1 < len(self._schedule)
               and self._schedule[self._cue_idx + 1].issued_at <= self._step_count):
            self._cue_idx += 1
            changed = True
        if changed:
            cue = self._schedule[self._cue_idx]
            self._active_cue = cue.cue
            anchor = self.state.human.theta
            self._theta_target_prev = self._theta_target
            if cue.cue == "stop":
                self._theta_target = anchor
            else:
                self._theta_target = wrap_angle(
                    anchor + CUE_DELTA[cue.cue] + self.errors.orientation_error)
        return changed

    @property
    def step_count(self) -> int:
        return self._step_count

    @property
    def done(self) -> bool:
        return self._done

    @property
    def active_cue(self) -> str:
        return self._active_cue or "forward"

    @property
    def theta_target(self) -> float:
        return self._theta_target

    @property
    def theta_target_prev(self) -> float:
        """Target heading of the preceding cue (current one at episode start)."""
        return self._theta_target_prev

    def add_cue(self, cue: str, at_step: int) -> None:
        """Insert a live cue taking effect at a future step (session use)."""
        if at_step <= self._step_count:
            raise ValueError("live cues must be scheduled after the current step")
        new = Cue(cue=cue, issued_at=int(at_step))
        idx = self._cue_idx + 1
        while idx < len(self._schedule) and self._schedule[idx].issued_at <= at_step:
            idx += 1
        self._schedule.insert(idx, new)

    def action_by_name(self, name: str) -> ActionSpec:
        for a in self.actions:
            if a.name == name:
                return a
        raise ValueError(f"unknown action: {name!r}")

    def human_distance(self, human: Pose2) -> float:
        return math.hypot(human.x - self.human_start.x, human.y - self.human_start.y)

    def propose(self, action: ActionSpec) -> DyadState:
        """Next dyad state for an action, without collision checks."""
        if action.is_stop:
            return self.state
        robot_next = compose(self.state.robot,
                             Pose2(action.dx, action.dy, action.dtheta))
        return self.model.step(self.state, robot_next)

    def step(self, action) -> tuple[Observation, float, bool, dict]:
        if self._done:
            raise EpisodeDone("episode is done; call reset()")
        if isinstance(action, str):
            action = self.action_by_name(action)
        proposed = self.propose(action)
        collided_robot = self.world.circle_collides(proposed.robot.xy,
                                                    self.robot_radius)
        collided_human = self.world.circle_collides(proposed.human.xy,
                                                    self.human_radius)
        collided = collided_robot or collided_human
        state_next = self.state if collided else proposed

        self._step_count += 1
        self.state = state_next
        if self._advance_cue():
            # new target: the orientation term restarts from zero change
            self._e_prev = heading_error(self._theta_target,
                                         state_next.human.theta,
                                         self.reward_params.b)
        d_cur = self.human_distance(state_next.human)
        e_cur = heading_error(self._theta_target, state_next.human.theta,
                              self.reward_params.b)
        reward = compute_reward(self._d_prev, d_cur, self._e_prev, e_cur,
                                collided, self.reward_params)
        self._d_prev = d_cur
        self._e_prev = e_cur
        if collided:
            self.collision_count += 1

        if (self.active_cue == "stop" and action.is_stop) or \
                self._step_count >= self.max_steps:
            self._done = True
        info = {
            "collided_robot": collided_robot,
            "collided_human": collided_human,
            "d_t": d_cur,
            "theta_err": e_cur,
            "action": action.name,
        }
        return self.observe(), reward, self._done, info

    def scan(self) -> LidarScan:
        """Lidar for the current pose; the scan counter is the step index."""
        cached = getattr(self, "_scan_cache", None)
        if cached is not None and cached[0] == self._step_count:
            return cached[1]
        scan = lidar_scan(self.world, self.state.robot, self.n_beams,
                          self.max_range, self.noise, scan_index=self._step_count)
        self._scan_cache = (self._step_count, scan)
        return scan

    def observe(self) -> Observation:
        scan = self.scan()
        rel = compose(invert(self.start), self.state.robot)
        onehot = np.zeros(len(CUES))
        onehot[CUES.index(self.active_cue)] = 1.0
        return Observation(
            lidar=scan.ranges / scan.max_range,
            rel_from_start=np.array([rel.x, rel.y, rel.theta]),
            cue_onehot=onehot,
        )
