"""Human/guide-robot interaction models and parameter fitting.

Three models predict the human pose from the robot trajectory: a rigid
fixed-offset harness, a taut rotating rod, and the delayed harness whose
robot-frame offset decays toward a default offset at rate alpha. Offsets
are SE(2) transforms, never raw coordinate differences.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import core
from .geometry import Pose2, compose, invert, wrap_angle
from .optim import simplex_search

HARNESS_REACH = 2.0  # physical harness reach bound on |dx|, |dy|

OFFSET_TOL = 1e-9


@dataclass(frozen=True)
class FixedHarnessParams:
    """Signed handler distance along the robot heading."""

    d: float = -0.9

    def __post_init__(self):
        if abs(self.d) > HARNESS_REACH:
            raise ValueError(f"|d| must be <= {HARNESS_REACH} m")


@dataclass(frozen=True)
class DelayedHarnessParams:
    """Default robot-frame offset and the decay weight on the stale offset."""

    default_offset: Pose2 = field(default_factory=lambda: Pose2(-0.9, 0.0, 0.0))
    alpha: float = 0.5

    def __post_init__(self):
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError("alpha must lie in [0, 1]")
        o = self.default_offset
        if abs(o.x) > HARNESS_REACH or abs(o.y) > HARNESS_REACH:
            raise ValueError(f"offset components must be <= {HARNESS_REACH} m")


@dataclass(frozen=True)
class RotatingRodParams:
    rod_length: float = 0.9
    attach_offset: Pose2 = field(default_factory=Pose2)

    def __post_init__(self):
        if self.rod_length <= 0:
            raise ValueError("rod_length must be positive")


@dataclass(frozen=True)
class DyadState:
    """Joint robot+human world poses plus the human pose in the robot frame."""

    robot: Pose2
    human: Pose2
    offset: Pose2

    def __post_init__(self):
        expect = compose(invert(self.robot), self.human)
        if (abs(expect.x - self.offset.x) > OFFSET_TOL
                or abs(expect.y - self.offset.y) > OFFSET_TOL
                or abs(wrap_angle(expect.theta - self.offset.theta)) > OFFSET_TOL):
            raise ValueError("offset inconsistent with robot/human poses")

    @classmethod
    def of(cls, robot: Pose2, human: Pose2) -> "DyadState":
        return cls(robot=robot, human=human, offset=compose(invert(robot), human))


def step_fixed(params: FixedHarnessParams, robot_next: Pose2) -> Pose2:
    """Rigid harness: human rides at distance d along the robot heading."""
    return Pose2(
        robot_next.x + params.d * math.cos(robot_next.theta),
        robot_next.y + params.d * math.sin(robot_next.theta),
        robot_next.theta,
    )


def step_delayed(params: DelayedHarnessParams, state: DyadState,
                 robot_next: Pose2) -> DyadState:
    """Delayed harness: blend the stale offset toward the default offset.

    The stale offset is the previous human pose re-expressed in the new
    robot frame; translation blends linearly with weight alpha on the
    stale offset, heading along the shortest arc.
    """
    stale = compose(invert(robot_next), state.human)
    obar = params.default_offset
    a = params.alpha
    o_next = Pose2(
        a * stale.x + (1.0 - a) * obar.x,
        a * stale.y + (1.0 - a) * obar.y,
        obar.theta + a * wrap_angle(stale.theta - obar.theta),
    )
    return DyadState(robot=robot_next, human=compose(robot_next, o_next),
                     offset=o_next)


def step_rotating_rod(params: RotatingRodParams, state: DyadState,
                      robot_next: Pose2) -> DyadState:
    """Taut rod: human held at rod_length from the pivot, facing it."""
    pivot = compose(robot_next, params.attach_offset)
    ux = state.human.x - pivot.x
    uy = state.human.y - pivot.y
    norm = math.hypot(ux, uy)
    if norm < 1e-12:
        # degenerate: fall back to straight behind the robot
        ux = -math.cos(robot_next.theta)
        uy = -math.sin(robot_next.theta)
    else:
        ux /= norm
        uy /= norm
    hx = pivot.x + params.rod_length * ux
    hy = pivot.y + params.rod_length * uy
    human = Pose2(hx, hy, math.atan2(pivot.y - hy, pivot.x - hx))
    return DyadState.of(robot_next, human)


class FixedHarness:
    kind = "fixed"

    def __init__(self, params: FixedHarnessParams | None = None):
        self.params = params or FixedHarnessParams()

    def default_offset(self) -> Pose2:
        return Pose2(self.params.d, 0.0, 0.0)

    def step(self, state: DyadState, robot_next: Pose2) -> DyadState:
        return DyadState.of(robot_next, step_fixed(self.params, robot_next))


class DelayedHarness:
    kind = "delayed"

    def __init__(self, params: DelayedHarnessParams | None = None):
        self.params = params or DelayedHarnessParams()

    def default_offset(self) -> Pose2:
        return self.params.default_offset

    def step(self, state: DyadState, robot_next: Pose2) -> DyadState:
        return step_delayed(self.params, state, robot_next)


class RotatingRod:
    kind = "rod"

    def __init__(self, params: RotatingRodParams | None = None):
        self.params = params or RotatingRodParams()

    def default_offset(self) -> Pose2:
        a = self.params.attach_offset
        return Pose2(a.x - self.params.rod_length, a.y, 0.0)

    def step(self, state: DyadState, robot_next: Pose2) -> DyadState:
        return step_rotating_rod(self.params, state, robot_next)


_MODEL_CLASSES = {"fixed": FixedHarness, "delayed": DelayedHarness, "rod": RotatingRod}


def make_model(kind: str, params=None):
    if kind not in _MODEL_CLASSES:
        raise ValueError(f"unknown interaction model kind: {kind!r}")
    return _MODEL_CLASSES[kind](params)


def _rollout_array(kind: str, params, robot: np.ndarray,
                   human0: np.ndarray) -> np.ndarray:
    if kind == "fixed":
        return core.rollout_fixed(robot, params.d, human0)
    if kind == "delayed":
        o = params.default_offset
        return core.rollout_delayed(robot, o.x, o.y, o.theta, params.alpha, human0)
    if kind == "rod":
        a = params.attach_offset
        return core.rollout_rod(robot, params.rod_length, a.x, a.y, human0)
    raise ValueError(f"unknown interaction model kind: {kind!r}")


def rollout_predict(model_kind: str, params, robot_traj, human_0):
    """Predict the human trajectory by iterating the model from human_0.

    Accepts a list of Pose2 (returns the same) or a (T, 3) array
    (returns an array). Output length equals the robot trajectory length.
    """
    if isinstance(robot_traj, np.ndarray):
        if len(robot_traj) == 0:
            raise ValueError("robot trajectory must be non-empty")
        h0 = human_0.as_array() if isinstance(human_0, Pose2) else np.asarray(human_0)
        return _rollout_array(model_kind, params, robot_traj, h0)
    poses = list(robot_traj)
    if not poses:
        raise ValueError("robot trajectory must be non-empty")
    arr = np.array([p.as_array() for p in poses])
    out = _rollout_array(model_kind, params, arr, human_0.as_array())
    return [Pose2.from_array(row) for row in out]


def trajectory_rmse(pred, actual) -> float:
    """Root-mean-square position error over timesteps, in millimeters."""
    p = _positions(pred)
    a = _positions(actual)
    if len(p) != len(a):
        raise ValueError(f"length mismatch: {len(p)} vs {len(a)}")
    if len(p) == 0:
        raise ValueError("empty trajectories")
    d2 = np.sum((p - a) ** 2, axis=1)
    return 1000.0 * float(np.sqrt(d2.mean()))


def _positions(traj) -> np.ndarray:
    if isinstance(traj, np.ndarray):
        return traj[:, :2]
    return np.array([[p.x, p.y] for p in traj])


@dataclass(frozen=True)
class DyadTrajectory:
    """Synchronized robot and human pose sequences at nominal 0.1 s spacing."""

    t: np.ndarray
    robot: np.ndarray  # (T, 3)
    human: np.ndarray  # (T, 3)

    def __post_init__(self):
        t = np.asarray(self.t, dtype=np.float64)
        r = np.asarray(self.robot, dtype=np.float64)
        h = np.asarray(self.human, dtype=np.float64)
        if not (len(t) == len(r) == len(h)) or len(t) == 0:
            raise ValueError("t, robot, human must be equal-length and non-empty")
        if np.any(np.diff(t) <= 0):
            raise ValueError("timestamps must be strictly increasing")
        object.__setattr__(self, "t", t)
        object.__setattr__(self, "robot", r)
        object.__setattr__(self, "human", h)

    def __len__(self) -> int:
        return len(self.t)

    def initial_offset(self) -> Pose2:
        return compose(invert(Pose2.from_array(self.robot[0])),
                       Pose2.from_array(self.human[0]))


FIT_KINDS = ("fixed_unopt", "fixed", "rod", "delayed")

_BOUNDS = {
    "fixed": [(-HARNESS_REACH, HARNESS_REACH)],
    "delayed": [(-HARNESS_REACH, HARNESS_REACH), (-HARNESS_REACH, HARNESS_REACH),
                (-math.pi, math.pi), (0.0, 1.0)],
    "rod": [(0.05, HARNESS_REACH), (-HARNESS_REACH, HARNESS_REACH),
            (-HARNESS_REACH, HARNESS_REACH)],
}


def _params_from_vector(kind: str, vec) -> object:
    if kind == "fixed":
        return FixedHarnessParams(d=float(vec[0]))
    if kind == "delayed":
        return DelayedHarnessParams(
            default_offset=Pose2(float(vec[0]), float(vec[1]), float(vec[2])),
            alpha=float(vec[3]))
    if kind == "rod":
        return RotatingRodParams(rod_length=float(vec[0]),
                                 attach_offset=Pose2(float(vec[1]), float(vec[2]), 0.0))
    raise ValueError(f"unknown fit kind: {kind!r}")


def params_to_dict(params) -> dict:
    if isinstance(params, FixedHarnessParams):
        return {"kind": "fixed", "d": params.d}
    if isinstance(params, DelayedHarnessParams):
        o = params.default_offset
        return {"kind": "delayed", "offset": [o.x, o.y, o.theta], "alpha": params.alpha}
    if isinstance(params, RotatingRodParams):
        a = params.attach_offset
        return {"kind": "rod", "rod_length": params.rod_length,
                "attach": [a.x, a.y, a.theta]}
    raise TypeError(f"unknown params type: {type(params).__name__}")


def params_from_dict(doc: dict):
    kind = doc["kind"]
    if kind == "fixed":
        return FixedHarnessParams(d=float(doc["d"]))
    if kind == "delayed":
        return DelayedHarnessParams(default_offset=Pose2(*doc["offset"]),
                                    alpha=float(doc["alpha"]))
    if kind == "rod":
        return RotatingRodParams(rod_length=float(doc["rod_length"]),
                                 attach_offset=Pose2(*doc["attach"]))
    raise ValueError(f"unknown params kind: {kind!r}")


@dataclass
class FitResult:
    model_kind: str
    params: object
    train_rmse: float
    per_trajectory_rmse: list[float]
    iterations: int
    evaluations: int
    starts: list[list[float]]

    def to_dict(self) -> dict:
        return {
            "model_kind": self.model_kind,
            "params": params_to_dict(self.params),
            "train_rmse_mm": self.train_rmse,
            "per_trajectory_rmse_mm": self.per_trajectory_rmse,
            "iterations": self.iterations,
            "evaluations": self.evaluations,
            "starts": self.starts,
        }


def _validate_trajectories(trajectories):
    if not trajectories:
        raise ValueError("no trajectories to fit")
    for i, traj in enumerate(trajectories):
        if not (np.all(np.isfinite(traj.robot)) and np.all(np.isfinite(traj.human))):
            raise ValueError(f"non-finite pose in trajectory {i}")


def mean_rollout_rmse(kind: str, params, trajectories) -> float:
    total = 0.0
    for traj in trajectories:
        pred = _rollout_array(kind, params, traj.robot, traj.human[0])
        total += trajectory_rmse(pred, traj.human)
    return total / len(trajectories)


def fit(model_kind: str, trajectories, seed: int = 0, n_starts: int = 8,
        xtol: float = 1e-4, max_iter: int = 400) -> FitResult:
    """Fit model parameters by multi-start simplex search on rollout RMSE.

    Deterministic given (data, seed, start schedule): starts are the
    data-driven first-frame offset followed by seeded uniform draws, and
    ties between starts break by start index.
    """
    _validate_trajectories(trajectories)
    o0 = trajectories[0].initial_offset()

    if model_kind == "fixed_unopt":
        # uses the starting offset as the default and assumes zero decay
        clip = lambda v: min(max(v, -HARNESS_REACH), HARNESS_REACH)
        params = DelayedHarnessParams(
            default_offset=Pose2(clip(o0.x), clip(o0.y), o0.theta), alpha=0.0)
        per = [trajectory_rmse(
            _rollout_array("delayed", params, tr.robot, tr.human[0]), tr.human)
            for tr in trajectories]
        return FitResult("fixed_unopt", params, float(np.mean(per)), per,
                         0, len(per), [])

    if model_kind not in _BOUNDS:
        raise ValueError(f"unknown fit kind: {model_kind!r}")
    bounds = _BOUNDS[model_kind]
    kind = model_kind

    def objective(vec):
        return mean_rollout_rmse(kind, _params_from_vector(kind, vec), trajectories)

    starts = [_data_start(kind, o0, bounds)]
    rng = np.random.default_rng(seed)
    lo = np.array([b[0] for b in bounds])
    hi = np.array([b[1] for b in bounds])
    while len(starts) < n_starts:
        starts.append(lo + rng.random(len(bounds)) * (hi - lo))

    best = None
    total_iter = 0
    total_eval = 0
    for idx, x0 in enumerate(starts):
        res = simplex_search(objective, x0, bounds, xtol=xtol, max_iter=max_iter)
        total_iter += res.iterations
        total_eval += res.evaluations
        if best is None or res.fun < best[0]:
            best = (res.fun, idx, res.x)
    params = _params_from_vector(kind, best[2])
    per = [trajectory_rmse(
        _rollout_array(kind, params, tr.robot, tr.human[0]), tr.human)
        for tr in trajectories]
    return FitResult(kind, params, float(np.mean(per)), per, total_iter,
                     total_eval, [list(map(float, s)) for s in starts])


def _data_start(kind, o0, bounds):
    lo = np.array([b[0] for b in bounds])
    hi = np.array([b[1] for b in bounds])
    if kind == "fixed":
        x0 = np.array([o0.x])
    elif kind == "delayed":
        x0 = np.array([o0.x, o0.y, o0.theta, 0.5])
    else:
        x0 = np.array([max(0.05, math.hypot(o0.x, o0.y)), 0.0, 0.0])
    return np.clip(x0, lo, hi)


def split_trajectories(trajectories, ratio: tuple[int, int] = (2, 1)):
    """Deterministic train/validation split by index (default 2:1)."""
    n = len(trajectories)
    n_train = max(1, (n * ratio[0]) // (ratio[0] + ratio[1]))
    if n > 1:
        n_train = min(n_train, n - 1)
    return list(trajectories[:n_train]), list(trajectories[n_train:])


def compare_models(trajectories, kinds=FIT_KINDS, seed: int = 0,
                   ratio: tuple[int, int] = (2, 1)) -> list[dict]:
    """Fit each model kind on the train split, report train/val RMSE rows."""
    train, val = split_trajectories(trajectories, ratio)
    rows = []
    for kind in kinds:
        result = fit(kind, train, seed=seed)
        eval_kind = "delayed" if kind == "fixed_unopt" else kind
        val_rmse = (mean_rollout_rmse(eval_kind, result.params, val)
                    if val else float("nan"))
        rows.append({
            "model": kind,
            "params": params_to_dict(result.params),
            "train_rmse_mm": result.train_rmse,
            "val_rmse_mm": val_rmse,
        })
    return rows
