import math

import numpy as np
import pytest

from dyadnav.data import SubjectProfile, script_trajectory, synthesize_dyad
from dyadnav.geometry import Pose2, compose, invert, wrap_angle
from dyadnav.interaction import (DelayedHarnessParams, DyadState,
                                 DyadTrajectory, FixedHarnessParams,
                                 RotatingRodParams, fit, mean_rollout_rmse,
                                 rollout_predict, split_trajectories,
                                 step_delayed, step_fixed, step_rotating_rod,
                                 trajectory_rmse)


def assert_pose_close(a, b, tol=1e-9):
    assert abs(a.x - b.x) <= tol
    assert abs(a.y - b.y) <= tol
    assert abs(wrap_angle(a.theta - b.theta)) <= tol


class TestFixedHarness:
    def test_behind_robot(self):
        human = step_fixed(FixedHarnessParams(-0.9), Pose2(0, 0, 0))
        assert_pose_close(human, Pose2(-0.9, 0, 0))

    def test_rotated(self):
        human = step_fixed(FixedHarnessParams(-0.9), Pose2(0, 0, math.pi / 2))
        assert_pose_close(human, Pose2(0, -0.9, math.pi / 2))

    def test_zero_distance(self):
        human = step_fixed(FixedHarnessParams(0.0), Pose2(1, 2, 0.3))
        assert_pose_close(human, Pose2(1, 2, 0.3))

    def test_reach_validated(self):
        with pytest.raises(ValueError):
            FixedHarnessParams(2.5)


class TestDelayedHarness:
    def test_alpha_zero_places_at_default(self):
        obar = Pose2(-0.7, -0.2, 0.1)
        params = DelayedHarnessParams(obar, 0.0)
        state = DyadState.of(Pose2(0, 0, 0), Pose2(-1.5, 0.4, 0.5))
        robot_next = Pose2(0.3, 0.1, 0.2)
        nxt = step_delayed(params, state, robot_next)
        assert_pose_close(nxt.human, compose(robot_next, obar))

    def test_alpha_zero_equals_fixed(self):
        rng = np.random.default_rng(3)
        d = -0.85
        params = DelayedHarnessParams(Pose2(d, 0, 0), 0.0)
        for _ in range(1000):
            robot = Pose2(*rng.uniform(-3, 3, 2), rng.uniform(-math.pi, math.pi))
            human = Pose2(*rng.uniform(-3, 3, 2), rng.uniform(-math.pi, math.pi))
            state = DyadState.of(robot, human)
            robot_next = Pose2(*rng.uniform(-3, 3, 2),
                               rng.uniform(-math.pi, math.pi))
            a = step_delayed(params, state, robot_next).human
            b = step_fixed(FixedHarnessParams(d), robot_next)
            assert_pose_close(a, b, tol=1e-9)

    def test_alpha_one_absorbs_motion(self):
        params = DelayedHarnessParams(Pose2(-0.5, 0.3, 0.2), 1.0)
        state = DyadState.of(Pose2(0, 0, 0), Pose2(-1.0, 0.2, 0.4))
        nxt = step_delayed(params, state, Pose2(0.7, -0.3, 1.1))
        assert_pose_close(nxt.human, state.human, tol=1e-9)

    def test_worked_example(self):
        params = DelayedHarnessParams(Pose2(-1, 0, 0), 0.5)
        state = DyadState.of(Pose2(0, 0, 0), Pose2(-1, 0, 0))
        nxt = step_delayed(params, state, Pose2(0.5, 0, 0))
        assert_pose_close(nxt.offset, Pose2(-1.25, 0, 0))
        assert_pose_close(nxt.human, Pose2(-0.75, 0, 0))

    def test_offset_invariant_after_steps(self):
        rng = np.random.default_rng(4)
        params = DelayedHarnessParams(Pose2(-0.8, 0.1, 0.05), 0.7)
        state = DyadState.of(Pose2(0, 0, 0), Pose2(-0.8, 0.1, 0.05))
        for _ in range(50):
            robot_next = compose(state.robot,
                                 Pose2(*rng.uniform(-0.2, 0.2, 2),
                                       rng.uniform(-0.3, 0.3)))
            state = step_delayed(params, state, robot_next)
            expect = compose(invert(state.robot), state.human)
            assert_pose_close(state.offset, expect, tol=1e-9)

    def test_convergence_bound(self):
        # robot held fixed: offset error contracts by alpha each step
        alpha = 0.65
        obar = Pose2(-0.9, 0.2, 0.1)
        params = DelayedHarnessParams(obar, alpha)
        robot = Pose2(1.0, -2.0, 0.8)
        state = DyadState.of(robot, compose(robot, Pose2(-0.2, 0.6, -0.9)))
        err0 = math.hypot(state.offset.x - obar.x, state.offset.y - obar.y)
        for t in range(1, 25):
            state = step_delayed(params, state, robot)
            err = math.hypot(state.offset.x - obar.x, state.offset.y - obar.y)
            assert err <= alpha ** t * err0 + 1e-12

    def test_param_validation(self):
        with pytest.raises(ValueError):
            DelayedHarnessParams(Pose2(0, 0, 0), 1.2)
        with pytest.raises(ValueError):
            DelayedHarnessParams(Pose2(2.5, 0, 0), 0.5)


class TestRotatingRod:
    def test_stationary(self):
        params = RotatingRodParams(rod_length=0.9)
        robot = Pose2(0, 0, 0)
        state = DyadState.of(robot, Pose2(-0.9, 0, 0))
        nxt = step_rotating_rod(params, state, robot)
        assert_pose_close(nxt.human, Pose2(-0.9, 0, 0))

    def test_taut_translation(self):
        params = RotatingRodParams(rod_length=0.9)
        state = DyadState.of(Pose2(0, 0, 0), Pose2(-0.9, 0, 0))
        nxt = step_rotating_rod(params, state, Pose2(0.1, 0, 0))
        assert nxt.human.x == pytest.approx(-0.8)
        assert nxt.human.y == pytest.approx(0.0)

    def test_robot_arcs_around_human(self):
        # pivot rides a circle centred on the human: human position invariant
        rod = 1.0
        params = RotatingRodParams(rod_length=rod)
        human0 = Pose2(0.0, 0.0, 0.0)
        state = DyadState.of(Pose2(rod, 0, math.pi / 2), human0)
        for k in range(1, 19):
            phi = math.pi / 2 * k / 18
            robot = Pose2(rod * math.cos(phi), rod * math.sin(phi),
                          math.pi / 2 + phi)
            state = step_rotating_rod(params, state, robot)
            assert math.hypot(state.human.x, state.human.y) < 1e-9
            # heading faces the pivot
            expect = math.atan2(robot.y, robot.x)
            assert abs(wrap_angle(state.human.theta - expect)) < 1e-9


class TestRolloutPredict:
    def test_single_pose(self):
        h0 = Pose2(-0.9, 0, 0)
        out = rollout_predict("delayed", DelayedHarnessParams(), [Pose2()], h0)
        assert len(out) == 1
        assert_pose_close(out[0], h0)

    def test_alpha_zero_tracks_default(self):
        obar = Pose2(-0.6, 0.2, 0.0)
        params = DelayedHarnessParams(obar, 0.0)
        robot = [Pose2(0.1 * k, 0.02 * k, 0.05 * k) for k in range(20)]
        out = rollout_predict("delayed", params, robot, compose(robot[0], obar))
        for r, h in zip(robot[1:], out[1:]):
            assert_pose_close(h, compose(r, obar), tol=1e-9)

    def test_matches_stepwise_iteration(self):
        params = DelayedHarnessParams(Pose2(-0.8, -0.1, 0.05), 0.75)
        robot = [Pose2(0.25 * k, 0.0, 0.0) for k in range(11)]  # 2.5 m run
        h0 = compose(robot[0], params.default_offset)
        fast = rollout_predict("delayed", params, robot, h0)
        state = DyadState.of(robot[0], h0)
        for k in range(1, len(robot)):
            state = step_delayed(params, state, robot[k])
            assert_pose_close(fast[k], state.human, tol=1e-9)

    def test_array_io(self):
        params = FixedHarnessParams(-0.9)
        robot = np.column_stack([np.linspace(0, 2, 9), np.zeros(9), np.zeros(9)])
        out = rollout_predict("fixed", params, robot, np.array([-0.9, 0, 0]))
        assert out.shape == (9, 3)
        assert np.allclose(out[1:, 0], robot[1:, 0] - 0.9)

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            rollout_predict("fixed", FixedHarnessParams(), [], Pose2())


class TestTrajectoryRmse:
    def test_zero_for_identical(self):
        traj = [Pose2(k * 0.1, 0, 0) for k in range(5)]
        assert trajectory_rmse(traj, traj) == 0.0

    def test_constant_offset(self):
        a = [Pose2(k * 0.1, 0, 0) for k in range(6)]
        b = [Pose2(k * 0.1, 0.1, 0) for k in range(6)]
        assert trajectory_rmse(a, b) == pytest.approx(100.0)

    def test_three_four_five(self):
        # alternating error vectors (0.03, 0.04) and (0.04, 0.03): each has
        # norm 0.05, so the RMSE is exactly 50 mm
        a = [Pose2(0, 0, 0)] * 4
        b = [Pose2(0.03, 0.04, 0), Pose2(0.04, 0.03, 0)] * 2
        assert trajectory_rmse(a, b) == pytest.approx(50.0)

    def test_heading_excluded(self):
        a = [Pose2(0, 0, 0.0)]
        b = [Pose2(0, 0, 2.0)]
        assert trajectory_rmse(a, b) == 0.0

    def test_length_mismatch(self):
        with pytest.raises(ValueError, match="mismatch"):
            trajectory_rmse([Pose2()], [Pose2(), Pose2()])


def make_dataset(params, sigma=0.0, seed=0, ids=(1, 2, 3, 4, 5)):
    profile = SubjectProfile("t", params, noise_sigma=sigma)
    out = []
    for k, tid in enumerate(ids):
        robot = script_trajectory(tid, step_length=0.1, turn_step_deg=10)
        out.append(synthesize_dyad(profile, robot, seed=seed * 100 + k))
    return out


class TestFit:
    TRUTH = DelayedHarnessParams(Pose2(-0.7, -0.3, 0.0), 0.8)

    def test_recovers_noise_free(self):
        trajs = make_dataset(self.TRUTH)
        result = fit("delayed", trajs, seed=0)
        p = result.params
        assert p.alpha == pytest.approx(0.8, abs=0.02)
        assert p.default_offset.x == pytest.approx(-0.7, abs=0.01)
        assert p.default_offset.y == pytest.approx(-0.3, abs=0.01)
        assert result.train_rmse < 5.0  # mm

    def test_nested_model_property(self):
        trajs = make_dataset(self.TRUTH, sigma=0.01, seed=3)
        fixed = fit("fixed", trajs, seed=0)
        delayed = fit("delayed", trajs, seed=0)
        assert fixed.train_rmse >= delayed.train_rmse

    def test_deterministic(self):
        trajs = make_dataset(self.TRUTH, sigma=0.02, seed=1)
        a = fit("delayed", trajs, seed=5)
        b = fit("delayed", trajs, seed=5)
        assert a.params == b.params
        assert a.starts == b.starts

    def test_reports(self):
        trajs = make_dataset(self.TRUTH)
        result = fit("delayed", trajs, seed=0)
        assert len(result.per_trajectory_rmse) == len(trajs)
        assert len(result.starts) == 8
        assert result.iterations > 0
        doc = result.to_dict()
        assert doc["params"]["kind"] == "delayed"

    def test_fixed_unopt_uses_first_frame(self):
        trajs = make_dataset(self.TRUTH)
        result = fit("fixed_unopt", trajs, seed=0)
        o0 = trajs[0].initial_offset()
        assert result.params.alpha == 0.0
        assert result.params.default_offset.x == pytest.approx(o0.x)

    def test_empty_rejected(self):
        with pytest.raises(ValueError, match="no trajectories"):
            fit("delayed", [])

    def test_nonfinite_names_trajectory(self):
        trajs = make_dataset(self.TRUTH, ids=(1, 2))
        bad_human = trajs[1].human.copy()
        bad_human[3, 0] = np.nan
        trajs[1] = DyadTrajectory(t=trajs[1].t, robot=trajs[1].robot,
                                  human=bad_human)
        with pytest.raises(ValueError, match="trajectory 1"):
            fit("delayed", trajs)

    def test_rod_fit_runs(self):
        trajs = make_dataset(self.TRUTH, ids=(1, 2))
        result = fit("rod", trajs, seed=0)
        assert result.params.rod_length > 0
        assert math.isfinite(result.train_rmse)

    def test_per_subject_beats_pooled(self):
        subj_a = make_dataset(DelayedHarnessParams(Pose2(-0.7, -0.3, 0.0), 0.8),
                              sigma=0.01, seed=11)
        subj_b = make_dataset(DelayedHarnessParams(Pose2(-1.0, 0.3, 0.1), 0.5),
                              sigma=0.01, seed=12)
        fit_a = fit("delayed", subj_a, seed=0)
        fit_b = fit("delayed", subj_b, seed=0)
        pooled = fit("delayed", subj_a + subj_b, seed=0)
        per_a = mean_rollout_rmse("delayed", fit_a.params, subj_a)
        per_b = mean_rollout_rmse("delayed", fit_b.params, subj_b)
        pooled_a = mean_rollout_rmse("delayed", pooled.params, subj_a)
        pooled_b = mean_rollout_rmse("delayed", pooled.params, subj_b)
        assert per_a <= pooled_a
        assert per_b <= pooled_b


class TestSplit:
    def test_two_to_one(self):
        trajs = list(range(15))
        train, val = split_trajectories(trajs)
        assert len(train) == 10
        assert len(val) == 5

    def test_always_keeps_validation(self):
        train, val = split_trajectories([1, 2])
        assert len(train) == 1 and len(val) == 1
