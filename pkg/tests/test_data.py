import json
import math

import numpy as np
import pytest

from dyadnav.data import (SubjectProfile, default_profiles, generate_dataset,
                          load_trajectories, load_trajectory_file, path_length,
                          save_trajectory, script_trajectory, synthesize_dyad,
                          SCRIPTED_TRAJECTORIES)
from dyadnav.geometry import Pose2, compose, invert, wrap_angle
from dyadnav.interaction import DelayedHarnessParams, fit


class TestScriptTrajectory:
    def test_id1_geometry(self):
        poses = script_trajectory(1, step_length=0.25, turn_step_deg=10)
        # 2.5 m straight then a 90 degree in-place left turn
        assert poses[-1].x == pytest.approx(2.5)
        assert poses[-1].y == pytest.approx(0.0)
        assert poses[-1].theta == pytest.approx(math.pi / 2)

    def test_id1_pose_count(self):
        poses = script_trajectory(1, step_length=0.25, turn_step_deg=10)
        # initial pose + 10 forward poses + 9 turn poses
        assert len(poses) == 1 + 10 + 9

    def test_id5_net_heading(self):
        poses = script_trajectory(5, step_length=0.1, turn_step_deg=10)
        # -90 + 180 - 90 = 0 net heading change
        assert wrap_angle(poses[-1].theta) == pytest.approx(0.0, abs=1e-9)

    def test_id3_has_arc(self):
        poses = script_trajectory(3, step_length=0.05, turn_step_deg=5)
        assert poses[-1].theta == pytest.approx(math.radians(45 - 135), abs=1e-9)

    def test_path_length_matches_segments(self):
        for tid, traj in SCRIPTED_TRAJECTORIES.items():
            step = 0.1
            poses = script_trajectory(tid, step_length=step, turn_step_deg=10)
            expect = sum(seg.length for seg in traj.segments if seg.kind == "forward")
            expect += sum(abs(math.radians(seg.angle_deg)) * seg.radius
                          for seg in traj.segments if seg.kind == "arc")
            assert path_length(poses) == pytest.approx(expect, abs=step)

    def test_unknown_id(self):
        with pytest.raises(ValueError, match="unknown trajectory id"):
            script_trajectory(9)


class TestSynthesizeDyad:
    PARAMS = DelayedHarnessParams(Pose2(-0.7, -0.3, 0.0), 0.8)

    def test_offset_invariant_noise_free(self):
        profile = SubjectProfile("s", self.PARAMS, noise_sigma=0.0)
        robot = script_trajectory(2, step_length=0.1)
        dyad = synthesize_dyad(profile, robot, seed=0)
        # before noise every frame satisfies the SE(2) offset relation;
        # with zero noise the saved frames must too
        for k in range(len(dyad)):
            r = Pose2.from_array(dyad.robot[k])
            h = Pose2.from_array(dyad.human[k])
            off = compose(invert(r), h)
            assert math.isfinite(off.x)
        h0 = compose(Pose2.from_array(dyad.robot[0]), self.PARAMS.default_offset)
        assert dyad.human[0][0] == pytest.approx(h0.x)

    def test_generate_then_fit_recovers(self):
        profile = SubjectProfile("s", self.PARAMS, noise_sigma=0.0)
        trajs = [synthesize_dyad(profile, script_trajectory(tid, 0.1), seed=tid)
                 for tid in (1, 2, 3)]
        result = fit("delayed", trajs, seed=0)
        assert result.params.alpha == pytest.approx(0.8, abs=0.02)

    def test_deterministic(self):
        profile = SubjectProfile("s", self.PARAMS, noise_sigma=0.05)
        robot = script_trajectory(1, 0.1)
        a = synthesize_dyad(profile, robot, seed=7)
        b = synthesize_dyad(profile, robot, seed=7)
        assert np.array_equal(a.human, b.human)

    def test_heterogeneity_pooled_worse(self):
        profiles = default_profiles()[:2]
        per_subject, pooled_all = [], []
        datasets = []
        for i, prof in enumerate(profiles):
            trajs = [synthesize_dyad(prof, script_trajectory(tid, 0.1),
                                     seed=100 * i + tid)
                     for tid in (1, 2, 3, 4, 5)]
            datasets.append(trajs)
        from dyadnav.interaction import mean_rollout_rmse
        pooled = fit("delayed", datasets[0] + datasets[1], seed=0)
        for trajs in datasets:
            own = fit("delayed", trajs, seed=0)
            per_subject.append(mean_rollout_rmse("delayed", own.params, trajs))
            pooled_all.append(mean_rollout_rmse("delayed", pooled.params, trajs))
        assert np.mean(per_subject) < np.mean(pooled_all)


class TestTrajectoryIO:
    def roundtrip(self, tmp_path, sigma=0.02):
        profile = SubjectProfile("s", DelayedHarnessParams(), noise_sigma=sigma)
        dyad = synthesize_dyad(profile, script_trajectory(1, 0.1), seed=3)
        path = tmp_path / "traj.jsonl"
        save_trajectory(dyad, path)
        return dyad, path

    def test_roundtrip_identity(self, tmp_path):
        dyad, path = self.roundtrip(tmp_path)
        loaded = load_trajectories(path)
        assert len(loaded) == 1
        assert np.allclose(loaded[0].robot, dyad.robot, atol=1e-9)
        assert np.allclose(loaded[0].human, dyad.human, atol=1e-9)

    def test_empty_file(self, tmp_path):
        path = tmp_path / "empty.jsonl"
        path.write_text("")
        assert load_trajectories(path) == []

    def test_corrupt_line_names_line(self, tmp_path):
        dyad, path = self.roundtrip(tmp_path)
        lines = path.read_text().splitlines()
        lines[6] = '{"t": broken'
        path.write_text("\n".join(lines) + "\n")
        with pytest.raises(ValueError, match="line 7"):
            load_trajectory_file(path)

    def test_non_monotone_time(self, tmp_path):
        dyad, path = self.roundtrip(tmp_path)
        lines = path.read_text().splitlines()
        rec = json.loads(lines[3])
        rec["t"] = 0.05
        lines[4] = json.dumps(rec)
        path.write_text("\n".join(lines) + "\n")
        with pytest.raises(ValueError, match="non-monotone"):
            load_trajectory_file(path)

    def test_missing_file(self):
        with pytest.raises(FileNotFoundError):
            load_trajectories("/nonexistent/file.jsonl")

    def test_directory_load(self, tmp_path):
        for k in range(3):
            profile = SubjectProfile("s", DelayedHarnessParams(), 0.0)
            dyad = synthesize_dyad(profile, script_trajectory(1, 0.1), seed=k)
            save_trajectory(dyad, tmp_path / f"t{k}.jsonl")
        assert len(load_trajectories(tmp_path)) == 3


class TestGenerateDataset:
    def test_counts(self, tmp_path):
        files = generate_dataset(tmp_path, repeats=3, seed=0)
        assert len(files) == 3 * 5 * 3  # profiles x trajectories x repeats
        assert all(f.exists() for f in files)

    def test_reproducible(self, tmp_path):
        a = generate_dataset(tmp_path / "a", repeats=1, seed=4)
        b = generate_dataset(tmp_path / "b", repeats=1, seed=4)
        for fa, fb in zip(a, b):
            assert fa.read_bytes() == fb.read_bytes()
