import unittest

import numpy as np
import pytest

from cranioresize.calibration import (
    PivotSolution, load_pose_samples, parse_pose_samples, pivot_calibrate, save_pose_samples,
    synthetic_pivot_poses)
from cranioresize.customerror import (
    FrameMismatchError, InsufficientDiversityError, MeshIoError, ParseError)
from cranioresize.registration import RigidTransform

TIP = np.array([10.0, 0.0, 150.0])
PIVOT = np.array([400.0, -120.0, 250.0])


class TestPivotCalibrate(unittest.TestCase):

    def test_noiseless_recovery(self):
        poses = synthetic_pivot_poses(TIP, PIVOT, 20, np.random.default_rng(0))
        solution = pivot_calibrate(poses)
        np.testing.assert_allclose(solution.tip_offset, TIP, atol=1e-9)
        np.testing.assert_allclose(solution.pivot_point, PIVOT, atol=1e-9)
        self.assertLess(solution.residual_rms, 1e-9)
        self.assertEqual(solution.n_used, 20)

    def test_residual_matches_definition(self):
        poses = synthetic_pivot_poses(TIP, PIVOT, 15, np.random.default_rng(1), sigma=0.1)
        solution = pivot_calibrate(poses)
        residuals = [np.linalg.norm(pose.rotation @ solution.tip_offset + pose.translation - solution.pivot_point)
                     for pose in poses]
        self.assertAlmostEqual(solution.residual_rms, float(np.sqrt(np.mean(np.square(residuals)))), places=12)
        self.assertGreaterEqual(solution.residual_rms, 0.0)

    def test_identical_rotations(self):
        rotation = synthetic_pivot_poses(TIP, PIVOT, 1, np.random.default_rng(2))[0].rotation
        poses = [RigidTransform(rotation, PIVOT - rotation @ TIP + [0.0, 0.0, float(k)], "ee", "base")
                 for k in range(5)]
        with self.assertRaises(InsufficientDiversityError):
            pivot_calibrate(poses)

    def test_too_few_poses(self):
        poses = synthetic_pivot_poses(TIP, PIVOT, 2, np.random.default_rng(3))
        with self.assertRaises(InsufficientDiversityError):
            pivot_calibrate(poses)

    def test_wrong_frames(self):
        poses = synthetic_pivot_poses(TIP, PIVOT, 5, np.random.default_rng(4))
        poses[2] = poses[2].relabeled("scan", "CT")
        with self.assertRaises(FrameMismatchError):
            pivot_calibrate(poses)

    def test_translation_equivariance(self):
        poses = synthetic_pivot_poses(TIP, PIVOT, 12, np.random.default_rng(5), sigma=0.05)
        shift = np.array([25.0, -40.0, 7.5])
        moved = [RigidTransform(pose.rotation, pose.translation + shift, "ee", "base") for pose in poses]
        base, shifted = pivot_calibrate(poses), pivot_calibrate(moved)
        np.testing.assert_allclose(shifted.pivot_point, base.pivot_point + shift, atol=1e-9)
        np.testing.assert_allclose(shifted.tip_offset, base.tip_offset, atol=1e-9)

    def test_outlier_rejection(self):
        poses = synthetic_pivot_poses(TIP, PIVOT, 20, np.random.default_rng(6), min_angle=20.0, sigma=0.05)
        bad = poses[7]
        poses[7] = RigidTransform(bad.rotation, bad.translation + [20.0, 0.0, 0.0], "ee", "base")

        plain = pivot_calibrate(poses)
        cleaned = pivot_calibrate(poses, reject_outliers=True)
        self.assertIn(7, cleaned.rejected)
        self.assertLess(cleaned.n_used, 20)
        self.assertLess(np.linalg.norm(cleaned.tip_offset - TIP), np.linalg.norm(plain.tip_offset - TIP))
        self.assertLess(np.linalg.norm(cleaned.tip_offset - TIP), 0.3)


def test_noise_monte_carlo():
    errors = []
    for seed in range(100):
        poses = synthetic_pivot_poses(TIP, PIVOT, 20, np.random.default_rng(seed), min_angle=20.0, sigma=0.1)
        errors.append(np.linalg.norm(pivot_calibrate(poses).tip_offset - TIP))
    assert np.percentile(errors, 95) < 0.3


def test_solution_text_block():
    solution = PivotSolution(TIP, PIVOT, [0.1, 0.2, 0.2], rejected=[4])
    text = solution.to_text()
    assert "[pivot]" in text
    fields = dict(line.split("=", 1) for line in text.splitlines() if "=" in line)
    np.testing.assert_allclose([float(v) for v in fields["tip_offset"].split()], TIP)
    np.testing.assert_allclose([float(v) for v in fields["pivot_point"].split()], PIVOT)
    assert float(fields["residual_rms"]) == pytest.approx(np.sqrt((0.01 + 0.04 + 0.04) / 3))
    assert fields["n_used"] == "3"
    assert fields["rejected"] == "4"


def test_pose_file_round_trip(tmp_path):
    poses = synthetic_pivot_poses(TIP, PIVOT, 6, np.random.default_rng(7))
    path = tmp_path / "poses.txt"
    save_pose_samples(poses, str(path))
    loaded = load_pose_samples(str(path))
    assert len(loaded) == 6
    for pose, back in zip(poses, loaded):
        np.testing.assert_allclose(back.matrix, pose.matrix, atol=1e-12)
        assert (back.from_frame, back.to_frame) == ("ee", "base")


def test_pose_rows_must_have_twelve_values():
    with pytest.raises(ParseError):
        parse_pose_samples("1 0 0 0 0 1 0 0 0 0 1\n")


def test_pose_rotation_must_be_orthonormal():
    with pytest.raises(ParseError):
        parse_pose_samples("1 0 0 0 0 2 0 0 0 0 1 0\n")


def test_rounded_pose_is_accepted():
    angle = np.radians(30.0)
    rows = [[1.0, 0.0, 0.0, 5.0],
            [0.0, np.cos(angle), -np.sin(angle), 6.0],
            [0.0, np.sin(angle), np.cos(angle), 7.0]]
    text = " ".join(f"{value:.6f}" for value in np.ravel(rows))
    pose = parse_pose_samples(text)[0]
    np.testing.assert_allclose(pose.rotation, np.asarray(rows)[:, :3], atol=1e-6)
    np.testing.assert_allclose(pose.translation, [5.0, 6.0, 7.0])


def test_missing_pose_file(tmp_path):
    with pytest.raises(MeshIoError):
        load_pose_samples(str(tmp_path / "missing.txt"))
