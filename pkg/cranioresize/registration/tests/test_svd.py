import numpy as np
import pytest
from scipy.spatial.transform import Rotation

from cranioresize.customerror import CountMismatchError, DegenerateConfigurationError
from cranioresize.registration import (
    LandmarkSet, RigidTransform, fiducial_registration_error, register_points_svd)


@pytest.fixture
def points():
    return np.random.default_rng(21).uniform(-40, 40, size=(10, 3))


def test_identity(points):
    transform = register_points_svd(points, points)
    np.testing.assert_allclose(transform.rotation, np.eye(3), atol=1e-12)
    np.testing.assert_allclose(transform.translation, np.zeros(3), atol=1e-12)


def test_recovers_known_motion(points):
    rotation = Rotation.from_euler("z", 30, degrees=True).as_matrix()
    truth = RigidTransform(rotation, [1.0, 2.0, 3.0])
    transform = register_points_svd(points, truth.apply(points))
    np.testing.assert_allclose(transform.matrix, truth.matrix, atol=1e-9)
    np.testing.assert_allclose(transform.apply(points), truth.apply(points), atol=1e-9)


def test_frames_come_from_landmarks(points):
    transform = register_points_svd(LandmarkSet(points, frame="CT"), LandmarkSet(points, frame="base"))
    assert (transform.from_frame, transform.to_frame) == ("CT", "base")


def test_left_invariance(points):
    target = Rotation.from_rotvec([0.1, 0.4, -0.2]).apply(points) + [5.0, -2.0, 9.0]
    base = register_points_svd(points, target)
    motion = RigidTransform(Rotation.from_rotvec([-0.7, 0.2, 0.3]).as_matrix(), [10.0, 0.0, -4.0])
    moved = register_points_svd(motion.apply(points), target)
    np.testing.assert_allclose(moved.matrix, base.matrix @ motion.inverse().matrix, atol=1e-9)


def test_collinear_points():
    line = np.array([[0.0, 0.0, 0.0], [1.0, 1.0, 1.0], [2.0, 2.0, 2.0]])
    with pytest.raises(DegenerateConfigurationError):
        register_points_svd(line, line + 1.0)


def test_coincident_points():
    same = np.ones((4, 3))
    with pytest.raises(DegenerateConfigurationError):
        register_points_svd(same, same)


def test_too_few_points():
    with pytest.raises(DegenerateConfigurationError):
        register_points_svd(np.eye(3)[:2], np.eye(3)[:2])


def test_count_mismatch(points):
    with pytest.raises(CountMismatchError):
        register_points_svd(points, points[:5])


def test_fiducial_error_exact(points):
    truth = RigidTransform(Rotation.from_rotvec([0.3, 0.0, 0.1]).as_matrix(), [4.0, 4.0, 4.0])
    source = LandmarkSet(points)
    target = LandmarkSet(truth.apply(points))
    transform = register_points_svd(source, target)
    assert fiducial_registration_error(transform, source, target) < 1e-9


def test_fiducial_error_hand_computed():
    transform = RigidTransform(np.eye(3), [1.0, 0.0, 0.0])
    source = LandmarkSet([[0.0, 0.0, 0.0], [1.0, 1.0, 0.0]])
    target = LandmarkSet([[1.0, 0.0, 0.0], [2.0, 2.0, 0.0]])
    assert fiducial_registration_error(transform, source, target) == pytest.approx(0.5)


def test_fiducial_error_count_mismatch():
    with pytest.raises(CountMismatchError):
        fiducial_registration_error(
            RigidTransform.identity(), LandmarkSet(np.zeros((3, 3))), LandmarkSet(np.zeros((2, 3))))


def test_fiducial_error_with_marker_noise():
    markers = np.array([[0.0, 0.0, 0.0], [60.0, 0.0, 0.0], [20.0, 50.0, 0.0]])
    errors = []
    for seed in range(200):
        rng = np.random.default_rng(seed)
        measured = markers + rng.normal(scale=0.2, size=markers.shape)
        transform = register_points_svd(markers, measured)
        errors.append(fiducial_registration_error(transform, LandmarkSet(markers), LandmarkSet(measured)))
    assert 0.1 < np.mean(errors) < 0.4
