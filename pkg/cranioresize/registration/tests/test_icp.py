import numpy as np
import pytest
from scipy.spatial.transform import Rotation

from cranioresize.customerror import DivergedInitError, NoCorrespondencesError
from cranioresize.meshcore import SpatialIndex, TriangleMesh
from cranioresize.meshcore.primitives import grid
from cranioresize.registration import (
    IcpParams, RigidTransform, icp, mean_surface_distance, register_points_svd)

LANDMARKS = [5 * 41 + 5, 35 * 41 + 8, 20 * 41 + 35]


@pytest.fixture(scope="module")
def surface() -> TriangleMesh:
    flat = grid(40, 40, spacing=1.5)
    vertices = flat.vertices.copy()
    x, y = vertices[:, 0], vertices[:, 1]
    vertices[:, 2] = 5.0 * np.sin(x / 9.0) * np.cos(y / 13.0) + 0.01 * x ** 2
    return TriangleMesh(vertices, flat.faces, frame="CT")


@pytest.fixture(scope="module")
def index(surface) -> SpatialIndex:
    return SpatialIndex(surface)


def scanned(surface, seed, noise=0.0):
    rng = np.random.default_rng(seed)
    motion = RigidTransform(
        Rotation.from_rotvec(rng.normal(size=3) * 0.05).as_matrix(), rng.uniform(-5, 5, 3), "CT", "scan")
    points = surface.vertices + rng.normal(scale=noise, size=surface.vertices.shape)
    return motion, motion.apply(points)


def landmark_init(surface, scan_points, seed, noise=0.2):
    rng = np.random.default_rng(seed + 1000)
    picked = scan_points[LANDMARKS] + rng.normal(scale=noise, size=(3, 3))
    return register_points_svd(picked, surface.vertices[LANDMARKS]).relabeled("scan", "CT")


def test_identical_points_converge_immediately(surface, index):
    result = icp(surface.vertices, index)
    assert result.iterations == 1
    assert result.converged
    assert result.final_rms < 1e-9


def test_noisy_scan_reaches_surface(surface, index):
    _, scan_points = scanned(surface, seed=4, noise=0.02)
    init = landmark_init(surface, scan_points, seed=4)
    result = icp(scan_points, index, init, IcpParams(rms_tol=1e-6))
    registered = result.transform.apply(scan_points)
    assert mean_surface_distance(registered, index) < 0.05
    assert (result.transform.from_frame, result.transform.to_frame) == ("scan", "CT")


def test_rms_is_non_increasing(surface, index):
    _, scan_points = scanned(surface, seed=9, noise=0.05)
    init = landmark_init(surface, scan_points, seed=9, noise=1.0)
    result = icp(scan_points, index, init, IcpParams(rms_tol=0.0, max_iters=30))
    assert np.all(np.diff(result.rms_history) <= 0)


def test_trimming_rejects_outliers(surface, index):
    motion, clean_points = scanned(surface, seed=12)
    rng = np.random.default_rng(12)
    outliers = rng.choice(len(clean_points), size=len(clean_points) // 5, replace=False)
    normal = motion.apply_vectors([0.0, 0.0, 1.0])
    scan_points = clean_points.copy()
    scan_points[outliers] += normal * rng.uniform(4.0, 12.0, size=(len(outliers), 1))

    init = landmark_init(surface, clean_points, seed=12, noise=0.2)
    params = IcpParams(trim_fraction=0.3, rms_tol=1e-9, max_iters=300, sample_size=None)
    result = icp(scan_points, index, init, params)
    truth = motion.inverse()
    delta = result.transform.matrix @ np.linalg.inv(truth.matrix)
    angle = np.degrees(np.arccos(np.clip((np.trace(delta[:3, :3]) - 1) / 2, -1, 1)))
    offsets = result.transform.apply(clean_points) - truth.apply(clean_points)
    assert angle < 0.1
    assert np.linalg.norm(offsets, axis=1).max() < 0.1


def test_empty_source(index):
    with pytest.raises(NoCorrespondencesError):
        icp(np.zeros((0, 3)), index)


def test_divergent_init(surface, index):
    far = RigidTransform(np.eye(3), [0.0, 0.0, 200.0])
    with pytest.raises(DivergedInitError):
        icp(surface.vertices, index, far)


def test_sampling_is_deterministic(surface, index):
    _, scan_points = scanned(surface, seed=2, noise=0.02)
    init = landmark_init(surface, scan_points, seed=2)
    params = IcpParams(sample_size=500, seed=3)
    first = icp(scan_points, index, init, params)
    second = icp(scan_points, index, init, params)
    np.testing.assert_array_equal(first.transform.matrix, second.transform.matrix)
