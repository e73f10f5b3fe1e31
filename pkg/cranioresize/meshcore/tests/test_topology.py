import numpy as np
import pytest

from cranioresize.customerror import NonManifoldError
from cranioresize.meshcore import TriangleMesh, boundary_loops
from cranioresize.meshcore.primitives import annulus, disk, drilled_hemisphere, icosphere, plate


def test_closed_sphere_has_no_boundary():
    assert boundary_loops(icosphere(5.0, 2)) == []


def test_closed_plate_has_no_boundary():
    assert boundary_loops(plate(20.0, 3.0, 8)) == []


def test_closed_meshes_are_outward_oriented():
    for mesh in (plate(20.0, 3.0, 8), icosphere(5.0, 2)):
        tri = mesh.triangles
        volume = np.einsum("ij,ij->i", tri[:, 0], np.cross(tri[:, 1], tri[:, 2])).sum() / 6.0
        assert volume > 0


def test_disk_rim():
    mesh = disk(10.0, 5, 40)
    loops = boundary_loops(mesh)
    assert len(loops) == 1
    radius = np.linalg.norm(mesh.vertices[:, :2], axis=1)
    assert set(loops[0].tolist()) == set(np.flatnonzero(np.isclose(radius, 10.0)).tolist())


def test_annulus_outer_loop_first():
    mesh = annulus(10.0, 20.0, 4, 48)
    loops = boundary_loops(mesh)
    assert len(loops) == 2
    radius = np.linalg.norm(mesh.vertices[:, :2], axis=1)
    np.testing.assert_allclose(radius[loops[0]], 20.0)
    np.testing.assert_allclose(radius[loops[1]], 10.0)
    assert len(loops[0]) == 48


def test_loop_is_a_cycle_of_boundary_edges():
    mesh = disk(10.0, 3, 24)
    loop = boundary_loops(mesh)[0]
    steps = np.linalg.norm(
        mesh.vertices[np.roll(loop, -1)] - mesh.vertices[loop], axis=1)
    np.testing.assert_allclose(steps, 2 * 10.0 * np.sin(np.pi / 24))


def test_non_manifold():
    vertices = [[0, 0, 0], [1, 0, 0], [0, 1, 0], [0, -1, 0], [0, 0, 1]]
    faces = [[0, 1, 2], [1, 0, 3], [0, 1, 4]]
    with pytest.raises(NonManifoldError):
        boundary_loops(TriangleMesh(vertices, faces))


def test_drilled_hemisphere_boundaries():
    mesh = drilled_hemisphere(50.0, 30.0, 3.0, edge_length=1.5)
    loops = boundary_loops(mesh)
    assert len(loops) == 2
    equator, hole_bottom = (mesh.vertices[loop] for loop in loops)
    np.testing.assert_allclose(np.linalg.norm(equator[:, :2], axis=1), 50.0)
    np.testing.assert_allclose(equator[:, 2], 0.0, atol=1e-9)
    np.testing.assert_allclose(np.linalg.norm(hole_bottom[:, :2], axis=1), 30.0)
    np.testing.assert_allclose(hole_bottom[:, 2], 37.0)
