import unittest

import numpy as np
import pytest
from scipy.spatial.transform import Rotation

from cranioresize.customerror import EmptyMeshError, InvalidMeshError
from cranioresize.meshcore import TriangleMesh, centroid, vertex_normals
from cranioresize.meshcore.primitives import grid, icosphere


def cube_corner() -> TriangleMesh:
    vertices = [[1, 1, 1], [1, 0, 1], [1, 1, 0], [0, 1, 1]]
    faces = [[0, 1, 2], [0, 2, 3], [0, 3, 1]]
    return TriangleMesh(vertices, faces)


class TestTriangleMesh(unittest.TestCase):

    def test_face_index_out_of_range(self):
        with self.assertRaises(InvalidMeshError):
            TriangleMesh([[0, 0, 0], [1, 0, 0], [0, 1, 0]], [[0, 1, 3]])

    def test_repeated_vertex_in_face(self):
        with self.assertRaises(InvalidMeshError):
            TriangleMesh([[0, 0, 0], [1, 0, 0], [0, 1, 0]], [[0, 1, 1]])

    def test_non_unit_normals(self):
        with self.assertRaises(InvalidMeshError):
            TriangleMesh(
                [[0, 0, 0], [1, 0, 0], [0, 1, 0]], [[0, 1, 2]],
                normals=[[0, 0, 1], [0, 0, 1], [0, 0, 2]])

    def test_arrays_are_read_only(self):
        mesh = icosphere(1.0, 1)
        with self.assertRaises(ValueError):
            mesh.vertices[0, 0] = 10.0

    def test_submesh_keeps_faces_with_surviving_vertices(self):
        mesh = grid(2, 1)
        keep = mesh.vertices[:, 0] < 1.5
        sub = mesh.submesh(keep)
        self.assertEqual(sub.n_vertices, 4)
        self.assertEqual(sub.n_faces, 2)

    def test_transformed_updates_frame(self):
        mesh = icosphere(1.0, 1).with_frame("scan")
        moved = mesh.transformed(np.eye(3), [1.0, 0.0, 0.0], frame="CT")
        self.assertEqual(moved.frame, "CT")
        np.testing.assert_allclose(moved.vertices - mesh.vertices, [[1.0, 0.0, 0.0]] * mesh.n_vertices)


class TestCentroid(unittest.TestCase):

    def test_unit_cube(self):
        corners = np.array([[x, y, z] for x in (0, 1) for y in (0, 1) for z in (0, 1)], dtype=float)
        mesh = TriangleMesh(corners, np.zeros((0, 3)))
        np.testing.assert_allclose(centroid(mesh), [0.5, 0.5, 0.5])

    def test_single_vertex(self):
        mesh = TriangleMesh([[3.0, 4.0, 5.0]], np.zeros((0, 3)))
        np.testing.assert_allclose(centroid(mesh), [3.0, 4.0, 5.0])

    def test_random_cloud_matches_summation(self):
        rng = np.random.default_rng(7)
        points = rng.normal(size=(100, 3)) * 20.0
        mesh = TriangleMesh(points, np.zeros((0, 3)))
        expected = np.array([sum(points[:, axis]) / 100.0 for axis in range(3)])
        np.testing.assert_allclose(centroid(mesh), expected, atol=1e-12)

    def test_empty(self):
        with self.assertRaises(EmptyMeshError):
            centroid(TriangleMesh(np.zeros((0, 3)), np.zeros((0, 3))))

    def test_covariant_under_rigid_motion(self):
        mesh = icosphere(5.0, 2, center=(1.0, 2.0, 3.0))
        rotation = Rotation.from_euler("xyz", [10, -25, 40], degrees=True).as_matrix()
        translation = np.array([4.0, -3.0, 7.5])
        moved = mesh.transformed(rotation, translation)
        np.testing.assert_allclose(
            centroid(moved), rotation @ centroid(mesh) + translation, atol=1e-9)


class TestVertexNormals(unittest.TestCase):

    def test_sphere_normals_are_radial(self):
        mesh = icosphere(1.0, 3)
        normals = vertex_normals(mesh)
        radial = mesh.vertices / np.linalg.norm(mesh.vertices, axis=1)[:, None]
        cosine = np.einsum("ij,ij->i", normals.vectors, radial)
        self.assertTrue(np.all(normals.valid))
        self.assertTrue(np.all(cosine >= np.cos(np.radians(2.0))))

    def test_flat_grid(self):
        normals = vertex_normals(grid(5, 5))
        np.testing.assert_allclose(normals.vectors, np.tile([0.0, 0.0, 1.0], (36, 1)), atol=1e-12)

    def test_cube_corner(self):
        normals = vertex_normals(cube_corner())
        np.testing.assert_allclose(normals.vectors[0], np.ones(3) / np.sqrt(3.0), atol=1e-9)

    def test_isolated_vertex_is_invalid(self):
        mesh = TriangleMesh([[0, 0, 0], [1, 0, 0], [0, 1, 0], [5, 5, 5]], [[0, 1, 2]])
        normals = vertex_normals(mesh)
        self.assertFalse(normals.valid[3])
        np.testing.assert_array_equal(normals.vectors[3], np.zeros(3))

    def test_flip_reverses_normals(self):
        mesh = icosphere(2.0, 2)
        np.testing.assert_allclose(
            vertex_normals(mesh.flipped()).vectors, -vertex_normals(mesh).vectors, atol=1e-12)


@pytest.mark.parametrize("subdivisions, n_vertices, n_faces", [(0, 12, 20), (3, 642, 1280), (4, 2562, 5120)])
def test_icosphere_counts(subdivisions, n_vertices, n_faces):
    mesh = icosphere(1.0, subdivisions)
    assert mesh.n_vertices == n_vertices
    assert mesh.n_faces == n_faces
    np.testing.assert_allclose(np.linalg.norm(mesh.vertices, axis=1), 1.0, atol=1e-12)
