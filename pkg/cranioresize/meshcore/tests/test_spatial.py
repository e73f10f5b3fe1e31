import unittest

import numpy as np

from cranioresize.meshcore import SpatialIndex, TriangleMesh
from cranioresize.meshcore.primitives import grid, icosphere


def _segment_distance(points, a, b):
    ab = b - a
    t = np.clip(np.einsum("ij,ij->i", points - a, ab) / np.einsum("ij,ij->i", ab, ab), 0.0, 1.0)
    return np.linalg.norm(points - (a + t[:, None] * ab), axis=1)


def brute_force_distance(mesh: TriangleMesh, query: np.ndarray) -> float:
    """모든 면에 대해 점-삼각형 거리를 직접 계산한 최솟값"""
    tri = mesh.triangles
    a, b, c = tri[:, 0], tri[:, 1], tri[:, 2]
    points = np.broadcast_to(query, a.shape)
    normal = np.cross(b - a, c - a)
    normal /= np.linalg.norm(normal, axis=1)[:, None]
    height = np.einsum("ij,ij->i", points - a, normal)
    projected = points - height[:, None] * normal

    def same_side(p, x, y, z):
        return np.einsum("ij,ij->i", np.cross(y - x, p - x), np.cross(y - x, z - x)) >= 0

    inside = same_side(projected, a, b, c) & same_side(projected, b, c, a) & same_side(projected, c, a, b)
    edges = np.minimum.reduce([
        _segment_distance(points, a, b), _segment_distance(points, b, c), _segment_distance(points, c, a)])
    return float(np.where(inside, np.abs(height), edges).min())


def wavy_patch() -> TriangleMesh:
    flat = grid(10, 25, spacing=2.0)
    vertices = flat.vertices.copy()
    vertices[:, 2] = 3.0 * np.sin(vertices[:, 0] / 4.0) * np.cos(vertices[:, 1] / 7.0)
    return TriangleMesh(vertices, flat.faces)


class TestClosestPoint(unittest.TestCase):

    def test_query_at_vertex(self):
        mesh = icosphere(10.0, 2)
        index = SpatialIndex(mesh)
        _, _, distance = index.closest_point(mesh.vertices[17])
        self.assertLess(distance, 1e-12)

    def test_plane_distance(self):
        index = SpatialIndex(grid(10, 10, spacing=1.0))
        point, _, distance = index.closest_point([4.3, 6.1, 5.0])
        self.assertAlmostEqual(distance, 5.0, delta=1e-9)
        np.testing.assert_allclose(point, [4.3, 6.1, 0.0], atol=1e-9)

    def test_matches_exhaustive_search(self):
        mesh = wavy_patch()
        self.assertEqual(mesh.n_faces, 500)
        index = SpatialIndex(mesh)
        rng = np.random.default_rng(3)
        low, high = mesh.bounds
        queries = rng.uniform(low - 5.0, high + 5.0, size=(1000, 3))
        result = index.closest_points(queries)
        expected = np.array([brute_force_distance(mesh, query) for query in queries])
        np.testing.assert_allclose(result.distances, expected, atol=1e-9)

    def test_projected_query_has_zero_distance(self):
        mesh = wavy_patch()
        index = SpatialIndex(mesh)
        rng = np.random.default_rng(11)
        queries = rng.uniform([0, 0, -10], [20, 50, 10], size=(200, 3))
        surface = index.closest_points(queries).points
        again = index.closest_points(surface)
        self.assertTrue(np.all(again.distances < 1e-9))


class TestVertexAndRayQueries(unittest.TestCase):

    def test_closest_vertex(self):
        mesh = grid(4, 4, spacing=2.0)
        point, index, distance = SpatialIndex(mesh).closest_vertex([2.2, 3.9, 1.0])
        np.testing.assert_allclose(point, [2.0, 4.0, 0.0])
        self.assertEqual(index, 7)
        self.assertAlmostEqual(distance, np.sqrt(0.04 + 0.01 + 1.0))

    def test_ray_through_sphere(self):
        index = SpatialIndex(icosphere(10.0, 3))
        hits = index.ray_hits([0.3, 0.2, -50.0], [0.0, 0.0, 1.0])
        self.assertEqual(len(hits.t), 2)
        self.assertTrue(np.all(np.diff(hits.t) > 0))
        self.assertLess(hits.points[0, 2], 0.0)
        self.assertGreater(hits.points[1, 2], 0.0)

    def test_ray_miss(self):
        hits = SpatialIndex(grid(4, 4)).ray_hits([10.0, 10.0, 1.0], [0.0, 0.0, -1.0])
        self.assertEqual(len(hits.t), 0)

    def test_ray_from_surface_point(self):
        hits = SpatialIndex(grid(4, 4)).ray_hits([1.3, 2.7, 0.0], [0.0, 0.0, -1.0])
        self.assertEqual(len(hits.t), 1)
        self.assertAlmostEqual(hits.t[0], 0.0, delta=1e-12)
