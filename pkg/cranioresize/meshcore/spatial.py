"""불변 메쉬에 대한 최근접점, 최근접 정점, 광선 교차 질의를 제공하는 모듈입니다.

classes:
    SpatialIndex: 면 중심 KD 트리 기반 공간 색인
    ClosestPoints: 일괄 최근접점 질의 결과
"""
from typing import NamedTuple

import numpy as np
import trimesh
from scipy.spatial import cKDTree

from ..customerror import EmptyMeshError
from ..validation import validate_points, validate_vector
from .base import TriangleMesh

_CANDIDATES = 8


class ClosestPoints(NamedTuple):
    """최근접점 질의 결과

    Attributes:
        points (np.ndarray): (q, 3) 표면 위 최근접점
        faces (np.ndarray): (q,) 최근접점이 속한 면 번호
        distances (np.ndarray): (q,) 질의점과의 거리 (mm)
    """
    points: np.ndarray
    faces: np.ndarray
    distances: np.ndarray


class RayHits(NamedTuple):
    """광선 교차 결과, 광선 매개변수 t 오름차순

    Attributes:
        t (np.ndarray): 교차점까지의 광선 매개변수
        points (np.ndarray): (h, 3) 교차점
        faces (np.ndarray): (h,) 교차한 면 번호
    """
    t: np.ndarray
    points: np.ndarray
    faces: np.ndarray


class SpatialIndex:
    """하나의 불변 메쉬에 대한 공간 색인

    면 중심점 KD 트리로 후보 면을 고른 뒤 정확한 점-삼각형 거리를 계산합니다.
    후보 k개 면에 대한 정확한 거리 d0를 상한으로 삼고, 중심이 d0 + r_max 이내인 면을
    모두 검사하므로 결과는 전체 면에 대한 최솟값과 같습니다. (r_max는 면 중심에서
    꼭짓점까지의 최대 거리)

    생성 후에는 읽기 전용이므로 여러 스레드에서 동시에 질의해도 안전합니다.

    Examples:
        >>> index = SpatialIndex(mesh)
        >>> point, face, distance = index.closest_point([0.0, 0.0, 5.0])
    """

    def __init__(self, mesh: TriangleMesh):
        if mesh.n_faces == 0:
            raise EmptyMeshError("면이 없는 메쉬로 공간 색인을 만들 수 없습니다.")
        self.mesh = mesh
        self.triangles = mesh.triangles
        self.face_centers = self.triangles.mean(axis=1)
        self.max_radius = float(np.max(
            np.linalg.norm(self.triangles - self.face_centers[:, None, :], axis=2)))
        self._face_tree = cKDTree(self.face_centers)
        self._vertex_tree = cKDTree(mesh.vertices)

    def _exact(self, query_ids: np.ndarray, face_ids: np.ndarray, points: np.ndarray):
        closest = trimesh.triangles.closest_point(self.triangles[face_ids], points[query_ids])
        distances = np.linalg.norm(closest - points[query_ids], axis=1)
        return closest, distances

    def closest_points(self, queries) -> ClosestPoints:
        """여러 질의점의 표면 최근접점을 한꺼번에 구합니다.

        거리가 같은 면이 여러 개면 번호가 가장 작은 면을 반환합니다.

        Args:
            queries: (q, 3) 질의점

        Returns:
            ClosestPoints: 최근접점, 면 번호, 거리
        """
        points = validate_points(queries, name="질의점", min_count=0)
        count = len(points)
        if count == 0:
            return ClosestPoints(np.zeros((0, 3)), np.zeros(0, dtype=np.int64), np.zeros(0))

        k = min(_CANDIDATES, self.mesh.n_faces)
        _, nearest = self._face_tree.query(points, k=k)
        nearest = np.asarray(nearest).reshape(count, k)
        _, first = self._exact(np.repeat(np.arange(count), k), nearest.reshape(-1), points)
        bound = first.reshape(count, k).min(axis=1)

        radius = bound + self.max_radius
        radius = radius * (1.0 + 1e-9) + 1e-9
        candidates = self._face_tree.query_ball_point(points, radius)
        query_ids = np.repeat(np.arange(count), [len(c) for c in candidates])
        face_ids = np.concatenate([np.asarray(c, dtype=np.int64) for c in candidates])

        closest, distances = self._exact(query_ids, face_ids, points)
        order = np.lexsort((face_ids, distances, query_ids))
        query_sorted = query_ids[order]
        best = order[np.r_[True, query_sorted[1:] != query_sorted[:-1]]]
        return ClosestPoints(closest[best], face_ids[best], distances[best])

    def closest_point(self, query) -> tuple[np.ndarray, int, float]:
        """한 점의 표면 최근접점, 면 번호, 거리를 반환합니다."""
        result = self.closest_points(validate_vector(query, name="질의점")[None, :])
        return result.points[0], int(result.faces[0]), float(result.distances[0])

    def closest_vertices(self, queries) -> tuple[np.ndarray, np.ndarray]:
        """질의점마다 가장 가까운 정점 번호와 거리를 반환합니다."""
        points = validate_points(queries, name="질의점", min_count=0)
        if not len(points):
            return np.zeros(0, dtype=np.int64), np.zeros(0)
        distances, indices = self._vertex_tree.query(points)
        return np.asarray(indices, dtype=np.int64), np.asarray(distances)

    def closest_vertex(self, query) -> tuple[np.ndarray, int, float]:
        """한 점에 가장 가까운 정점 좌표, 번호, 거리를 반환합니다."""
        indices, distances = self.closest_vertices(validate_vector(query, name="질의점")[None, :])
        index = int(indices[0])
        return self.mesh.vertices[index].copy(), index, float(distances[0])

    def ray_hits(self, origin, direction, face_mask=None, eps: float = 1e-9) -> RayHits:
        """반직선 origin + t·direction (t ≥ -eps)과 만나는 모든 면을 구합니다.

        Möller–Trumbore 교차 판정을 모든 면에 대해 한꺼번에 계산합니다.

        Args:
            origin: 광선 시작점
            direction: 광선 방향 (정규화하지 않아도 됨)
            face_mask (optional): 검사할 면만 True인 불리언 배열
            eps (float): 허용오차

        Returns:
            RayHits: t 오름차순으로 정렬된 교차 결과
        """
        origin = validate_vector(origin, name="광선 시작점")
        direction = validate_vector(direction, name="광선 방향")
        direction = direction / np.linalg.norm(direction)

        face_ids = np.arange(self.mesh.n_faces)
        if face_mask is not None:
            face_ids = face_ids[np.asarray(face_mask, dtype=bool)]
        tri = self.triangles[face_ids]
        edge1 = tri[:, 1] - tri[:, 0]
        edge2 = tri[:, 2] - tri[:, 0]
        pvec = np.cross(direction, edge2)
        det = np.einsum("ij,ij->i", edge1, pvec)
        usable = np.abs(det) > 1e-14
        inv = np.zeros_like(det)
        inv[usable] = 1.0 / det[usable]
        tvec = origin - tri[:, 0]
        u = np.einsum("ij,ij->i", tvec, pvec) * inv
        qvec = np.cross(tvec, edge1)
        v = (qvec @ direction) * inv
        t = np.einsum("ij,ij->i", edge2, qvec) * inv
        tol = 1e-12
        hit = usable & (u >= -tol) & (v >= -tol) & (u + v <= 1.0 + tol) & (t >= -eps)

        order = np.argsort(t[hit], kind="stable")
        t_hit = t[hit][order]
        return RayHits(t_hit, origin + t_hit[:, None] * direction, face_ids[hit][order])
