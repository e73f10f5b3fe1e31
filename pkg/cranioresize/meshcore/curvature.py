"""코탄젠트 라플라시안으로 이산 평균 곡률을 계산하는 모듈입니다.

정점 i의 평균 곡률 법선은 K(x_i) = (1 / 2A_i) Σ_j (cot α_ij + cot β_ij)(x_i - x_j) = 2H n 이므로
|H| = |Σ_j (cot α_ij + cot β_ij)(x_i - x_j)| / (4 A_i) 입니다.
A_i는 혼합 보로노이 면적입니다(둔각 삼각형은 면적의 1/2 또는 1/4를 나눠 가집니다).
"""
import numpy as np
from scipy.sparse import coo_matrix

from .base import TriangleMesh, VertexScalarField
from .topology import boundary_vertex_mask


def _corner_cotangents(triangles: np.ndarray) -> np.ndarray:
    """(m, 3) 각 꼭짓점 내각의 코탄젠트"""
    cot = np.zeros(triangles.shape[:2])
    for corner in range(3):
        a = triangles[:, corner]
        b = triangles[:, (corner + 1) % 3]
        c = triangles[:, (corner + 2) % 3]
        u, v = b - a, c - a
        cross = np.linalg.norm(np.cross(u, v), axis=1)
        dot = np.einsum("ij,ij->i", u, v)
        with np.errstate(divide="ignore", invalid="ignore"):
            cot[:, corner] = np.where(cross > 0, dot / cross, 0.0)
    return cot


def mixed_areas(mesh: TriangleMesh) -> np.ndarray:
    """정점별 혼합 보로노이 면적"""
    triangles = mesh.triangles
    cot = _corner_cotangents(triangles)
    areas = mesh.face_areas
    corner_area = np.zeros((mesh.n_faces, 3))
    obtuse = cot < 0
    any_obtuse = obtuse.any(axis=1)
    for corner in range(3):
        nxt, prv = (corner + 1) % 3, (corner + 2) % 3
        to_next = np.sum((triangles[:, nxt] - triangles[:, corner]) ** 2, axis=1)
        to_prev = np.sum((triangles[:, prv] - triangles[:, corner]) ** 2, axis=1)
        voronoi = (to_next * cot[:, prv] + to_prev * cot[:, nxt]) / 8.0
        corner_area[:, corner] = np.where(
            ~any_obtuse, voronoi, np.where(obtuse[:, corner], areas / 2.0, areas / 4.0))
    result = np.zeros(mesh.n_vertices)
    np.add.at(result, mesh.faces.reshape(-1), corner_area.reshape(-1))
    return result


def cotangent_matrix(mesh: TriangleMesh):
    """C[j, k] = 엣지 (j, k)의 맞은편 각 코탄젠트 합인 대칭 희소 행렬"""
    cot = _corner_cotangents(mesh.triangles)
    rows, cols, values = [], [], []
    for corner in range(3):
        j = mesh.faces[:, (corner + 1) % 3]
        k = mesh.faces[:, (corner + 2) % 3]
        rows += [j, k]
        cols += [k, j]
        values += [cot[:, corner], cot[:, corner]]
    return coo_matrix(
        (np.concatenate(values), (np.concatenate(rows), np.concatenate(cols))),
        shape=(mesh.n_vertices, mesh.n_vertices)).tocsr()


def mean_curvature(mesh: TriangleMesh) -> VertexScalarField:
    """정점별 이산 평균 곡률의 크기 |H| (1/mm)를 계산합니다.

    경계 정점과 면에 속하지 않는 정점은 reliable=False로 표시됩니다.
    부호는 버리고 크기만 사용합니다.

    Args:
        mesh (TriangleMesh): 방향이 일관된 다양체 메쉬 (경계 허용)

    Returns:
        VertexScalarField: 이름이 "quality"인 |H| 필드

    Raises:
        NonManifoldError: 세 개 이상의 면이 공유하는 엣지가 있는 경우
    """
    unreliable = boundary_vertex_mask(mesh)
    weights = cotangent_matrix(mesh)
    degree = np.asarray(weights.sum(axis=1)).reshape(-1)
    laplace = degree[:, None] * mesh.vertices - weights @ mesh.vertices
    areas = mixed_areas(mesh)
    covered = areas > 0
    values = np.zeros(mesh.n_vertices)
    values[covered] = np.linalg.norm(laplace[covered], axis=1) / (4.0 * areas[covered])
    return VertexScalarField(mesh, values, reliable=covered & ~unreliable)
