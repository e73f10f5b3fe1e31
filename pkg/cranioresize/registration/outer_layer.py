"""두 겹 CT 두개골 메쉬에서 안쪽 층을 제거합니다."""
import numpy as np

from ..customerror import EmptyResultError
from ..meshcore import TriangleMesh, centroid, vertex_normals
from ..settings import logger


def extract_outer_layer(mesh: TriangleMesh) -> TriangleMesh:
    """중심 o에서 본 방향 v_i = q_i − o 와 법선 n_i의 내적이 음수인 정점을 제거합니다.

    저장된 법선이 있으면 그대로 쓰고, 없으면 면적 가중 정점 법선을 계산합니다.
    세 정점이 모두 남은 면만 유지하며, 결과에는 원래 메쉬에서 구한 법선을 붙여
    두 번 적용해도 법선이 바뀌지 않도록 합니다.

    Args:
        mesh (TriangleMesh): 안쪽/바깥쪽 표면을 모두 가진 닫힌 껍질 메쉬

    Returns:
        TriangleMesh: 바깥층에 해당하는 열린 메쉬

    Raises:
        EmptyMeshError: 정점이 없는 경우
        EmptyResultError: 남는 정점이 없는 경우 (법선이 뒤집힌 메쉬)
    """
    origin = centroid(mesh)
    if mesh.normals is not None:
        normals = mesh.normals
        valid = np.ones(mesh.n_vertices, dtype=bool)
    else:
        normals, valid = vertex_normals(mesh)

    keep = np.einsum("ij,ij->i", mesh.vertices - origin, normals) >= 0
    keep &= valid
    if not keep.any():
        raise EmptyResultError("바깥층 추출 결과 남은 정점이 없습니다. 법선 방향이 뒤집혔는지 확인하세요.")

    outer = mesh.submesh(keep)
    outer = outer.with_normals(normals[keep])
    logger.info(
        "바깥층 추출: 정점 %d -> %d, 면 %d -> %d",
        mesh.n_vertices, outer.n_vertices, mesh.n_faces, outer.n_faces)
    return outer
