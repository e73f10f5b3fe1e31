"""메쉬 엣지 연결 정보와 경계 루프를 다루는 모듈입니다."""
import numpy as np

from ..customerror import NonManifoldError
from .base import TriangleMesh


def edge_face_counts(mesh: TriangleMesh) -> tuple[np.ndarray, np.ndarray]:
    """고유 엣지와 각 엣지를 공유하는 면의 개수를 반환합니다.

    Raises:
        NonManifoldError: 세 개 이상의 면이 공유하는 엣지가 있는 경우
    """
    if not mesh.n_faces:
        return np.zeros((0, 2), dtype=np.int64), np.zeros(0, dtype=np.int64)
    pairs = np.sort(mesh.faces[:, [0, 1, 1, 2, 2, 0]].reshape(-1, 2), axis=1)
    edges, counts = np.unique(pairs, axis=0, return_counts=True)
    if np.any(counts > 2):
        bad = edges[counts > 2][0]
        raise NonManifoldError(
            f"세 개 이상의 면이 공유하는 엣지가 있습니다: ({bad[0]}, {bad[1]}) 외 "
            f"{int(np.sum(counts > 2)) - 1}개")
    return edges, counts


def boundary_vertex_mask(mesh: TriangleMesh) -> np.ndarray:
    """경계 엣지(면 하나에만 속한 엣지)에 닿은 정점 여부"""
    edges, counts = edge_face_counts(mesh)
    mask = np.zeros(mesh.n_vertices, dtype=bool)
    mask[edges[counts == 1].reshape(-1)] = True
    return mask


def loop_length(vertices: np.ndarray, loop) -> float:
    """닫힌 정점 루프의 둘레"""
    points = vertices[np.asarray(loop)]
    return float(np.linalg.norm(np.roll(points, -1, axis=0) - points, axis=1).sum())


def boundary_loops(mesh: TriangleMesh) -> list[np.ndarray]:
    """메쉬의 닫힌 경계 루프들을 둘레가 긴 순서로 반환합니다.

    면 방향을 따르는 경계 반엣지(a -> b)를 이어 루프를 만들기 때문에, 각 루프는
    면이 있는 쪽을 왼쪽에 두고 진행합니다.

    Args:
        mesh (TriangleMesh): 대상 메쉬

    Returns:
        list[np.ndarray]: 정점 인덱스 배열의 리스트. 닫힌 메쉬면 빈 리스트

    Raises:
        NonManifoldError: 세 개 이상의 면이 공유하는 엣지가 있는 경우

    Examples:
        >>> from cranioresize.meshcore.primitives import annulus
        >>> len(boundary_loops(annulus(10, 20, 4, 32)))
        2
    """
    edges, counts = edge_face_counts(mesh)
    if not np.any(counts == 1):
        return []
    boundary = {tuple(edge) for edge in edges[counts == 1].tolist()}

    outgoing: dict[int, list[int]] = {}
    for face in mesh.faces.tolist():
        for a, b in ((face[0], face[1]), (face[1], face[2]), (face[2], face[0])):
            if (min(a, b), max(a, b)) in boundary:
                outgoing.setdefault(a, []).append(b)
    for targets in outgoing.values():
        targets.sort()

    loops = []
    for start in sorted(outgoing):
        while outgoing.get(start):
            loop = [start]
            current = outgoing[start].pop(0)
            while current != start:
                loop.append(current)
                targets = outgoing.get(current)
                if not targets:
                    break
                current = targets.pop(0)
            if current == start:
                loops.append(np.array(loop, dtype=np.int64))

    lengths = [loop_length(mesh.vertices, loop) for loop in loops]
    order = np.argsort(-np.asarray(lengths), kind="stable")
    return [loops[index] for index in order]
