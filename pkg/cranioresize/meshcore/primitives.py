"""테스트와 시편 생성에서 함께 쓰는 기본 도형 메쉬를 만드는 모듈입니다.

모든 도형은 바깥(또는 +z)을 향하는 반시계 방향 면으로 생성됩니다.
"""
import numpy as np

from ..customerror import InvalidParamsError
from .base import TriangleMesh

_GOLDEN = (1.0 + 5.0 ** 0.5) / 2.0

_ICOSAHEDRON_VERTICES = np.array([
    [-1, _GOLDEN, 0], [1, _GOLDEN, 0], [-1, -_GOLDEN, 0], [1, -_GOLDEN, 0],
    [0, -1, _GOLDEN], [0, 1, _GOLDEN], [0, -1, -_GOLDEN], [0, 1, -_GOLDEN],
    [_GOLDEN, 0, -1], [_GOLDEN, 0, 1], [-_GOLDEN, 0, -1], [-_GOLDEN, 0, 1],
], dtype=np.float64)

_ICOSAHEDRON_FACES = np.array([
    [0, 11, 5], [0, 5, 1], [0, 1, 7], [0, 7, 10], [0, 10, 11],
    [1, 5, 9], [5, 11, 4], [11, 10, 2], [10, 7, 6], [7, 1, 8],
    [3, 9, 4], [3, 4, 2], [3, 2, 6], [3, 6, 8], [3, 8, 9],
    [4, 9, 5], [2, 4, 11], [6, 2, 10], [8, 6, 7], [9, 8, 1],
], dtype=np.int64)


def _signed_volume(vertices: np.ndarray, faces: np.ndarray) -> float:
    tri = vertices[faces]
    return float(np.einsum("ij,ij->i", tri[:, 0], np.cross(tri[:, 1], tri[:, 2])).sum() / 6.0)


def combine(*meshes: TriangleMesh, frame=None) -> TriangleMesh:
    """여러 메쉬를 하나로 합칩니다. 정점은 병합하지 않습니다."""
    vertices, faces, offset = [], [], 0
    for mesh in meshes:
        vertices.append(mesh.vertices)
        faces.append(mesh.faces + offset)
        offset += mesh.n_vertices
    return TriangleMesh(np.vstack(vertices), np.vstack(faces), frame=frame)


def ring_strip(inner, outer) -> np.ndarray:
    """같은 개수의 두 닫힌 링 사이를 삼각형 띠로 잇습니다.

    두 링이 +z에서 보아 반시계 방향으로 진행할 때, inner가 안쪽 링이면 면은 +z를 향하고,
    같은 반지름에서 inner가 위쪽 링이면 면은 축에서 멀어지는 방향을 향합니다.

    Args:
        inner: 첫 번째 링의 정점 인덱스
        outer: 두 번째 링의 정점 인덱스

    Returns:
        np.ndarray: (2k, 3) 면 배열
    """
    inner = np.asarray(inner, dtype=np.int64)
    outer = np.asarray(outer, dtype=np.int64)
    inner_next = np.roll(inner, -1)
    outer_next = np.roll(outer, -1)
    first = np.stack([inner, outer, outer_next], axis=1)
    second = np.stack([inner, outer_next, inner_next], axis=1)
    return np.vstack([first, second])


def fan(center: int, ring) -> np.ndarray:
    """중심 정점과 링을 잇는 부채꼴 면"""
    ring = np.asarray(ring, dtype=np.int64)
    return np.stack([np.full(len(ring), center), ring, np.roll(ring, -1)], axis=1)


def icosphere(radius: float = 1.0, subdivisions: int = 3, center=(0.0, 0.0, 0.0)) -> TriangleMesh:
    """정이십면체를 subdivisions번 세분한 구 메쉬를 만듭니다.

    정점 수는 10·4^k + 2 입니다 (k=3: 642, k=4: 2562).
    """
    vertices = _ICOSAHEDRON_VERTICES / np.linalg.norm(_ICOSAHEDRON_VERTICES, axis=1)[:, None]
    faces = _ICOSAHEDRON_FACES.copy()
    for _ in range(subdivisions):
        edges = np.sort(faces[:, [0, 1, 1, 2, 2, 0]].reshape(-1, 2), axis=1)
        unique, inverse = np.unique(edges, axis=0, return_inverse=True)
        midpoints = vertices[unique[:, 0]] + vertices[unique[:, 1]]
        midpoints /= np.linalg.norm(midpoints, axis=1)[:, None]
        mid = inverse.reshape(-1).reshape(-1, 3) + len(vertices)
        vertices = np.vstack([vertices, midpoints])
        a, b, c = faces.T
        ab, bc, ca = mid.T
        faces = np.vstack([
            np.stack([a, ab, ca], axis=1),
            np.stack([b, bc, ab], axis=1),
            np.stack([c, ca, bc], axis=1),
            np.stack([ab, bc, ca], axis=1),
        ])
    if _signed_volume(vertices, faces) < 0:
        faces = faces[:, ::-1]
    return TriangleMesh(vertices * radius + np.asarray(center, dtype=np.float64), faces)


def grid(nx: int, ny: int, spacing: float = 1.0, z: float = 0.0) -> TriangleMesh:
    """(nx+1) x (ny+1) 정점의 +z 방향 평면 격자"""
    xs, ys = np.meshgrid(np.arange(nx + 1) * spacing, np.arange(ny + 1) * spacing, indexing="ij")
    vertices = np.stack([xs.ravel(), ys.ravel(), np.full(xs.size, z)], axis=1)
    index = np.arange((nx + 1) * (ny + 1)).reshape(nx + 1, ny + 1)
    v00 = index[:-1, :-1].ravel()
    v10 = index[1:, :-1].ravel()
    v11 = index[1:, 1:].ravel()
    v01 = index[:-1, 1:].ravel()
    faces = np.vstack([np.stack([v00, v10, v11], axis=1), np.stack([v00, v11, v01], axis=1)])
    return TriangleMesh(vertices, faces)


def grid_boundary(nx: int, ny: int) -> np.ndarray:
    """grid() 정점 인덱스 중 경계를 반시계 방향으로 나열합니다."""
    index = np.arange((nx + 1) * (ny + 1)).reshape(nx + 1, ny + 1)
    bottom = index[:, 0]
    right = index[-1, 1:]
    top = index[-2::-1, -1]
    left = index[0, -2:0:-1]
    return np.concatenate([bottom, right, top, left])


def _rings(radii, n_sectors: int, z: float = 0.0, phase: float = 0.0) -> np.ndarray:
    theta = phase + 2.0 * np.pi * np.arange(n_sectors) / n_sectors
    points = [np.stack([r * np.cos(theta), r * np.sin(theta), np.full(n_sectors, z)], axis=1)
              for r in radii]
    return np.vstack(points)


def disk(radius: float, n_rings: int, n_sectors: int, z: float = 0.0) -> TriangleMesh:
    """중심 정점 하나와 n_rings개의 동심 링으로 이루어진 +z 방향 원판"""
    radii = radius * np.arange(1, n_rings + 1) / n_rings
    vertices = np.vstack([[0.0, 0.0, z], _rings(radii, n_sectors, z)])
    rings = [1 + k * n_sectors + np.arange(n_sectors) for k in range(n_rings)]
    faces = [fan(0, rings[0])]
    faces += [ring_strip(rings[k], rings[k + 1]) for k in range(n_rings - 1)]
    return TriangleMesh(vertices, np.vstack(faces))


def annulus(inner_radius: float, outer_radius: float, n_rings: int, n_sectors: int) -> TriangleMesh:
    """n_rings+1개의 링으로 이루어진 +z 방향 고리 메쉬"""
    radii = np.linspace(inner_radius, outer_radius, n_rings + 1)
    vertices = _rings(radii, n_sectors)
    rings = [k * n_sectors + np.arange(n_sectors) for k in range(n_rings + 1)]
    faces = [ring_strip(rings[k], rings[k + 1]) for k in range(n_rings)]
    return TriangleMesh(vertices, np.vstack(faces))


def cylinder(radius: float, height: float, n_sectors: int, n_levels: int) -> TriangleMesh:
    """z축을 따라 놓인, 바깥을 향하는 열린 원통 옆면"""
    vertices = np.vstack([
        _rings([radius], n_sectors, z=height * k / n_levels) for k in range(n_levels + 1)])
    rings = [k * n_sectors + np.arange(n_sectors) for k in range(n_levels + 1)]
    faces = [ring_strip(rings[k + 1], rings[k]) for k in range(n_levels)]
    return TriangleMesh(vertices, np.vstack(faces))


def plate(width: float, thickness: float, n: int, center=(0.0, 0.0)) -> TriangleMesh:
    """윗면이 z=thickness, 아랫면이 z=0인 닫힌 정사각 판

    Args:
        width (float): 한 변의 길이
        thickness (float): 두께
        n (int): 한 변의 분할 수
        center: 판 중심의 (x, y)
    """
    top = grid(n, n, width / n, z=thickness)
    offset = np.array([center[0] - width / 2, center[1] - width / 2, 0.0])
    top_vertices = top.vertices + offset
    bottom_vertices = top_vertices - np.array([0.0, 0.0, thickness])
    count = top.n_vertices
    boundary = grid_boundary(n, n)
    faces = np.vstack([
        top.faces,
        top.faces[:, ::-1] + count,
        ring_strip(boundary, boundary + count),
    ])
    return TriangleMesh(np.vstack([top_vertices, bottom_vertices]), faces)


def concentric_spheres(outer_radius: float, inner_radius: float, subdivisions: int = 3) -> TriangleMesh:
    """두께가 있는 구 껍질. 바깥 구는 바깥을, 안쪽 구는 중심을 향합니다."""
    outer = icosphere(outer_radius, subdivisions)
    inner = icosphere(inner_radius, subdivisions).flipped()
    return combine(outer, inner)


def drilled_hemisphere(
        radius: float,
        hole_radius: float,
        thickness: float,
        edge_length: float = 1.5) -> TriangleMesh:
    """꼭대기에 수직 구멍을 뚫은 두께 있는 반구 껍질에서 바깥에서 보이는 면만 만듭니다.

    바깥 반구면(구멍 가장자리부터 적도까지)과 깊이 thickness의 구멍 벽으로 이루어지며,
    구멍 가장자리 링은 두 면이 공유하는 날카로운 모서리입니다. 적도와 벽 아래쪽은 경계로 남습니다.
    정점 배열은 [가장자리 링, 구면 링 1..m, 벽 링 1..L] 순서입니다.

    Args:
        radius (float): 바깥 구면 반지름
        hole_radius (float): 구멍의 수평 반지름, radius보다 작아야 합니다.
        thickness (float): 구멍 벽의 깊이
        edge_length (float): 목표 엣지 길이

    Returns:
        TriangleMesh: 구면은 바깥을, 구멍 벽은 구멍 축을 향하는 열린 메쉬
    """
    if not 0 < hole_radius < radius:
        raise InvalidParamsError(f"구멍 반지름은 0과 {radius} 사이여야 합니다. 입력: {hole_radius}")
    sectors = max(16, int(round(2.0 * np.pi * hole_radius / edge_length)))
    rim_angle = np.arcsin(hole_radius / radius)
    n_rings = max(1, int(round(radius * (0.5 * np.pi - rim_angle) / edge_length)))
    levels = max(1, int(round(thickness / edge_length)))

    theta = 2.0 * np.pi * np.arange(sectors) / sectors
    polar = np.linspace(rim_angle, 0.5 * np.pi, n_rings + 1)
    sphere = [np.stack([
        radius * np.sin(phi) * np.cos(theta),
        radius * np.sin(phi) * np.sin(theta),
        np.full(sectors, radius * np.cos(phi))], axis=1) for phi in polar]
    rim_height = radius * np.cos(rim_angle)
    wall = [_rings([hole_radius], sectors, z=rim_height - thickness * level / levels)
            for level in range(1, levels + 1)]

    rings = [k * sectors + np.arange(sectors) for k in range(n_rings + 1 + levels)]
    wall_rings = [rings[0]] + rings[n_rings + 1:]
    faces = [ring_strip(rings[k], rings[k + 1]) for k in range(n_rings)]
    faces += [ring_strip(wall_rings[k + 1], wall_rings[k]) for k in range(levels)]
    return TriangleMesh(np.vstack(sphere + wall), np.vstack(faces))
