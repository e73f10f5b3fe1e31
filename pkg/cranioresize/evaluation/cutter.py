"""툴패스를 따라 임플란트를 가상으로 절삭하는 모듈

공구축 직선 X_i + s·V_i 들이 이루는 선직면을 높이 h에서 자르면 평면 다각형 q_i(h)가 됩니다.
정점마다 자기 높이의 다각형까지 평면 내 부호 거리 d(안쪽이 양수)를 구하고,
f = d − tool_radius ≥ 0 인 정점을 남깁니다. 경계를 지나는 면은 엣지 위 f = 0 지점에서 나눕니다.
"""
import numpy as np
import shapely
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from ..contour import plane_frame_from_normal
from ..customerror import EmptyResultError, FrameMismatchError, OpenToolpathError
from ..meshcore import TriangleMesh
from ..settings import logger
from ..toolpath import Toolpath

_CHUNK = 512
_ROOT_ITERATIONS = 40
_ROOT_TOLERANCE = 1e-10
_MIN_FACE_AREA = 1e-12


def signed_polygon_distance(points: np.ndarray, polygons: np.ndarray) -> np.ndarray:
    """점마다 대응하는 닫힌 다각형까지의 부호 거리 (안쪽 양수)

    점마다 다각형이 다르므로 shapely의 배열 함수로 다각형을 한꺼번에 만들고 판정합니다.

    Args:
        points (np.ndarray): (b, 2) 평면 점
        polygons (np.ndarray): (b, m, 2) 또는 (m, 2) 다각형 꼭짓점

    Returns:
        np.ndarray: (b,) 부호 거리
    """
    points = np.asarray(points, dtype=np.float64).reshape(-1, 2)
    if not len(points):
        return np.empty(0)
    polygons = np.asarray(polygons, dtype=np.float64)
    if polygons.ndim == 2:
        polygons = np.broadcast_to(polygons, (len(points),) + polygons.shape)
    rings = shapely.linearrings(np.ascontiguousarray(polygons))
    distance = shapely.distance(rings, shapely.points(points))
    inside = shapely.contains_xy(shapely.polygons(rings), points[:, 0], points[:, 1])
    return np.where(inside, distance, -distance)


class SweptToolSurface:
    """툴패스 공구축이 이루는 선직면과 공구 반경으로 정한 절삭 경계

    Attributes:
        frame (PlaneFrame): 툴패스 평면 좌표계 (원점 O_c, 법선 n_o)
        tool_radius (float): 공구 반경 (mm)
    """

    def __init__(self, toolpath: Toolpath):
        self.frame = plane_frame_from_normal(toolpath.center, toolpath.plane_normal, toolpath.frame)
        self.tool_radius = toolpath.tool.tool_radius
        local_positions = self.frame.to_local(toolpath.positions)
        local_axes = toolpath.axes @ self.frame.basis.T
        # q_i(h) = offset_i + h · slope_i
        self._slope = local_axes[:, :2] / local_axes[:, 2:3]
        self._offset = local_positions[:, :2] - local_positions[:, 2:3] * self._slope

    def polygon(self, height: float) -> np.ndarray:
        """높이 height에서 공구축들이 지나는 평면 다각형 (m, 2)"""
        return self._offset + height * self._slope

    def clearance(self, points) -> np.ndarray:
        """f = d − tool_radius. 0 이상이면 남는 쪽입니다."""
        local = self.frame.to_local(points).reshape(-1, 3)
        out = np.empty(len(local))
        for start in range(0, len(local), _CHUNK):
            block = local[start:start + _CHUNK]
            polygons = self._offset[None] + block[:, 2, None, None] * self._slope[None]
            out[start:start + _CHUNK] = signed_polygon_distance(block[:, :2], polygons)
        return out - self.tool_radius


def _edge_roots(surface: SweptToolSurface, kept: np.ndarray, dropped: np.ndarray,
                f_kept: np.ndarray, f_dropped: np.ndarray) -> np.ndarray:
    """엣지 위 f = 0 지점을 regula falsi(Illinois)로 찾습니다."""
    direction = dropped - kept
    lo, hi = np.zeros(len(kept)), np.ones(len(kept))
    f_lo, f_hi = f_kept.copy(), f_dropped.copy()
    t = f_lo / (f_lo - f_hi)
    side = np.zeros(len(kept), dtype=np.int8)
    for _ in range(_ROOT_ITERATIONS):
        value = surface.clearance(kept + t[:, None] * direction)
        active = np.abs(value) > _ROOT_TOLERANCE
        if not active.any():
            break
        positive = value >= 0
        lo = np.where(positive, t, lo)
        f_lo = np.where(positive, value, f_lo)
        hi = np.where(positive, hi, t)
        f_hi = np.where(positive, f_hi, value)
        # 같은 쪽이 연속으로 갱신되면 반대쪽 값을 절반으로 줄임
        f_hi = np.where(positive & (side == 1), 0.5 * f_hi, f_hi)
        f_lo = np.where(~positive & (side == -1), 0.5 * f_lo, f_lo)
        side = np.where(positive, 1, -1).astype(np.int8)
        t = np.where(active, lo + f_lo * (hi - lo) / (f_lo - f_hi), t)
    return kept + t[:, None] * direction


def _rotated(faces: np.ndarray, start: np.ndarray) -> np.ndarray:
    order = (start[:, None] + np.arange(3)[None, :]) % 3
    return np.take_along_axis(faces, order, axis=1)


def _split_faces(mesh: TriangleMesh, keep: np.ndarray, surface: SweptToolSurface, values: np.ndarray):
    faces = mesh.faces
    counts = keep[faces].sum(axis=1)
    whole = faces[counts == 3]
    single = _rotated(faces[counts == 1], np.argmax(keep[faces[counts == 1]], axis=1))
    double = _rotated(faces[counts == 2], (np.argmin(keep[faces[counts == 2]], axis=1) + 1) % 3)

    # 면 방향 a → b → c 기준: single은 a만, double은 a, b가 남음
    crossing = np.vstack([
        single[:, [0, 1]], single[:, [0, 2]],
        double[:, [1, 2]], double[:, [0, 2]],
    ])
    if not len(crossing):
        return mesh.vertices, whole
    pairs, inverse = np.unique(crossing, axis=0, return_inverse=True)
    inverse = inverse.reshape(-1)
    roots = _edge_roots(
        surface, mesh.vertices[pairs[:, 0]], mesh.vertices[pairs[:, 1]],
        values[pairs[:, 0]], values[pairs[:, 1]])
    new_index = mesh.n_vertices + inverse

    n_single, n_double = len(single), len(double)
    ab, ac = new_index[:n_single], new_index[n_single:2 * n_single]
    bc = new_index[2 * n_single:2 * n_single + n_double]
    ca = new_index[2 * n_single + n_double:]
    new_faces = np.vstack([
        whole,
        np.stack([single[:, 0], ab, ac], axis=1),
        np.stack([double[:, 0], double[:, 1], bc], axis=1),
        np.stack([double[:, 0], bc, ca], axis=1),
    ])
    return np.vstack([mesh.vertices, roots]), new_faces


def _axis_faces(mesh: TriangleMesh, surface: SweptToolSurface) -> np.ndarray:
    """평면 투영이 O_c를 포함하는 면 마스크"""
    planar = surface.frame.in_plane(mesh.vertices)[mesh.faces]
    a, b, c = planar[:, 0], planar[:, 1], planar[:, 2]

    def cross(p, q, r):
        return (q[:, 0] - p[:, 0]) * (r[:, 1] - p[:, 1]) - (q[:, 1] - p[:, 1]) * (r[:, 0] - p[:, 0])

    origin = np.zeros_like(a)
    sides = np.stack([cross(a, b, origin), cross(b, c, origin), cross(c, a, origin)], axis=1)
    return np.all(sides >= -1e-12, axis=1) | np.all(sides <= 1e-12, axis=1)


def _components_on_axis(mesh: TriangleMesh, surface: SweptToolSurface) -> TriangleMesh:
    faces = mesh.faces
    rows = np.concatenate([faces[:, 0], faces[:, 1], faces[:, 2]])
    cols = np.concatenate([faces[:, 1], faces[:, 2], faces[:, 0]])
    graph = coo_matrix((np.ones(len(rows)), (rows, cols)), shape=(mesh.n_vertices, mesh.n_vertices))
    count, labels = connected_components(graph, directed=False)
    if count == 1:
        return mesh
    face_labels = labels[faces[:, 0]]
    chosen = np.unique(face_labels[_axis_faces(mesh, surface)])
    if not len(chosen):
        # 축이 지나는 면이 없으면 O_c에 가장 가까운 요소
        radial = np.linalg.norm(surface.frame.in_plane(mesh.vertices), axis=1)
        nearest = np.full(count, np.inf)
        np.minimum.at(nearest, labels, radial)
        chosen = np.array([int(np.argmin(nearest))])
    logger.info("가상 절삭: 연결 요소 %d개 중 O_c 축이 지나는 %d개를 남깁니다.", count, len(chosen))
    return mesh.face_subset(np.isin(face_labels, chosen))


def virtual_cut(implant: TriangleMesh, toolpath: Toolpath) -> TriangleMesh:
    """툴패스가 쓸고 지나간 선직면 바깥 재료를 제거한 임플란트를 반환합니다.

    Args:
        implant (TriangleMesh): 크기가 큰 임플란트 (툴패스와 같은 좌표계)
        toolpath (Toolpath): 닫힌 툴패스

    Returns:
        TriangleMesh: 절삭 후 O_c 축이 지나는 연결 요소들. 잘리는 곳이 없으면 입력 메쉬 그대로

    Raises:
        FrameMismatchError: 메쉬와 툴패스의 좌표계가 다른 경우
        OpenToolpathError: 웨이포인트가 3개 미만이거나 닫는 구간이 step보다 긴 경우
        EmptyResultError: 남는 정점이 없는 경우
    """
    if implant.frame != toolpath.frame:
        raise FrameMismatchError(f"임플란트 좌표계({implant.frame})와 툴패스 좌표계({toolpath.frame})가 다릅니다.")
    if len(toolpath) < 3 or toolpath.spacing()[-1] > toolpath.step + toolpath.tolerance:
        raise OpenToolpathError("닫힌 툴패스가 아닙니다.")

    surface = SweptToolSurface(toolpath)
    values = surface.clearance(implant.vertices)
    keep = values >= 0
    if keep.all():
        logger.info("가상 절삭: 툴패스가 임플란트와 만나지 않아 그대로 둡니다.")
        return implant
    if not keep.any():
        raise EmptyResultError("툴패스 안쪽에 남는 임플란트 정점이 없습니다.")

    vertices, faces = _split_faces(implant, keep, surface, values)
    triangles = vertices[faces]
    areas = 0.5 * np.linalg.norm(
        np.cross(triangles[:, 1] - triangles[:, 0], triangles[:, 2] - triangles[:, 0]), axis=1)
    faces = faces[areas > _MIN_FACE_AREA]
    if not len(faces):
        raise EmptyResultError("절삭 후 남은 면이 없습니다.")
    cut = TriangleMesh(vertices, faces, frame=implant.frame)
    cut = _components_on_axis(cut.face_subset(np.ones(len(faces), dtype=bool)), surface)

    logger.info("가상 절삭: 정점 %d개 → %d개, 면적 %.2f → %.2f mm²",
                implant.n_vertices, cut.n_vertices, implant.area, cut.area)
    return cut
