"""윤곽 점군의 최적 평면 좌표계와 원통 좌표 변환

classes:
    PlaneFrame: 원점 O_c, 법선 n_o, 평면 내 축 u, w
    CylindricalCoordinates: (θ, r, h) 배열 묶음

functions:
    fit_plane_frame: 최소제곱 평면과 방향 결정
    plane_frame_from_normal: 법선과 원점으로 좌표계 생성
    to_cylindrical: 점군을 원통 좌표로 변환
"""
from typing import NamedTuple, Optional, Union

import numpy as np

from ..customerror import DegenerateConfigurationError, InvalidParamsError
from ..settings import logger
from ..validation import validate_points, validate_vector
from .cloud import ContourPointCloud

_AXIS_EPS = 1e-9


class PlaneFrame:
    """윤곽 평면 좌표계 {u, w, n_o}와 원점 O_c

    Attributes:
        origin (np.ndarray): O_c (mm)
        normal (np.ndarray): n_o
        u (np.ndarray): 평면 내 첫 번째 축
        w (np.ndarray): n_o × u
        frame (str | None): 좌표가 표현된 좌표계 이름
    """

    def __init__(self, origin, normal, u, w=None, frame: Optional[str] = None):
        self.origin = validate_vector(origin, name="원점")
        self.normal = validate_vector(normal, name="법선")
        self.u = validate_vector(u, name="u 축")
        self.w = np.cross(self.normal, self.u) if w is None else validate_vector(w, name="w 축")
        basis = np.vstack([self.u, self.w, self.normal])
        if np.max(np.abs(basis @ basis.T - np.eye(3))) > 1e-9:
            raise InvalidParamsError("평면 좌표축이 정규 직교가 아닙니다.")
        if abs(np.linalg.det(basis) - 1.0) > 1e-9:
            raise InvalidParamsError("평면 좌표축이 오른손 좌표계가 아닙니다.")
        self.frame = frame

    @property
    def basis(self) -> np.ndarray:
        """행이 u, w, n_o인 3x3 행렬"""
        return np.vstack([self.u, self.w, self.normal])

    def to_local(self, points) -> np.ndarray:
        """(u, w, h) 국소 좌표"""
        return (np.asarray(points, dtype=np.float64) - self.origin) @ self.basis.T

    def to_world(self, local) -> np.ndarray:
        return np.asarray(local, dtype=np.float64) @ self.basis + self.origin

    def in_plane(self, points) -> np.ndarray:
        """(n, 2) 평면 좌표 (u, w)"""
        return self.to_local(points)[..., :2]

    def transformed(self, transform) -> "PlaneFrame":
        """강체 변환을 적용한 좌표계"""
        return PlaneFrame(
            transform.apply(self.origin), transform.apply_vectors(self.normal),
            transform.apply_vectors(self.u), transform.apply_vectors(self.w), transform.to_frame)

    def __repr__(self):
        return (f"PlaneFrame(origin={np.round(self.origin, 4).tolist()}, "
                f"normal={np.round(self.normal, 6).tolist()}, frame={self.frame!r})")


class CylindricalCoordinates(NamedTuple):
    """PlaneFrame 기준 원통 좌표

    Attributes:
        theta (np.ndarray): [0, 2π) 각도
        r (np.ndarray): 평면 내 반지름 (mm)
        h (np.ndarray): n_o 방향 높이 (mm)
        frame (PlaneFrame): 기준 좌표계
    """
    theta: np.ndarray
    r: np.ndarray
    h: np.ndarray
    frame: PlaneFrame

    def __len__(self):
        return len(self.theta)

    def to_cartesian(self) -> np.ndarray:
        local = np.stack([self.r * np.cos(self.theta), self.r * np.sin(self.theta), self.h], axis=1)
        return self.frame.to_world(local)


def _orient(normal: np.ndarray, reference_normals: Optional[np.ndarray]) -> np.ndarray:
    if reference_normals is not None and len(reference_normals):
        dots = reference_normals @ normal
        vote = int(np.sum(dots > 0)) - int(np.sum(dots < 0))
        if vote < 0 or (vote == 0 and dots.sum() < 0):
            return -normal
        return normal
    return -normal if normal[2] < 0 else normal


def plane_frame_from_normal(origin, normal, frame: Optional[str] = None) -> PlaneFrame:
    """u를 전역 x축(거의 평행하면 y축)의 평면 투영으로 정한 PlaneFrame"""
    normal = validate_vector(normal, name="법선")
    normal = normal / np.linalg.norm(normal)
    for axis in (np.array([1.0, 0.0, 0.0]), np.array([0.0, 1.0, 0.0])):
        projected = axis - (axis @ normal) * normal
        if np.linalg.norm(projected) > 1e-6:
            u = projected / np.linalg.norm(projected)
            return PlaneFrame(origin, normal, u, np.cross(normal, u), frame)
    raise DegenerateConfigurationError("평면 내 축을 정할 수 없습니다.")


def fit_plane_frame(cloud: Union[ContourPointCloud, np.ndarray]) -> PlaneFrame:
    """윤곽 점군의 최소제곱 평면으로 PlaneFrame을 만듭니다.

    O_c는 점들의 평균, n_o는 분산이 가장 작은 주성분 방향입니다. n_o의 부호는
    점군에 저장된 메쉬 법선의 다수 방향을 따르고, 법선이 없으면 +z 쪽을 택합니다.
    u는 전역 x축(거의 평행하면 y축)을 평면에 투영해 정규화하고 w = n_o × u 입니다.
    따라서 강체 운동 G 아래에서 O_c, n_o는 G를 따라가지만 θ의 기준은 따라가지 않습니다.
    G·C(θ) = C'(θ + φ)이고 φ는 새 평면에서 잰 G·u의 각도입니다.

    Raises:
        DegenerateConfigurationError: 점이 3개 미만이거나 한 직선 위에 있는 경우
    """
    if isinstance(cloud, ContourPointCloud):
        points, normals, frame = cloud.points, cloud.normals, cloud.frame
    else:
        points, normals, frame = validate_points(cloud, name="윤곽 점"), None, None
    if len(points) < 3:
        raise DegenerateConfigurationError(f"평면을 맞추려면 최소 3개의 점이 필요합니다. 입력: {len(points)}개")

    origin = points.mean(axis=0)
    _, spread, vt = np.linalg.svd(points - origin, full_matrices=False)
    if spread[0] <= 1e-12 or spread[1] <= 1e-9 * spread[0]:
        raise DegenerateConfigurationError("윤곽 점들이 한 직선 위에 있어 평면을 정할 수 없습니다.")
    normal = _orient(vt[2] / np.linalg.norm(vt[2]), normals)
    return plane_frame_from_normal(origin, normal, frame)


def to_cylindrical(
        cloud: Union[ContourPointCloud, np.ndarray],
        frame: PlaneFrame) -> CylindricalCoordinates:
    """점을 (θ, r, h)로 변환합니다.

    θ = atan2(w 성분, u 성분) ∈ [0, 2π), r은 평면 내 반지름, h는 n_o 방향 높이입니다.
    축에서 1e-9 mm 이내인 점은 θ가 정의되지 않으므로 경고와 함께 버립니다.
    """
    points = cloud.points if isinstance(cloud, ContourPointCloud) else validate_points(cloud, min_count=0)
    local = frame.to_local(points).reshape(-1, 3)
    radius = np.hypot(local[:, 0], local[:, 1])
    on_axis = radius < _AXIS_EPS
    if on_axis.any():
        logger.warning("원통 좌표 축 위의 점 %d개를 버렸습니다.", int(on_axis.sum()))
        local, radius = local[~on_axis], radius[~on_axis]
    theta = np.mod(np.arctan2(local[:, 1], local[:, 0]), 2.0 * np.pi)
    theta[theta >= 2.0 * np.pi] = 0.0
    return CylindricalCoordinates(theta, radius, local[:, 2], frame)
