"""SVD 기반 대응점 강체 정합 (Arun 방식)"""
from typing import Union

import numpy as np

from ..customerror import CountMismatchError, DegenerateConfigurationError
from ..validation import validate_points
from .transform import LandmarkSet, RigidTransform

PointsLike = Union[LandmarkSet, np.ndarray]


def best_fit_rotation(source: np.ndarray, target: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Σ‖R·s_i + t − t_i‖²를 최소로 하는 (R, t)

    중심을 뺀 공분산 행렬의 SVD로 회전을 구하고, 행렬식이 음수면 마지막 축을 뒤집어
    반사 변환을 막습니다.
    """
    source_center = source.mean(axis=0)
    target_center = target.mean(axis=0)
    covariance = (source - source_center).T @ (target - target_center)
    u, _, vt = np.linalg.svd(covariance)
    v = vt.T
    d = 1.0 if np.linalg.det(v @ u.T) >= 0 else -1.0
    rotation = v @ np.diag([1.0, 1.0, d]) @ u.T
    return rotation, target_center - rotation @ source_center


def _check_spread(points: np.ndarray, name: str):
    spread = np.linalg.svd(points - points.mean(axis=0), compute_uv=False)
    scale = max(float(spread[0]), 1.0)
    if spread[0] <= 1e-12 * scale:
        raise DegenerateConfigurationError(f"{name}의 점들이 모두 한 점에 겹쳐 있습니다.")
    if spread[1] <= 1e-9 * spread[0]:
        raise DegenerateConfigurationError(f"{name}의 점들이 한 직선 위에 있습니다.")


def _unpack(points: PointsLike, name: str):
    if isinstance(points, LandmarkSet):
        return points.points, points.frame
    return validate_points(points, name=name), None


def register_points_svd(source: PointsLike, target: PointsLike) -> RigidTransform:
    """순서대로 대응하는 두 점 집합 사이의 최소제곱 강체 변환을 구합니다.

    Args:
        source: 원본 점 (LandmarkSet 또는 (n, 3) 배열)
        target: 대상 점

    Returns:
        RigidTransform: source.frame -> target.frame 변환

    Raises:
        CountMismatchError: 점 개수가 다른 경우
        DegenerateConfigurationError: 점이 3개 미만이거나, 한 직선 위에 있거나, 겹쳐 있는 경우

    Examples:
        >>> T = register_points_svd(markers_ct, markers_base)
        >>> T.from_frame, T.to_frame
        ('CT', 'base')
    """
    source_points, source_frame = _unpack(source, "source")
    target_points, target_frame = _unpack(target, "target")
    if len(source_points) != len(target_points):
        raise CountMismatchError(
            f"대응점 개수가 다릅니다: source {len(source_points)}개, target {len(target_points)}개")
    if len(source_points) < 3:
        raise DegenerateConfigurationError(f"강체 정합에는 최소 3개의 점이 필요합니다. 입력: {len(source_points)}개")
    _check_spread(source_points, "source")
    _check_spread(target_points, "target")

    rotation, translation = best_fit_rotation(source_points, target_points)
    return RigidTransform(rotation, translation, source_frame, target_frame)
