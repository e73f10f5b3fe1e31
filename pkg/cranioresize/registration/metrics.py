"""정합 오차 지표"""
from typing import Optional, Union

import numpy as np

from ..customerror import CountMismatchError, EmptyMeshError, InvalidParamsError
from ..meshcore import SpatialIndex, TriangleMesh
from .transform import LandmarkSet, RigidTransform

DISTANCE_MODES = ("all", "trimmed")


def _source_points(source: Union[TriangleMesh, np.ndarray]) -> np.ndarray:
    points = source.vertices if isinstance(source, TriangleMesh) else np.asarray(source, dtype=np.float64)
    if not len(points):
        raise EmptyMeshError("거리 지표를 계산할 소스 정점이 없습니다.")
    return points


def _aggregate(distances: np.ndarray, mode: str, trim: Optional[float]) -> float:
    if mode not in DISTANCE_MODES:
        raise InvalidParamsError(f"알 수 없는 거리 모드입니다: {mode}")
    if mode == "trimmed":
        if trim is None or not 0 <= trim < 1:
            raise InvalidParamsError("trimmed 모드에는 0 이상 1 미만의 trim 비율이 필요합니다.")
        keep = max(1, int(np.ceil((1.0 - trim) * len(distances))))
        distances = np.sort(distances)[:keep]
    return float(distances.mean())


def mean_surface_distance(
        source: Union[TriangleMesh, np.ndarray],
        target_index: SpatialIndex,
        mode: str = "all",
        trim: Optional[float] = None) -> float:
    """소스 정점에서 대상 표면까지 최근접 거리의 평균 (mm)

    Args:
        source: 소스 메쉬 또는 점 배열 (대상과 같은 좌표계)
        target_index (SpatialIndex): 대상 메쉬 색인
        mode (str): "all" 또는 "trimmed"
        trim (float, optional): trimmed 모드에서 먼저 버릴 가장 큰 거리의 비율

    Raises:
        EmptyMeshError: 소스 정점이 없는 경우
    """
    points = _source_points(source)
    return _aggregate(target_index.closest_points(points).distances, mode, trim)


def mean_vertex_distance(
        source: Union[TriangleMesh, np.ndarray],
        target_index: SpatialIndex,
        mode: str = "all",
        trim: Optional[float] = None) -> float:
    """소스 정점에서 대상 메쉬의 가장 가까운 정점까지 거리의 평균 (mm)"""
    points = _source_points(source)
    _, distances = target_index.closest_vertices(points)
    return _aggregate(distances, mode, trim)


def fiducial_registration_error(
        transform: RigidTransform,
        source: LandmarkSet,
        target: LandmarkSet) -> float:
    """정합된 기준점과 대상 기준점 사이 거리의 평균 mean ‖T·s_i − t_i‖ (mm)

    Raises:
        CountMismatchError: 점 개수가 다른 경우
    """
    if len(source) != len(target):
        raise CountMismatchError(
            f"기준점 개수가 다릅니다: source {len(source)}개, target {len(target)}개")
    moved = transform.apply(source.points)
    return float(np.linalg.norm(moved - target.points, axis=1).mean())
