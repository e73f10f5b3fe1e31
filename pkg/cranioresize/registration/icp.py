"""점-대-점 ICP 정합

classes:
    IcpParams: ICP 반복 파라미터
    IcpResult: 최종 변환과 반복별 RMS 기록

functions:
    icp: 소스 점을 대상 메쉬 표면에 정합합니다.
"""
from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np
from pydantic import BaseModel, Field

from ..customerror import DivergedInitError, NoCorrespondencesError
from ..meshcore import SpatialIndex, TriangleMesh
from ..settings import (
    ICP_DIVERGENCE_GATE, ICP_MAX_ITERS, ICP_RMS_TOL, ICP_SAMPLE_SIZE, ICP_TRIM_FRACTION, logger)
from ..validation import validate_points
from .svd import best_fit_rotation
from .transform import RigidTransform


class IcpParams(BaseModel):
    """ICP 파라미터

    Attributes:
        max_iters (int): 최대 반복 횟수
        rms_tol (float): 반복 간 RMS 감소량이 이 값보다 작으면 수렴으로 봅니다 (mm)
        trim_fraction (float): 반복마다 버리는 가장 먼 대응쌍의 비율
        divergence_gate (float): 초기 RMS 허용 상한 (mm)
        sample_size (int | None): 소스 점이 이보다 많으면 이 개수만 무작위로 고릅니다. None이면 전부 사용
        seed (int): 표본 추출 시드
    """
    max_iters: int = Field(ICP_MAX_ITERS, ge=1)
    rms_tol: float = Field(ICP_RMS_TOL, ge=0)
    trim_fraction: float = Field(ICP_TRIM_FRACTION, ge=0, lt=1)
    divergence_gate: float = Field(ICP_DIVERGENCE_GATE, gt=0)
    sample_size: Optional[int] = Field(ICP_SAMPLE_SIZE, ge=3)
    seed: int = 0


@dataclass
class IcpResult:
    """ICP 결과

    Attributes:
        transform (RigidTransform): 소스 좌표계 -> 대상 좌표계 최종 변환 (초기 변환 포함)
        rms_history (list[float]): 초기값을 포함한 반복별 RMS (mm), 증가하지 않습니다.
        iterations (int): 수행한 반복 횟수
        converged (bool): rms_tol 조건으로 멈췄는지 여부
    """
    transform: RigidTransform
    rms_history: list[float] = field(default_factory=list)
    iterations: int = 0
    converged: bool = False

    @property
    def final_rms(self) -> float:
        return self.rms_history[-1]


def _kept(distances: np.ndarray, trim_fraction: float) -> np.ndarray:
    count = len(distances)
    keep = max(3, int(np.ceil((1.0 - trim_fraction) * count)))
    if keep >= count:
        return np.arange(count)
    return np.sort(np.argsort(distances, kind="stable")[:keep])


def _rms(distances: np.ndarray) -> float:
    return float(np.sqrt(np.mean(distances ** 2)))


def icp(
        source: Union[TriangleMesh, np.ndarray],
        target_index: SpatialIndex,
        init: Optional[RigidTransform] = None,
        params: Optional[IcpParams] = None) -> IcpResult:
    """점-대-점 ICP로 source를 target 메쉬 표면에 정합합니다.

    매 반복마다 현재 변환으로 옮긴 소스 점의 표면 최근접점을 찾고, 가장 먼
    trim_fraction 비율의 대응쌍을 버린 뒤 SVD 강체 정합으로 변환을 갱신합니다.
    RMS 감소량이 rms_tol보다 작거나 max_iters에 도달하면 멈춥니다.

    Args:
        source: 소스 메쉬 또는 (n, 3) 점 배열
        target_index (SpatialIndex): 대상 메쉬의 공간 색인
        init (RigidTransform, optional): 초기 변환. 없으면 항등 변환
        params (IcpParams, optional): 반복 파라미터

    Returns:
        IcpResult: init을 포함한 최종 변환과 RMS 기록

    Raises:
        NoCorrespondencesError: 소스 점이 없는 경우
        DivergedInitError: 초기 RMS가 divergence_gate보다 큰 경우
    """
    params = params or IcpParams()
    if isinstance(source, TriangleMesh):
        points = source.vertices
        source_frame = source.frame
    else:
        points = validate_points(source, name="ICP 소스", min_count=0)
        source_frame = None
    if not len(points):
        raise NoCorrespondencesError("ICP 소스 점이 비어 있습니다.")

    target_frame = target_index.mesh.frame
    if init is None:
        init = RigidTransform.identity(source_frame, target_frame)

    if params.sample_size is not None and len(points) > params.sample_size:
        rng = np.random.default_rng(params.seed)
        points = points[np.sort(rng.choice(len(points), params.sample_size, replace=False))]

    current = init
    matches = target_index.closest_points(current.apply(points))
    kept = _kept(matches.distances, params.trim_fraction)
    rms = _rms(matches.distances[kept])
    if rms > params.divergence_gate:
        raise DivergedInitError(
            f"초기 정합 RMS {rms:.3f} mm가 허용 상한 {params.divergence_gate} mm를 넘었습니다.")

    result = IcpResult(transform=current, rms_history=[rms])
    for iteration in range(1, params.max_iters + 1):
        moved = current.apply(points)
        rotation, translation = best_fit_rotation(moved[kept], matches.points[kept])
        step = RigidTransform(rotation, translation, init.to_frame, init.to_frame)
        candidate = step.compose(current)
        candidate_matches = target_index.closest_points(candidate.apply(points))
        candidate_kept = _kept(candidate_matches.distances, params.trim_fraction)
        candidate_rms = _rms(candidate_matches.distances[candidate_kept])
        result.iterations = iteration

        if candidate_rms > rms:
            # 부동소수 오차로 RMS가 늘어나면 이전 변환을 유지합니다.
            result.converged = True
            break
        improvement = rms - candidate_rms
        current, matches, kept, rms = candidate, candidate_matches, candidate_kept, candidate_rms
        result.transform = current
        result.rms_history.append(rms)
        logger.debug("ICP 반복 %d: rms=%.6f mm", iteration, rms)
        if improvement < params.rms_tol:
            result.converged = True
            break

    logger.info(
        "ICP 종료: 반복 %d회, rms %.4f -> %.4f mm, 수렴=%s",
        result.iterations, result.rms_history[0], result.final_rms, result.converged)
    return result
