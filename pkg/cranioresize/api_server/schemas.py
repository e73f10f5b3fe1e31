"""API 요청과 응답 모델"""
from typing import Annotated, Union

from pydantic import BaseModel, Field

from ..evaluation import SpecimenParams

Pose = Annotated[list[float], Field(min_length=12, max_length=12)]
Point = Annotated[list[float], Field(min_length=3, max_length=3)]


class PivotRequest(BaseModel):
    """피벗 보정 요청

    Attributes:
        poses (list[list[float]]): ee→base 자세, 각 자세는 3x4 행 우선 행렬 값 12개 (mm)
        reject_outliers (bool): 이상치 자세를 한 번 제외하고 다시 풀지 여부
    """
    poses: list[Pose] = Field(..., min_length=1)
    reject_outliers: bool = False


class PivotResponse(BaseModel):
    tip_offset: list[float]
    pivot_point: list[float]
    residual_rms: float
    n_used: int
    rejected: list[int]


class LocalizeRequest(BaseModel):
    """임플란트 위치 추정 요청. 두 마커 목록은 같은 순서로 대응합니다."""
    markers_base: list[Point] = Field(..., min_length=1)
    markers_ct: list[Point] = Field(..., min_length=1)


class LocalizeResponse(BaseModel):
    matrix: list[list[float]]
    fiducial_registration_error: float


class SpecimenRequest(BaseModel):
    """합성 시편 평가 요청

    Attributes:
        seed (int): 시편과 파이프라인 시드
        params (SpecimenParams): 시편 파라미터
        settings (dict): 경로를 제외한 파이프라인 설정 덮어쓰기 (예: {"tool_radius": 2.5})
    """
    seed: int = Field(0, ge=0)
    params: SpecimenParams = Field(default_factory=SpecimenParams)
    settings: dict[str, Union[bool, int, float, str]] = Field(default_factory=dict)


class GapSummary(BaseModel):
    seed: int
    count: int
    max_abs_gap: float
    mean_abs_gap: float
    std_abs_gap: float
    min_signed_gap: float
    max_signed_gap: float
    requires_trimming: bool
    icp_rms: float
