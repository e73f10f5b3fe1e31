"""TCP 변환 연결과 마커 기반 임플란트 위치 추정"""
from typing import NamedTuple, Optional, Sequence

import numpy as np

from ..customerror import FrameMismatchError
from ..registration import LandmarkSet, RigidTransform, fiducial_registration_error, register_points_svd
from ..settings import FRAME_BASE, FRAME_CT, FRAME_EE, FRAME_TCP, logger
from ..validation import validate_vector


def tcp_transform(tip_offset, tool_rotation=None) -> RigidTransform:
    """TCP→ee 변환. 회전을 따로 보정하지 않았다면 단위 회전입니다."""
    tip_offset = validate_vector(tip_offset, name="tip_offset")
    rotation = np.eye(3) if tool_rotation is None else tool_rotation
    return RigidTransform(rotation, tip_offset, FRAME_TCP, FRAME_EE)


def compose_tcp(pose: RigidTransform, tip_offset, tool_rotation=None) -> RigidTransform:
    """ᴮᵃˢᵉT_TCP = ᴮᵃˢᵉT_ee · ᵉᵉT_TCP

    Args:
        pose (RigidTransform): ee→base 자세
        tip_offset: ee 좌표계의 공구 끝점 (mm)
        tool_rotation (np.ndarray, optional): 외부에서 보정한 공구축 회전

    Raises:
        FrameMismatchError: pose가 ee 좌표계에서 출발하지 않는 경우
    """
    if pose.from_frame != FRAME_EE:
        raise FrameMismatchError(f"TCP를 연결하려면 ee->base 자세가 필요합니다: {pose.from_frame}->{pose.to_frame}")
    return pose.compose(tcp_transform(tip_offset, tool_rotation))


def touch_points(poses: Sequence[RigidTransform], tip_offset, frame: Optional[str] = FRAME_BASE) -> LandmarkSet:
    """마커에 공구 끝을 댄 자세들에서 base 좌표계 끝점 위치를 구합니다."""
    tip_offset = validate_vector(tip_offset, name="tip_offset")
    points = [compose_tcp(pose, tip_offset).translation for pose in poses]
    return LandmarkSet(points, [f"m{index}" for index in range(len(points))], frame)


class Localization(NamedTuple):
    """임플란트 위치 추정 결과

    Attributes:
        transform (RigidTransform): CT→base 변환
        fiducial_registration_error (float): 정합 후 마커 평균 거리 (mm)
    """
    transform: RigidTransform
    fiducial_registration_error: float


def localize_implant(markers_base: LandmarkSet, markers_ct: LandmarkSet) -> Localization:
    """CT 좌표계 마커와 로봇으로 측정한 base 좌표계 마커를 정합해 CT→base 변환과 기준점 정합 오차를 구합니다.

    Raises:
        CountMismatchError: 마커 개수가 다른 경우
        DegenerateConfigurationError: 마커가 3개 미만이거나 한 직선 위에 있는 경우
    """
    markers_ct = LandmarkSet(markers_ct.points, markers_ct.labels, markers_ct.frame or FRAME_CT)
    markers_base = LandmarkSet(markers_base.points, markers_base.labels, markers_base.frame or FRAME_BASE)
    transform = register_points_svd(markers_ct, markers_base)
    error = fiducial_registration_error(transform, markers_ct, markers_base)
    logger.info("임플란트 위치 추정: 마커 %d개, 기준점 정합 오차 %.4f mm", len(markers_ct), error)
    return Localization(transform, error)
