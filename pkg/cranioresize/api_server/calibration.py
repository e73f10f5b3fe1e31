"""로봇 보정 API

피벗 보정과 마커 기반 임플란트 위치 추정을 담당합니다.
"""
from fastapi import APIRouter

from ..calibration import localize_implant, pivot_calibrate, pose_from_values
from ..registration import LandmarkSet
from ..settings import FRAME_BASE, FRAME_CT, logger
from .schemas import LocalizeRequest, LocalizeResponse, PivotRequest, PivotResponse

calibration_api = APIRouter(prefix="/calibration")


@calibration_api.post("/pivot", response_model=PivotResponse)
def pivot(request: PivotRequest):
    """고정 핀에 공구 끝을 댄 자세들로 공구 끝점 오프셋을 구합니다."""
    poses = [pose_from_values(values, f"{index}번째 자세") for index, values in enumerate(request.poses)]
    solution = pivot_calibrate(poses, request.reject_outliers)
    logger.info("피벗 보정 요청 처리: 자세 %d개", len(poses))
    return solution.to_dict()


@calibration_api.post("/localize", response_model=LocalizeResponse)
def localize(request: LocalizeRequest):
    """CT 좌표계와 base 좌표계 마커로 CT→base 변환을 구합니다.

    마커 개수가 다르거나 3개 미만이면 422를 반환합니다.
    """
    markers_base = LandmarkSet(request.markers_base, frame=FRAME_BASE)
    markers_ct = LandmarkSet(request.markers_ct, frame=FRAME_CT)
    result = localize_implant(markers_base, markers_ct)
    return {
        "matrix": result.transform.matrix.tolist(),
        "fiducial_registration_error": result.fiducial_registration_error,
    }
