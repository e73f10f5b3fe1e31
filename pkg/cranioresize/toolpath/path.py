"""공구 반경 보정과 일정 경사각을 적용한 툴패스 생성

classes:
    ToolParams: 공구 반경, 경사각, 절삭 깊이
    Toolpath: 웨이포인트 (X_i, V_i) 목록과 불변 조건 검사

functions:
    generate_toolpath: 스플라인에서 툴패스 생성
    transform_toolpath: 강체 변환으로 툴패스를 다른 좌표계로 옮김
"""
from typing import Optional

import numpy as np
from pydantic import BaseModel, Field
from shapely.geometry import LinearRing

from ..contour import PlaneFrame
from ..customerror import (
    CenterOnCurveError, DegenerateTangentError, FrameMismatchError, InvalidParamsError)
from ..registration import RigidTransform
from ..settings import CUT_DEPTH, TILT_ANGLE_DEG, TOOL_RADIUS, TOOLPATH_STEP, logger
from ..validation import validate_positive
from .spline import SplineCurve

OFFSET_MODES = ("normal", "radial")
_MAX_REFINEMENTS = 8


class ToolParams(BaseModel):
    """절삭 공구 파라미터

    Attributes:
        tool_radius (float): 공구 반경 (mm)
        tilt_angle (float): n_o에서 기울인 공구축 각도 (도, 0~45)
        cut_depth (float): 절삭 깊이 (mm)
    """
    tool_radius: float = Field(TOOL_RADIUS, gt=0)
    tilt_angle: float = Field(TILT_ANGLE_DEG, ge=0, le=45)
    cut_depth: float = Field(CUT_DEPTH, gt=0)


class Toolpath:
    """순서 있는 절삭 웨이포인트 목록

    Attributes:
        positions (np.ndarray): (n, 3) 공구 중심 경로 X_i (mm)
        axes (np.ndarray): (n, 3) 단위 공구축 V_i, 공구 홀더 쪽을 향합니다.
        contour (np.ndarray | None): (n, 3) 보정 전 윤곽 점 P_i
        tool (ToolParams): 공구 파라미터
        frame (str | None): 좌표계 이름
        plane_normal (np.ndarray): 윤곽 평면 법선 n_o
        center (np.ndarray): 윤곽 중심 O_c
        step (float): 웨이포인트 사이 최대 간격 (mm)
        tolerance (float): 불변 조건 검사 허용오차
    """

    def __init__(
            self,
            positions,
            axes,
            tool: ToolParams,
            plane_normal,
            center,
            step: float,
            frame: Optional[str] = None,
            contour=None,
            tolerance: float = 1e-9):
        self.positions = np.asarray(positions, dtype=np.float64).reshape(-1, 3)
        self.axes = np.asarray(axes, dtype=np.float64).reshape(-1, 3)
        self.contour = None if contour is None else np.asarray(contour, dtype=np.float64).reshape(-1, 3)
        self.tool = tool
        self.plane_normal = np.asarray(plane_normal, dtype=np.float64).reshape(3)
        self.center = np.asarray(center, dtype=np.float64).reshape(3)
        self.step = float(step)
        self.frame = frame
        self.tolerance = tolerance
        self._check()

    def _check(self):
        if self.positions.shape != self.axes.shape:
            raise InvalidParamsError("웨이포인트 위치와 공구축 개수가 다릅니다.")
        if not len(self):
            return
        if np.any(np.abs(np.linalg.norm(self.axes, axis=1) - 1.0) > self.tolerance):
            raise InvalidParamsError("공구축 벡터는 단위 벡터여야 합니다.")
        cosine = np.clip(self.axes @ self.plane_normal, -1.0, 1.0)
        tilt = np.arccos(cosine)
        if np.any(np.abs(tilt - np.radians(self.tool.tilt_angle)) > max(1e-6, self.tolerance)):
            raise InvalidParamsError("공구축과 평면 법선 사이 각도가 경사각과 다릅니다.")
        if np.max(self.spacing(), initial=0.0) > self.step + self.tolerance:
            raise InvalidParamsError(f"웨이포인트 간격이 {self.step} mm를 넘습니다.")

    def __len__(self):
        return len(self.positions)

    def spacing(self) -> np.ndarray:
        """닫는 구간을 포함한 연속 웨이포인트 사이 거리"""
        if len(self) < 2:
            return np.zeros(0)
        return np.linalg.norm(np.roll(self.positions, -1, axis=0) - self.positions, axis=1)

    def tilt_angles(self) -> np.ndarray:
        """웨이포인트마다 acos(V_i·n_o) (라디안)"""
        return np.arccos(np.clip(self.axes @ self.plane_normal, -1.0, 1.0))

    def __repr__(self):
        return f"Toolpath(waypoints={len(self)}, frame={self.frame!r}, tool={self.tool!r})"


def _unit_in_plane(vectors: np.ndarray, normal: np.ndarray):
    in_plane = vectors - np.outer(vectors @ normal, normal)
    return in_plane, np.linalg.norm(in_plane, axis=1)


def _waypoints(spline: SplineCurve, frame: PlaneFrame, tool: ToolParams, count: int, offset_mode: str):
    parameters = spline.uniform_parameters(count)
    points = spline(parameters)
    tangents = spline.derivative(parameters)
    # n_o에서 내려다볼 때 반시계 방향으로 맞춤
    if not LinearRing(frame.in_plane(points)).is_ccw:
        points, tangents = points[::-1], -tangents[::-1]

    normal = frame.normal
    tangent, tangent_length = _unit_in_plane(tangents, normal)
    if np.any(tangent_length < 1e-12):
        raise DegenerateTangentError("평면 내 접선 길이가 0인 곡선 점이 있습니다.")
    tangent /= tangent_length[:, None]

    radial, radial_length = _unit_in_plane(points - frame.origin, normal)
    if np.any(radial_length < 1e-9):
        raise CenterOnCurveError("곡선 점이 중심점 O_c와 겹칩니다.")
    radial /= radial_length[:, None]

    alpha = np.radians(tool.tilt_angle)
    axes = np.cos(alpha) * normal + np.sin(alpha) * radial
    offset = np.cross(tangent, normal) if offset_mode == "normal" else radial
    return points, points + tool.tool_radius * offset, axes


def generate_toolpath(
        spline: SplineCurve,
        frame: PlaneFrame,
        tool: Optional[ToolParams] = None,
        step: float = TOOLPATH_STEP,
        offset_mode: str = "normal") -> Toolpath:
    """윤곽 스플라인을 공구 반경 보정된 툴패스로 바꿉니다.

    곡선을 호 길이 등간격 점 P_i로 나누고, t_i = P_i − O_c의 평면 성분 방향으로 공구축을
    n_o에서 tilt_angle만큼 기울여 V_i를 만듭니다. X_i는 P_i를 곡선의 바깥쪽 평면 내 법선
    (radial 모드에서는 t_i 방향)으로 공구 반경만큼 옮긴 점입니다. 웨이포인트는 n_o를 기준으로
    반시계 방향으로 정렬되며, 닫는 구간을 포함한 X_i 간격이 step 이하가 될 때까지 점 개수를 늘립니다.

    Args:
        spline (SplineCurve): 투영된 윤곽 스플라인
        frame (PlaneFrame): 윤곽 평면 좌표계
        tool (ToolParams, optional): 공구 파라미터
        step (float): 웨이포인트 최대 간격 (mm)
        offset_mode (str): "normal" 또는 "radial"

    Returns:
        Toolpath: frame.frame 좌표계의 툴패스

    Raises:
        DegenerateTangentError: 평면 내 접선이 0인 경우
        CenterOnCurveError: 곡선 점이 O_c와 겹치는 경우
    """
    tool = tool or ToolParams()
    validate_positive(step, names=("step",))
    if offset_mode not in OFFSET_MODES:
        raise InvalidParamsError(f"지원하지 않는 보정 방식입니다: {offset_mode}")

    count = max(8, int(np.ceil(spline.length() / step)) + 1)
    for _ in range(_MAX_REFINEMENTS):
        contour, positions, axes = _waypoints(spline, frame, tool, count, offset_mode)
        chords = np.linalg.norm(np.roll(positions, -1, axis=0) - positions, axis=1)
        if chords.max() <= step:
            break
        count = int(np.ceil(count * chords.max() / step * 1.02)) + 1
    else:
        raise DegenerateTangentError(f"웨이포인트 간격을 {step} mm 이하로 줄이지 못했습니다.")

    logger.info("툴패스 생성: 웨이포인트 %d개, 공구 반경 %.2f mm, 경사각 %.1f°, 최대 간격 %.4f mm",
                count, tool.tool_radius, tool.tilt_angle, float(chords.max()))
    return Toolpath(positions, axes, tool, frame.normal, frame.origin, step, frame.frame, contour)


def transform_toolpath(toolpath: Toolpath, transform: RigidTransform) -> Toolpath:
    """X_i ← T·X_i, V_i ← R·V_i 로 툴패스를 옮깁니다.

    Raises:
        FrameMismatchError: transform.from_frame이 툴패스 좌표계와 다른 경우
    """
    if transform.from_frame != toolpath.frame:
        raise FrameMismatchError(
            f"툴패스 좌표계({toolpath.frame})와 변환의 원본 좌표계({transform.from_frame})가 다릅니다.")
    contour = None if toolpath.contour is None else transform.apply(toolpath.contour)
    return Toolpath(
        transform.apply(toolpath.positions),
        transform.apply_vectors(toolpath.axes),
        toolpath.tool,
        transform.apply_vectors(toolpath.plane_normal),
        transform.apply(toolpath.center),
        toolpath.step,
        transform.to_frame,
        contour,
        max(toolpath.tolerance, 1e-9),
    )
