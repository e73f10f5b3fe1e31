"""닫힌 3차 스플라인 변환과 임플란트 윗면 투영

classes:
    SplineCurve: 현 길이 매개변수의 주기 3차 보간 스플라인

functions:
    fit_spline: 닫힌 폴리라인에서 등간격 제어점을 골라 스플라인 생성
    project_spline_to_surface: 제어점을 임플란트 윗면으로 옮긴 스플라인 생성
"""
from typing import Optional

import numpy as np
from scipy.interpolate import CubicSpline

from ..contour import PlaneFrame
from ..customerror import InvalidParamsError, ProjectionMissError, TooFewPointsError
from ..meshcore import SpatialIndex, TriangleMesh
from ..settings import PROJECTION_GATE, SPLINE_CONTROL_POINTS, logger
from ..validation import validate_points

PROJECTION_MODES = ("ray", "closest")
_DENSE_FACTOR = 32


class SplineCurve:
    """제어점을 지나는 닫힌 3차 스플라인

    매개변수는 제어점 사이 현 길이의 누적값이고, 마지막 제어점 다음에 첫 제어점을 다시 이어
    scipy CubicSpline의 periodic 경계 조건으로 위치와 1, 2차 미분이 이어지게 만듭니다.

    Attributes:
        control_points (np.ndarray): (k, 3) 제어점
        frame (PlaneFrame | None): 윤곽 평면 좌표계
        knots (np.ndarray): 제어점의 매개변수 값, 길이 k+1 (마지막 값이 주기)
    """

    def __init__(self, control_points, frame: Optional[PlaneFrame] = None):
        points = validate_points(control_points, name="제어점", min_count=1, exception_type=TooFewPointsError)
        if len(points) < 4:
            raise TooFewPointsError(f"닫힌 스플라인에는 최소 4개의 제어점이 필요합니다. 입력: {len(points)}개")
        closed = np.vstack([points, points[:1]])
        chords = np.linalg.norm(np.diff(closed, axis=0), axis=1)
        if np.any(chords <= 0):
            raise TooFewPointsError("연속한 제어점이 겹쳐 있습니다.")
        self.control_points = points
        self.frame = frame
        self.knots = np.concatenate([[0.0], np.cumsum(chords)])
        self._spline = CubicSpline(self.knots, closed, bc_type="periodic")

    @property
    def period(self) -> float:
        return float(self.knots[-1])

    def __call__(self, s) -> np.ndarray:
        return self._spline(np.mod(np.asarray(s, dtype=np.float64), self.period))

    def derivative(self, s) -> np.ndarray:
        return self._spline(np.mod(np.asarray(s, dtype=np.float64), self.period), 1)

    def _dense(self):
        s = np.linspace(0.0, self.period, _DENSE_FACTOR * len(self.control_points) + 1)
        points = self(s)
        lengths = np.concatenate([[0.0], np.cumsum(np.linalg.norm(np.diff(points, axis=0), axis=1))])
        return s, lengths

    def length(self) -> float:
        """조밀한 표본 폴리라인으로 구한 곡선 길이"""
        return float(self._dense()[1][-1])

    def uniform_parameters(self, n: int) -> np.ndarray:
        """호 길이 기준으로 n등분한 지점의 매개변수 (닫는 점 제외)"""
        s, lengths = self._dense()
        targets = lengths[-1] * np.arange(n) / n
        return np.interp(targets, lengths, s)

    def sample_uniform(self, n: int) -> np.ndarray:
        return self(self.uniform_parameters(n))

    def with_control_points(self, control_points) -> "SplineCurve":
        return SplineCurve(control_points, self.frame)

    def __repr__(self):
        return f"SplineCurve(control_points={len(self.control_points)}, length={self.length():.3f})"


def _resample_polyline(points: np.ndarray, count: int) -> np.ndarray:
    closed = np.vstack([points, points[:1]])
    lengths = np.concatenate([[0.0], np.cumsum(np.linalg.norm(np.diff(closed, axis=0), axis=1))])
    targets = lengths[-1] * np.arange(count) / count
    return np.stack([np.interp(targets, lengths, closed[:, axis]) for axis in range(3)], axis=1)


def fit_spline(points, n_ctrl: int = SPLINE_CONTROL_POINTS, frame: Optional[PlaneFrame] = None) -> SplineCurve:
    """닫힌 폴리라인을 따라 호 길이 등간격으로 n_ctrl개의 제어점을 골라 스플라인을 만듭니다.

    n_ctrl이 점 개수와 같으면 입력 점을 그대로 제어점으로 씁니다.
    마지막 점이 첫 점과 같으면 닫는 점으로 보고 버립니다.

    Raises:
        TooFewPointsError: n_ctrl < 4 이거나 입력 점이 4개 미만인 경우
    """
    points = validate_points(points, name="곡선 점", min_count=0, exception_type=TooFewPointsError)
    if len(points) > 1 and np.allclose(points[0], points[-1], rtol=0.0, atol=1e-12):
        points = points[:-1]
    if n_ctrl < 4 or len(points) < 4:
        raise TooFewPointsError(f"스플라인에는 최소 4개의 제어점이 필요합니다. n_ctrl={n_ctrl}, 점 {len(points)}개")
    control = points if n_ctrl == len(points) else _resample_polyline(points, n_ctrl)
    return SplineCurve(control, frame)


def project_spline_to_surface(
        spline: SplineCurve,
        implant: TriangleMesh,
        frame: PlaneFrame,
        mode: str = "ray",
        gate: float = PROJECTION_GATE,
        index: Optional[SpatialIndex] = None) -> SplineCurve:
    """제어점을 임플란트 윗면으로 옮긴 뒤 스플라인을 다시 만듭니다.

    ray 방식은 −n_o 방향 광선, 실패하면 +n_o 방향 광선을 쏘아 윗면(면 법선·n_o > 0)에서
    가장 먼저 만나는 점을 씁니다. 둘 다 실패하면 gate 이내의 표면 최근접점을 경고와 함께 씁니다.
    closest 방식은 처음부터 최근접점만 씁니다.

    Args:
        spline (SplineCurve): 윤곽 스플라인 (CT 좌표)
        implant (TriangleMesh): CT 좌표의 임플란트 메쉬
        frame (PlaneFrame): 윤곽 평면 좌표계
        mode (str): "ray" 또는 "closest"
        gate (float): 최근접점 대체를 허용하는 최대 거리 (mm)
        index (SpatialIndex, optional): 미리 만든 임플란트 공간 색인

    Raises:
        ProjectionMissError: 어떤 방법으로도 gate 이내의 표면 점을 찾지 못한 경우
    """
    if mode not in PROJECTION_MODES:
        raise InvalidParamsError(f"지원하지 않는 투영 방식입니다: {mode}")
    index = index or SpatialIndex(implant)
    top = implant.face_normals @ frame.normal > 0

    moved = []
    fallbacks = 0
    for number, point in enumerate(spline.control_points):
        target = None
        if mode == "ray":
            for direction in (-frame.normal, frame.normal):
                hits = index.ray_hits(point, direction, top)
                if len(hits.t):
                    target = hits.points[0]
                    break
        if target is None:
            closest, _, distance = index.closest_point(point)
            if distance > gate:
                raise ProjectionMissError(
                    f"{number}번 제어점이 임플란트 표면에서 {distance:.3f} mm 떨어져 있어 투영할 수 없습니다.")
            target = closest
            fallbacks += mode == "ray"
        moved.append(target)

    if fallbacks:
        logger.warning("광선 투영에 실패한 제어점 %d개를 최근접점으로 옮겼습니다.", fallbacks)
    moved = np.asarray(moved)
    logger.info("스플라인 투영: 제어점 %d개, 최대 이동 %.4f mm",
                len(moved), float(np.linalg.norm(moved - spline.control_points, axis=1).max()))
    return SplineCurve(moved, frame)
