"""닫힌 극좌표 곡선 r(θ), h(θ)의 삼각 다항식 최소제곱 맞춤

r(θ) = a₀ + Σ_{k≤D} (a_k cos kθ + b_k sin kθ) 이고 h(θ)도 같은 기저를 씁니다.
기저가 2π 주기이므로 곡선은 구조적으로 닫혀 있고, 맞춤은 계수에 대한 선형 최소제곱이 됩니다.
"""
from typing import Optional

import numpy as np

from ..customerror import (
    InsufficientCoverageError, MeshIoError, NonPositiveRadiusError, ParseError, RankDeficientError)
from ..settings import FIT_DEGREE, RADIUS_CHECK_SAMPLES, THETA_GAP_LIMIT_DEG, logger
from .frame import CylindricalCoordinates, PlaneFrame


def fourier_basis(theta, degree: int) -> np.ndarray:
    """열 순서가 [1, cos θ, sin θ, cos 2θ, sin 2θ, ...]인 (n, 2D+1) 기저 행렬"""
    theta = np.asarray(theta, dtype=np.float64).reshape(-1)
    columns = [np.ones_like(theta)]
    for k in range(1, degree + 1):
        columns += [np.cos(k * theta), np.sin(k * theta)]
    return np.stack(columns, axis=1)


class PolarCurveModel:
    """PlaneFrame 위에 정의된 닫힌 극좌표 곡선

    Attributes:
        r_coefficients (np.ndarray): 길이 2D+1, [a₀, a₁, b₁, a₂, b₂, ...]
        h_coefficients (np.ndarray): h(θ)의 같은 형식 계수
        frame (PlaneFrame): 소유 좌표계
        residual_rms (float): 맞춤 잔차 RMS (mm)
    """

    def __init__(self, r_coefficients, h_coefficients, frame: PlaneFrame, residual_rms: float = 0.0):
        self.r_coefficients = np.asarray(r_coefficients, dtype=np.float64).reshape(-1)
        self.h_coefficients = np.asarray(h_coefficients, dtype=np.float64).reshape(-1)
        if len(self.r_coefficients) % 2 != 1 or len(self.r_coefficients) != len(self.h_coefficients):
            raise ParseError("계수 개수는 2D+1이어야 하며 r과 h가 같아야 합니다.")
        self.frame = frame
        self.residual_rms = float(residual_rms)

    @property
    def degree(self) -> int:
        return (len(self.r_coefficients) - 1) // 2

    def harmonic(self, k: int, which: str = "r") -> tuple[float, float]:
        """k차 (cos, sin) 계수. k=0이면 (a₀, 0)"""
        coefficients = self.r_coefficients if which == "r" else self.h_coefficients
        if k == 0:
            return float(coefficients[0]), 0.0
        return float(coefficients[2 * k - 1]), float(coefficients[2 * k])

    def radius(self, theta) -> np.ndarray:
        return fourier_basis(theta, self.degree) @ self.r_coefficients

    def height(self, theta) -> np.ndarray:
        return fourier_basis(theta, self.degree) @ self.h_coefficients

    def points(self, theta) -> np.ndarray:
        theta = np.asarray(theta, dtype=np.float64).reshape(-1)
        return CylindricalCoordinates(theta, self.radius(theta), self.height(theta), self.frame).to_cartesian()

    def __repr__(self):
        return (f"PolarCurveModel(degree={self.degree}, a0={self.r_coefficients[0]:.4f}, "
                f"residual_rms={self.residual_rms:.4g})")


def _check_coverage(theta: np.ndarray):
    ordered = np.sort(theta)
    gaps = np.diff(np.concatenate([ordered, [ordered[0] + 2.0 * np.pi]]))
    largest = float(np.degrees(gaps.max()))
    if largest > THETA_GAP_LIMIT_DEG:
        raise InsufficientCoverageError(
            f"윤곽 점의 각도 간격이 {largest:.1f}°로 허용치 {THETA_GAP_LIMIT_DEG:.0f}°를 넘습니다.")


def fit_closed_polar_curve(coordinates: CylindricalCoordinates, degree: int = FIT_DEGREE) -> PolarCurveModel:
    """원통 좌표 점들에 차수 D의 닫힌 극좌표 곡선을 맞춥니다.

    Args:
        coordinates (CylindricalCoordinates): 원통 좌표 점
        degree (int): 삼각 다항식 차수 D

    Returns:
        PolarCurveModel: 맞춘 곡선 모델

    Raises:
        RankDeficientError: 점 개수가 2(2D+1)보다 적거나 기저 행렬의 랭크가 부족한 경우
        InsufficientCoverageError: θ 간격이 90°를 넘는 경우
        NonPositiveRadiusError: 4096개 표본 중 r(θ) ≤ 0 인 곳이 있는 경우
    """
    count, unknowns = len(coordinates), 2 * degree + 1
    if degree < 0 or count < 2 * unknowns:
        raise RankDeficientError(
            f"차수 {degree} 곡선에는 최소 {2 * unknowns}개의 점이 필요합니다. 입력: {count}개")
    _check_coverage(coordinates.theta)

    basis = fourier_basis(coordinates.theta, degree)
    targets = np.stack([coordinates.r, coordinates.h], axis=1)
    solution, _, rank, _ = np.linalg.lstsq(basis, targets, rcond=None)
    if rank < unknowns:
        raise RankDeficientError(f"기저 행렬의 랭크({rank})가 계수 개수({unknowns})보다 작습니다.")

    residual = basis @ solution - targets
    residual_rms = float(np.sqrt(np.mean(np.sum(residual ** 2, axis=1))))
    model = PolarCurveModel(solution[:, 0], solution[:, 1], coordinates.frame, residual_rms)

    samples = np.linspace(0.0, 2.0 * np.pi, RADIUS_CHECK_SAMPLES, endpoint=False)
    smallest = float(model.radius(samples).min())
    if smallest <= 0:
        raise NonPositiveRadiusError(f"맞춘 곡선의 반지름이 0 이하인 구간이 있습니다 (최소 {smallest:.4f} mm).")
    logger.info("극좌표 곡선 맞춤: 차수 %d, 점 %d개, a0 %.4f mm, 잔차 %.4f mm",
                degree, count, model.r_coefficients[0], residual_rms)
    return model


def sample_curve(model: PolarCurveModel, n: int) -> np.ndarray:
    """θ를 균등하게 나눈 n개의 곡선 점. n번째 점은 0번째 점과 같으므로 포함하지 않습니다."""
    if n < 3:
        raise RankDeficientError(f"곡선 표본은 최소 3개여야 합니다. 입력: {n}")
    return model.points(2.0 * np.pi * np.arange(n) / n)


def format_polar_model(model: PolarCurveModel) -> str:
    """좌표계와 계수표를 담은 텍스트 블록"""
    frame = model.frame

    def vector(values):
        return " ".join(f"{value:.17g}" for value in values)

    lines = [
        "# polar contour model",
        f"frame {frame.frame if frame.frame is not None else '-'}",
        f"origin {vector(frame.origin)}",
        f"u {vector(frame.u)}",
        f"w {vector(frame.w)}",
        f"normal {vector(frame.normal)}",
        f"degree {model.degree}",
        f"residual_rms {model.residual_rms:.17g}",
        "# k r_cos r_sin h_cos h_sin",
    ]
    for k in range(model.degree + 1):
        r_cos, r_sin = model.harmonic(k, "r")
        h_cos, h_sin = model.harmonic(k, "h")
        lines.append(f"{k} {r_cos:.17g} {r_sin:.17g} {h_cos:.17g} {h_sin:.17g}")
    return "\n".join(lines) + "\n"


def parse_polar_model(text: str) -> PolarCurveModel:
    fields, rows = {}, []
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        tokens = line.split()
        if tokens[0] in ("frame", "origin", "u", "w", "normal", "degree", "residual_rms"):
            fields[tokens[0]] = tokens[1:]
        else:
            try:
                rows.append([float(value) for value in tokens])
            except ValueError as error:
                raise ParseError(f"계수 행을 읽을 수 없습니다: {line}") from error
    try:
        frame_name = fields["frame"][0]
        frame = PlaneFrame(
            [float(v) for v in fields["origin"]], [float(v) for v in fields["normal"]],
            [float(v) for v in fields["u"]], [float(v) for v in fields["w"]],
            None if frame_name == "-" else frame_name)
        degree = int(fields["degree"][0])
        residual = float(fields["residual_rms"][0])
    except (KeyError, IndexError, ValueError) as error:
        raise ParseError(f"곡선 모델 헤더가 올바르지 않습니다: {error}") from error
    if len(rows) != degree + 1 or any(len(row) != 5 for row in rows):
        raise ParseError("계수표의 행 수가 차수와 맞지 않습니다.")

    r_coefficients, h_coefficients = [rows[0][1]], [rows[0][3]]
    for row in rows[1:]:
        r_coefficients += [row[1], row[2]]
        h_coefficients += [row[3], row[4]]
    return PolarCurveModel(r_coefficients, h_coefficients, frame, residual)


def save_polar_model(model: PolarCurveModel, path: str):
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as file:
            file.write(format_polar_model(model))
    except OSError as error:
        raise MeshIoError(f"곡선 모델 파일을 쓸 수 없습니다: {path} ({error})") from error


def load_polar_model(path: str, frame_name: Optional[str] = None) -> PolarCurveModel:
    try:
        with open(path, "r", encoding="utf-8") as file:
            model = parse_polar_model(file.read())
    except OSError as error:
        raise MeshIoError(f"곡선 모델 파일을 읽을 수 없습니다: {path} ({error})") from error
    if frame_name is not None:
        model.frame.frame = frame_name
    return model
