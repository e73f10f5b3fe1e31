"""공구 끝점 피벗 보정

classes:
    PivotSolution: 공구 끝점 오프셋, 피벗 점, 잔차

functions:
    pivot_calibrate: 고정 핀에 공구 끝을 댄 자세들로 끝점 오프셋을 구함
    load_pose_samples: 한 줄에 3x4 행 우선 행렬 12개 값인 자세 파일 읽기
    pose_from_values: 행렬 값 12개를 ee→base 자세로 변환
    save_pivot_solution: 보정 결과 텍스트 저장
    synthetic_pivot_poses: 고정 핀 주위의 합성 자세 생성
"""
from typing import Sequence

import numpy as np
from scipy.spatial.transform import Rotation

from ..customerror import FrameMismatchError, InsufficientDiversityError, MeshIoError, ParseError
from ..registration import RigidTransform
from ..settings import FRAME_BASE, FRAME_EE, PIVOT_MIN_SINGULAR_VALUE, logger

_OUTLIER_SIGMAS = 2.0
_POSE_ROTATION_TOLERANCE = 1e-4


class PivotSolution:
    """피벗 보정 결과

    Attributes:
        tip_offset (np.ndarray): ee 좌표계의 공구 끝점 위치 (mm)
        pivot_point (np.ndarray): base 좌표계의 고정 핀 위치 (mm)
        residual_rms (float): ‖R_i·tip + p_i − pivot‖의 RMS (mm)
        residuals (np.ndarray): 사용한 자세마다의 잔차 (mm)
        rejected (list[int]): 이상치로 제외한 자세 번호
    """

    def __init__(self, tip_offset, pivot_point, residuals, rejected: Sequence[int] = ()):
        self.tip_offset = np.asarray(tip_offset, dtype=np.float64).reshape(3)
        self.pivot_point = np.asarray(pivot_point, dtype=np.float64).reshape(3)
        self.residuals = np.asarray(residuals, dtype=np.float64).reshape(-1)
        self.residual_rms = float(np.sqrt(np.mean(self.residuals ** 2))) if len(self.residuals) else 0.0
        self.rejected = [int(index) for index in rejected]

    @property
    def n_used(self) -> int:
        return len(self.residuals)

    def to_dict(self) -> dict:
        return {
            "tip_offset": self.tip_offset.tolist(),
            "pivot_point": self.pivot_point.tolist(),
            "residual_rms": self.residual_rms,
            "n_used": self.n_used,
            "rejected": list(self.rejected),
        }

    def to_text(self) -> str:
        """사람이 읽는 요약과 [pivot] key=value 블록"""

        def vector(values):
            return " ".join(f"{value:.17g}" for value in values)

        rejected = ",".join(str(index) for index in self.rejected) or "-"
        lines = [
            "# pivot calibration",
            f"# tip offset (ee, mm): {self.tip_offset[0]:.4f} {self.tip_offset[1]:.4f} {self.tip_offset[2]:.4f}",
            f"# pivot point (base, mm): "
            f"{self.pivot_point[0]:.4f} {self.pivot_point[1]:.4f} {self.pivot_point[2]:.4f}",
            f"# residual rms (mm): {self.residual_rms:.4f} over {self.n_used} poses",
            "[pivot]",
            f"tip_offset={vector(self.tip_offset)}",
            f"pivot_point={vector(self.pivot_point)}",
            f"residual_rms={self.residual_rms:.17g}",
            f"n_used={self.n_used}",
            f"rejected={rejected}",
        ]
        return "\n".join(lines) + "\n"

    def __repr__(self):
        return (f"PivotSolution(tip_offset={self.tip_offset.tolist()}, "
                f"residual_rms={self.residual_rms:.4g}, n_used={self.n_used})")


def _solve(rotations: np.ndarray, positions: np.ndarray):
    count = len(rotations)
    system = np.zeros((3 * count, 6))
    system[:, :3] = rotations.reshape(3 * count, 3)
    system[:, 3:] = np.tile(-np.eye(3), (count, 1))
    target = -positions.reshape(-1)

    singular = np.linalg.svd(system, compute_uv=False)
    if singular[-1] < PIVOT_MIN_SINGULAR_VALUE:
        raise InsufficientDiversityError(
            f"자세들의 회전이 충분히 다양하지 않습니다 (최소 특이값 {singular[-1]:.3g}).")
    solution = np.linalg.lstsq(system, target, rcond=None)[0]
    tip, pivot = solution[:3], solution[3:]
    residuals = np.linalg.norm(rotations @ tip + positions - pivot, axis=1)
    return tip, pivot, residuals


def pivot_calibrate(samples: Sequence[RigidTransform], reject_outliers: bool = False) -> PivotSolution:
    """고정 핀에 공구 끝을 댄 ee→base 자세들로 공구 끝점 오프셋을 구합니다.

    모든 자세에 대해 [R_i | −I]·[tip; pivot] = −p_i 를 쌓은 선형 최소제곱 문제를 풉니다.
    reject_outliers가 참이면 잔차가 평균 + 2σ를 넘는 자세를 한 번 제외하고 다시 풉니다.

    Args:
        samples (Sequence[RigidTransform]): ee→base 자세 목록
        reject_outliers (bool): 이상치 제외 후 재계산 여부

    Returns:
        PivotSolution: 끝점 오프셋(ee), 피벗 점(base), 잔차

    Raises:
        InsufficientDiversityError: 자세가 3개 미만이거나 회전이 다양하지 않은 경우
        FrameMismatchError: ee→base가 아닌 변환이 섞여 있는 경우
    """
    samples = list(samples)
    if len(samples) < 3:
        raise InsufficientDiversityError(f"피벗 보정에는 최소 3개의 자세가 필요합니다. 입력: {len(samples)}개")
    for sample in samples:
        if (sample.from_frame, sample.to_frame) not in ((FRAME_EE, FRAME_BASE), (None, None)):
            raise FrameMismatchError(
                f"피벗 보정 자세는 ee->base 변환이어야 합니다: {sample.from_frame}->{sample.to_frame}")

    rotations = np.stack([sample.rotation for sample in samples])
    positions = np.stack([sample.translation for sample in samples])
    tip, pivot, residuals = _solve(rotations, positions)

    rejected = []
    if reject_outliers:
        limit = residuals.mean() + _OUTLIER_SIGMAS * residuals.std()
        keep = residuals <= limit
        if not keep.all() and keep.sum() >= 3:
            rejected = np.flatnonzero(~keep).tolist()
            tip, pivot, residuals = _solve(rotations[keep], positions[keep])
            logger.warning("피벗 보정: 이상치 자세 %d개 제외 (%s)", len(rejected), rejected)

    solution = PivotSolution(tip, pivot, residuals, rejected)
    logger.info("피벗 보정: 자세 %d개, 끝점 오프셋 %s, 잔차 RMS %.4f mm",
                solution.n_used, np.round(solution.tip_offset, 4).tolist(), solution.residual_rms)
    return solution


def pose_from_values(values: Sequence[float], where: str = "자세") -> RigidTransform:
    """3x4 행 우선 행렬 값 12개를 ee→base 자세로 바꿉니다.

    Raises:
        ParseError: 값이 12개가 아니거나 회전 부분이 직교 행렬에서 1e-4 넘게 벗어난 경우
    """
    if len(values) != 12:
        raise ParseError(f"{where}에는 3x4 행렬 값 12개가 필요합니다 (입력 {len(values)}개).")
    matrix = np.asarray(values, dtype=np.float64).reshape(3, 4)
    if not np.all(np.isfinite(matrix)):
        raise ParseError(f"{where}에 유한하지 않은 값이 있습니다.")
    if np.max(np.abs(matrix[:, :3].T @ matrix[:, :3] - np.eye(3))) > _POSE_ROTATION_TOLERANCE:
        raise ParseError(f"{where}의 회전 행렬이 직교 행렬이 아닙니다.")
    # 반올림된 값은 가장 가까운 회전 행렬로 되돌림
    u, _, vt = np.linalg.svd(matrix[:, :3])
    return RigidTransform(u @ vt, matrix[:, 3], FRAME_EE, FRAME_BASE)


def parse_pose_samples(text: str) -> list[RigidTransform]:
    poses = []
    for number, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        try:
            values = [float(value) for value in line.replace(",", " ").split()]
        except ValueError as error:
            raise ParseError(f"{number}번째 줄의 자세 값을 읽을 수 없습니다: {line}") from error
        poses.append(pose_from_values(values, f"{number}번째 줄"))
    if not poses:
        raise ParseError("자세가 하나도 없습니다.")
    return poses


def load_pose_samples(path: str) -> list[RigidTransform]:
    """한 줄에 3x4 행 우선 행렬(12개 값, mm)인 ee→base 자세 파일을 읽습니다."""
    try:
        with open(path, "r", encoding="utf-8") as file:
            return parse_pose_samples(file.read())
    except OSError as error:
        raise MeshIoError(f"자세 파일을 읽을 수 없습니다: {path} ({error})") from error


def save_pose_samples(poses: Sequence[RigidTransform], path: str):
    lines = [" ".join(f"{value:.17g}" for value in pose.matrix[:3].reshape(-1)) for pose in poses]
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as file:
            file.write("\n".join(lines) + "\n")
    except OSError as error:
        raise MeshIoError(f"자세 파일을 쓸 수 없습니다: {path} ({error})") from error


def save_pivot_solution(solution: PivotSolution, path: str):
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as file:
            file.write(solution.to_text())
    except OSError as error:
        raise MeshIoError(f"피벗 보정 결과를 쓸 수 없습니다: {path} ({error})") from error


def synthetic_pivot_poses(
        tip_offset,
        pivot_point,
        count: int,
        rng: np.random.Generator,
        min_angle: float = 10.0,
        max_angle: float = 40.0,
        sigma: float = 0.0) -> list[RigidTransform]:
    """고정 핀 주위로 공구를 기울인 ee→base 자세를 만듭니다.

    회전축은 무작위, 회전각은 [min_angle, max_angle]도에서 고르고, 위치에는 표준편차 sigma의
    등방성 잡음을 더합니다.
    """
    tip_offset = np.asarray(tip_offset, dtype=np.float64)
    pivot_point = np.asarray(pivot_point, dtype=np.float64)
    axes = rng.normal(size=(count, 3))
    axes /= np.linalg.norm(axes, axis=1)[:, None]
    angles = np.radians(rng.uniform(min_angle, max_angle, count))
    rotations = Rotation.from_rotvec(axes * angles[:, None]).as_matrix()
    positions = pivot_point - rotations @ tip_offset + rng.normal(scale=sigma, size=(count, 3))
    return [RigidTransform(rotation, position, FRAME_EE, FRAME_BASE)
            for rotation, position in zip(rotations, positions)]
