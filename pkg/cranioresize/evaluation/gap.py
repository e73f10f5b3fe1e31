"""임플란트 경계와 결손부 가장자리 사이의 간격 분석

classes:
    GapReport: 표본별 부호 간격과 |간격| 통계

functions:
    top_boundary_loops: 윗면(면 법선·n_o > 0.3)의 경계 루프
    loop_gaps: 한 루프를 표본화해 다른 루프까지 부호 간격 계산
    gap_analysis: 절삭된 임플란트와 결손 두개골의 간격 보고서
    save_gap_report: 텍스트 표와 CSV 저장
"""
from typing import Optional

import numpy as np
import pandas as pd
from shapely import contains_xy
from shapely.geometry import Polygon

from ..contour import PlaneFrame
from ..customerror import AmbiguousLoopsError, FrameMismatchError, MeshIoError, NoBoundaryError
from ..meshcore import TriangleMesh, boundary_loops, loop_length
from ..settings import GAP_SAMPLES, OVERHANG_TOLERANCE, logger

TOP_FACE_COSINE = 0.3
AMBIGUITY_RATIO = 0.1


class GapReport:
    """간격 분석 결과

    양수는 임플란트 경계가 결손 구멍 안쪽에 있어 생긴 틈, 음수는 구멍 밖으로 나간 돌출입니다.
    통계는 |간격|으로 계산합니다.

    Attributes:
        arc_length (np.ndarray): 표본의 임플란트 경계 위 호 길이 위치 (mm)
        gaps (np.ndarray): 표본별 부호 간격 (mm)
        points (np.ndarray): (n, 3) 표본 점
        overhang_tolerance (float): 다듬기 필요 판정 기준 (mm)
    """

    def __init__(self, arc_length, gaps, points, overhang_tolerance: float = OVERHANG_TOLERANCE):
        self.arc_length = np.asarray(arc_length, dtype=np.float64).reshape(-1)
        self.gaps = np.asarray(gaps, dtype=np.float64).reshape(-1)
        self.points = np.asarray(points, dtype=np.float64).reshape(-1, 3)
        self.overhang_tolerance = float(overhang_tolerance)

    @property
    def count(self) -> int:
        return len(self.gaps)

    @property
    def max(self) -> float:
        return float(np.abs(self.gaps).max())

    @property
    def mean(self) -> float:
        return float(np.abs(self.gaps).mean())

    @property
    def std(self) -> float:
        return float(np.abs(self.gaps).std())

    def requires_trimming(self, tolerance: Optional[float] = None) -> bool:
        """구멍 밖으로 tolerance보다 많이 나간 표본이 있으면 추가로 다듬어야 합니다."""
        tolerance = self.overhang_tolerance if tolerance is None else tolerance
        return bool(np.any(self.gaps < -tolerance))

    def summary(self) -> dict:
        return {
            "count": self.count,
            "max_abs_gap": self.max,
            "mean_abs_gap": self.mean,
            "std_abs_gap": self.std,
            "min_signed_gap": float(self.gaps.min()),
            "max_signed_gap": float(self.gaps.max()),
            "requires_trimming": self.requires_trimming(),
        }

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({
            "s": self.arc_length,
            "gap": self.gaps,
            "x": self.points[:, 0],
            "y": self.points[:, 1],
            "z": self.points[:, 2],
        })

    def to_text(self) -> str:
        summary = self.summary()
        lines = ["# gap report"]
        for key in ("count", "max_abs_gap", "mean_abs_gap", "std_abs_gap", "min_signed_gap", "max_signed_gap"):
            value = summary[key]
            lines.append(f"# {key} {value}" if key == "count" else f"# {key} {value:.6f}")
        lines.append(f"# requires_trimming {'yes' if summary['requires_trimming'] else 'no'}")
        lines.append("# s gap")
        lines += [f"{s:.6f} {gap:.6f}" for s, gap in zip(self.arc_length, self.gaps)]
        return "\n".join(lines) + "\n"

    def __repr__(self):
        return f"GapReport(count={self.count}, max={self.max:.4f}, mean={self.mean:.4f}, std={self.std:.4f})"


def save_gap_report(report: GapReport, text_path: Optional[str] = None, csv_path: Optional[str] = None):
    try:
        if text_path is not None:
            with open(text_path, "w", encoding="utf-8", newline="\n") as file:
                file.write(report.to_text())
        if csv_path is not None:
            report.to_frame().to_csv(csv_path, index=False, float_format="%.6f", lineterminator="\n")
    except OSError as error:
        raise MeshIoError(f"간격 보고서를 쓸 수 없습니다: {error}") from error


def top_boundary_loops(mesh: TriangleMesh, frame: PlaneFrame) -> list[np.ndarray]:
    """n_o 쪽을 향하는 면만 남긴 표면의 경계 루프 좌표 (긴 순서)"""
    top = mesh.face_subset(mesh.face_normals @ frame.normal > TOP_FACE_COSINE)
    return [top.vertices[loop] for loop in boundary_loops(top)]


def _perimeter(points: np.ndarray) -> float:
    return loop_length(points, np.arange(len(points)))


def _polygon(points: np.ndarray, frame: PlaneFrame) -> Polygon:
    return Polygon(frame.in_plane(points))


def _check_unique(chosen: np.ndarray, others: list[np.ndarray], name: str):
    length = _perimeter(chosen)
    for other in others:
        if other is not chosen and abs(_perimeter(other) - length) <= AMBIGUITY_RATIO * length:
            raise AmbiguousLoopsError(f"{name} 경계 후보가 둘 이상입니다 (둘레 차이 10% 이내).")


def implant_loop(implant: TriangleMesh, frame: PlaneFrame) -> np.ndarray:
    """임플란트 윗면의 가장 긴 경계 루프"""
    loops = top_boundary_loops(implant, frame)
    if not loops:
        raise NoBoundaryError("임플란트 윗면에 경계 루프가 없습니다.")
    _check_unique(loops[0], loops[1:], "임플란트")
    return loops[0]


def defect_rim_loop(defect_skull: TriangleMesh, frame: PlaneFrame) -> np.ndarray:
    """O_c를 둘러싸는 윗면 경계 루프 중 가장 짧은 것"""
    loops = top_boundary_loops(defect_skull, frame)
    center = frame.in_plane(frame.origin)
    enclosing = [loop for loop in loops if len(loop) >= 3
                 and contains_xy(_polygon(loop, frame), center[0], center[1])]
    if not enclosing:
        raise NoBoundaryError("O_c를 둘러싸는 결손부 가장자리 루프가 없습니다.")
    rim = enclosing[-1]
    _check_unique(rim, enclosing[:-1], "결손부")
    return rim


def _resample_loop(points: np.ndarray, count: int) -> tuple[np.ndarray, np.ndarray]:
    closed = np.vstack([points, points[:1]])
    lengths = np.concatenate([[0.0], np.cumsum(np.linalg.norm(np.diff(closed, axis=0), axis=1))])
    targets = lengths[-1] * np.arange(count) / count
    samples = np.stack([np.interp(targets, lengths, closed[:, axis]) for axis in range(3)], axis=1)
    return targets, samples


def _distance_to_loop(points: np.ndarray, loop: np.ndarray) -> np.ndarray:
    start = loop
    edge = np.roll(loop, -1, axis=0) - loop
    out = np.empty(len(points))
    for index, point in enumerate(points):
        relative = point - start
        t = np.clip(np.einsum("ij,ij->i", relative, edge) / np.maximum(np.einsum("ij,ij->i", edge, edge), 1e-300),
                    0.0, 1.0)
        out[index] = np.linalg.norm(relative - t[:, None] * edge, axis=1).min()
    return out


def loop_gaps(
        sampled: np.ndarray,
        target: np.ndarray,
        hole: np.ndarray,
        frame: PlaneFrame,
        n_samples: int = GAP_SAMPLES,
        overhang_tolerance: float = OVERHANG_TOLERANCE) -> GapReport:
    """sampled 루프를 호 길이 등간격으로 표본화해 target 루프까지의 부호 간격을 구합니다.

    부호는 표본이 hole 루프의 평면 다각형 안쪽이면 양수, 바깥이면 음수입니다.
    """
    if n_samples < 3:
        raise NoBoundaryError(f"간격 표본은 최소 3개여야 합니다. 입력: {n_samples}")
    arc_length, samples = _resample_loop(sampled, n_samples)
    distances = _distance_to_loop(samples, target)
    planar = frame.in_plane(samples)
    inside = contains_xy(_polygon(hole, frame), planar[:, 0], planar[:, 1])
    return GapReport(arc_length, np.where(inside, distances, -distances), samples, overhang_tolerance)


def gap_analysis(
        resized_implant: TriangleMesh,
        defect_skull: TriangleMesh,
        frame: PlaneFrame,
        n_samples: int = GAP_SAMPLES,
        overhang_tolerance: float = OVERHANG_TOLERANCE) -> GapReport:
    """임플란트 윗면 경계와 결손부 가장자리 사이의 간격을 분석합니다.

    Args:
        resized_implant (TriangleMesh): 절삭된 임플란트
        defect_skull (TriangleMesh): 결손 두개골 (같은 좌표계)
        frame (PlaneFrame): 윤곽 평면 좌표계, n_o가 윗면 방향입니다.
        n_samples (int): 임플란트 경계 표본 개수
        overhang_tolerance (float): 다듬기 필요 판정 기준 (mm)

    Returns:
        GapReport: 표본별 부호 간격과 통계

    Raises:
        FrameMismatchError: 두 메쉬의 좌표계가 다른 경우
        NoBoundaryError: 경계 루프를 찾지 못한 경우
        AmbiguousLoopsError: 둘레가 10% 이내인 후보 루프가 여러 개인 경우
    """
    if resized_implant.frame != defect_skull.frame:
        raise FrameMismatchError(
            f"임플란트 좌표계({resized_implant.frame})와 결손 두개골 좌표계({defect_skull.frame})가 다릅니다.")
    implant_boundary = implant_loop(resized_implant, frame)
    rim = defect_rim_loop(defect_skull, frame)
    report = loop_gaps(implant_boundary, rim, rim, frame, n_samples, overhang_tolerance)

    logger.info("간격 분석: 표본 %d개, 최대 %.4f mm, 평균 %.4f mm, 표준편차 %.4f mm",
                report.count, report.max, report.mean, report.std)
    if report.requires_trimming():
        logger.warning("임플란트가 결손부 가장자리보다 최대 %.4f mm 커서 추가로 다듬어야 합니다.",
                       -float(report.gaps.min()))
    return report
