"""정합된 스캔 메쉬에서 결손부 윤곽을 추출하고 닫힌 곡선을 맞추는 패키지

Modules:
    cloud: 곡률 필터, 자동 정리, 점군 입출력
    frame: 최적 평면 좌표계와 원통 좌표
    polar: 닫힌 극좌표 곡선 맞춤과 표본화
"""
from .cloud import (
    ContourPointCloud, CleanupParams, curvature_threshold, filter_by_curvature,
    clean_contour_points, save_point_cloud, load_point_cloud)
from .frame import (
    PlaneFrame, CylindricalCoordinates, fit_plane_frame, plane_frame_from_normal, to_cylindrical)
from .polar import (
    PolarCurveModel, fit_closed_polar_curve, sample_curve, fourier_basis,
    format_polar_model, parse_polar_model, save_polar_model, load_polar_model)

__all__ = [
    "ContourPointCloud", "CleanupParams", "curvature_threshold", "filter_by_curvature",
    "clean_contour_points", "save_point_cloud", "load_point_cloud",
    "PlaneFrame", "CylindricalCoordinates", "fit_plane_frame", "plane_frame_from_normal", "to_cylindrical",
    "PolarCurveModel", "fit_closed_polar_curve", "sample_curve", "fourier_basis",
    "format_polar_model", "parse_polar_model", "save_polar_model", "load_polar_model",
]
