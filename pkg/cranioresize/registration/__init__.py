"""스캔 메쉬를 CT 모델에 강체 정합하는 패키지

Modules:
    transform: RigidTransform, LandmarkSet과 텍스트 입출력
    svd: SVD 대응점 정합
    icp: 점-대-점 ICP
    outer_layer: 안쪽 층 제거
    metrics: 표면 거리와 기준점 정합 오차
"""
from .transform import (
    RigidTransform, LandmarkSet, save_transform, load_transform, format_transform,
    parse_transform, save_landmarks, load_landmarks)
from .svd import register_points_svd, best_fit_rotation
from .icp import icp, IcpParams, IcpResult
from .outer_layer import extract_outer_layer
from .metrics import (
    mean_surface_distance, mean_vertex_distance, fiducial_registration_error, DISTANCE_MODES)

__all__ = [
    "RigidTransform", "LandmarkSet", "save_transform", "load_transform", "format_transform",
    "parse_transform", "save_landmarks", "load_landmarks",
    "register_points_svd", "best_fit_rotation",
    "icp", "IcpParams", "IcpResult",
    "extract_outer_layer",
    "mean_surface_distance", "mean_vertex_distance", "fiducial_registration_error", "DISTANCE_MODES",
]
