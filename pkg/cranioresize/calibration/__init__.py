"""로봇 공구 보정과 임플란트 위치 추정 패키지

Modules:
    pivot: 피벗 보정과 자세 파일 입출력
    localize: TCP 변환 연결, 마커 측정, CT→base 정합
"""
from .pivot import (
    PivotSolution, pivot_calibrate, load_pose_samples, parse_pose_samples, pose_from_values, save_pose_samples,
    save_pivot_solution, synthetic_pivot_poses)
from .localize import Localization, tcp_transform, compose_tcp, touch_points, localize_implant

__all__ = [
    "PivotSolution", "pivot_calibrate", "load_pose_samples", "parse_pose_samples", "pose_from_values",
    "save_pose_samples",
    "save_pivot_solution", "synthetic_pivot_poses",
    "Localization", "tcp_transform", "compose_tcp", "touch_points", "localize_implant",
]
