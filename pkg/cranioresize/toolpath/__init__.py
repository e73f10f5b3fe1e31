"""윤곽 곡선을 절삭 툴패스로 바꾸는 패키지

Modules:
    spline: 닫힌 스플라인과 임플란트 윗면 투영
    path: 공구 반경 보정, 경사각, 좌표계 변환
    export: waypoint-text / gcode-like 입출력
"""
from .spline import SplineCurve, fit_spline, project_spline_to_surface, PROJECTION_MODES
from .path import Toolpath, ToolParams, generate_toolpath, transform_toolpath, OFFSET_MODES
from .export import (
    export_toolpath, format_toolpath, load_toolpath, parse_toolpath, TOOLPATH_FORMATS)

__all__ = [
    "SplineCurve", "fit_spline", "project_spline_to_surface", "PROJECTION_MODES",
    "Toolpath", "ToolParams", "generate_toolpath", "transform_toolpath", "OFFSET_MODES",
    "export_toolpath", "format_toolpath", "load_toolpath", "parse_toolpath", "TOOLPATH_FORMATS",
]
