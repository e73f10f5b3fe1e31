"""합성 시편 생성, 가상 절삭, 간격 분석 패키지

Modules:
    specimen: 결손 두개골 시편과 스캔 복사본 생성
    cutter: 툴패스 선직면을 이용한 가상 절삭
    gap: 임플란트 경계와 결손부 가장자리 사이 간격 분석
"""
from .specimen import (
    SpecimenParams, DefectSpecimen, generate_specimen, make_scan, digitize_contour, save_specimen,
    SKULL_FIDUCIAL_ANGLES, IMPLANT_FIDUCIAL_ANGLES)
from .cutter import virtual_cut, SweptToolSurface, signed_polygon_distance
from .gap import (
    GapReport, gap_analysis, loop_gaps, top_boundary_loops, implant_loop, defect_rim_loop,
    save_gap_report)

__all__ = [
    "SpecimenParams", "DefectSpecimen", "generate_specimen", "make_scan", "digitize_contour", "save_specimen",
    "SKULL_FIDUCIAL_ANGLES", "IMPLANT_FIDUCIAL_ANGLES",
    "virtual_cut", "SweptToolSurface", "signed_polygon_distance",
    "GapReport", "gap_analysis", "loop_gaps", "top_boundary_loops", "implant_loop", "defect_rim_loop",
    "save_gap_report",
]
