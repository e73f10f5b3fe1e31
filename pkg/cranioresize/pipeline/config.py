"""파이프라인 설정 파일을 읽고 쓰는 모듈

설정 파일은 섹션 헤더가 있는 key=value 형식입니다. 키 이름은 섹션 전체에서 고유하므로
명령줄에서 같은 이름의 옵션으로 어떤 키든 덮어쓸 수 있습니다.

    [paths]
    scan_mesh = scan.ply
    ct_mesh = ct_model.ply
    ...
    [toolpath]
    tool_radius = 3.0
    tilt_angle = 20.0

상대 경로는 설정 파일이 있는 디렉터리를 기준으로 풉니다.
"""
import configparser
import os
from typing import Literal, Optional

from pydantic import BaseModel, Field, ValidationError

from ..contour import CleanupParams
from ..customerror import ConfigError
from ..registration import IcpParams
from ..settings import (
    CLEANUP_MIN_CLUSTER_FRACTION, CLEANUP_NEIGHBORS, CURVATURE_PERCENTILE, CURVE_SAMPLES, CUT_DEPTH,
    FIT_DEGREE, GAP_SAMPLES, ICP_DIVERGENCE_GATE, ICP_MAX_ITERS, ICP_RMS_TOL, ICP_SAMPLE_SIZE,
    ICP_TRIM_FRACTION, OVERHANG_TOLERANCE, SPLINE_CONTROL_POINTS, TILT_ANGLE_DEG, TOOL_RADIUS,
    TOOLPATH_STEP, logger)
from ..toolpath import ToolParams

SECTIONS = {
    "paths": (
        "scan_mesh", "ct_mesh", "implant_mesh", "scan_landmarks", "ct_landmarks", "defect_mesh",
        "pose_samples", "implant_markers_ct", "implant_markers_base", "out_dir"),
    "registration": ("max_iters", "rms_tol", "trim_fraction", "divergence_gate", "sample_size"),
    "contour": (
        "curvature_threshold", "curvature_percentile", "neighbor_radius", "min_cluster_fraction",
        "neighbors", "fit_degree", "curve_samples"),
    "toolpath": (
        "tool_radius", "tilt_angle", "cut_depth", "step", "n_ctrl", "projection_mode", "offset_mode",
        "toolpath_format"),
    "calibration": ("reject_outliers",),
    "evaluation": ("simulate_cut", "gap_samples", "overhang_tolerance", "write_csv"),
    "run": ("seed",),
}
KEY_SECTIONS = {key: section for section, keys in SECTIONS.items() for key in keys}
PATH_KEYS = SECTIONS["paths"]


class PipelineConfig(BaseModel):
    """파이프라인 실행 설정

    경로 값은 load_config를 거치면 절대 경로입니다. 선택 항목이 비어 있으면 None입니다.
    """
    # paths
    scan_mesh: Optional[str] = None
    ct_mesh: Optional[str] = None
    implant_mesh: Optional[str] = None
    scan_landmarks: Optional[str] = None
    ct_landmarks: Optional[str] = None
    defect_mesh: Optional[str] = None
    pose_samples: Optional[str] = None
    implant_markers_ct: Optional[str] = None
    implant_markers_base: Optional[str] = None
    out_dir: str = "out"

    # registration
    max_iters: int = Field(ICP_MAX_ITERS, ge=1)
    rms_tol: float = Field(ICP_RMS_TOL, ge=0)
    trim_fraction: float = Field(ICP_TRIM_FRACTION, ge=0, lt=1)
    divergence_gate: float = Field(ICP_DIVERGENCE_GATE, gt=0)
    sample_size: Optional[int] = Field(ICP_SAMPLE_SIZE, ge=3)

    # contour
    curvature_threshold: Optional[float] = Field(None, ge=0)
    curvature_percentile: float = Field(CURVATURE_PERCENTILE, ge=0, le=100)
    neighbor_radius: Optional[float] = Field(None, gt=0)
    min_cluster_fraction: float = Field(CLEANUP_MIN_CLUSTER_FRACTION, gt=0, le=1)
    neighbors: int = Field(CLEANUP_NEIGHBORS, ge=1)
    fit_degree: int = Field(FIT_DEGREE, ge=1)
    curve_samples: int = Field(CURVE_SAMPLES, ge=8)

    # toolpath
    tool_radius: float = Field(TOOL_RADIUS, gt=0)
    tilt_angle: float = Field(TILT_ANGLE_DEG, ge=0, le=45)
    cut_depth: float = Field(CUT_DEPTH, gt=0)
    step: float = Field(TOOLPATH_STEP, gt=0)
    n_ctrl: int = Field(SPLINE_CONTROL_POINTS, ge=4)
    projection_mode: Literal["ray", "closest"] = "ray"
    offset_mode: Literal["normal", "radial"] = "normal"
    toolpath_format: Literal["waypoint-text", "gcode-like"] = "waypoint-text"

    # calibration
    reject_outliers: bool = False

    # evaluation
    simulate_cut: bool = True
    gap_samples: int = Field(GAP_SAMPLES, ge=3)
    overhang_tolerance: float = Field(OVERHANG_TOLERANCE, ge=0)
    write_csv: bool = False

    # run
    seed: int = 0

    def icp_params(self) -> IcpParams:
        return IcpParams(
            max_iters=self.max_iters, rms_tol=self.rms_tol, trim_fraction=self.trim_fraction,
            divergence_gate=self.divergence_gate, sample_size=self.sample_size, seed=self.seed)

    def cleanup_params(self) -> CleanupParams:
        return CleanupParams(
            neighbor_radius=self.neighbor_radius, min_cluster_fraction=self.min_cluster_fraction,
            neighbors=self.neighbors)

    def tool_params(self) -> ToolParams:
        return ToolParams(tool_radius=self.tool_radius, tilt_angle=self.tilt_angle, cut_depth=self.cut_depth)


def _resolve(value: Optional[str], base_dir: str) -> Optional[str]:
    if value is None or os.path.isabs(value):
        return value
    return os.path.normpath(os.path.join(base_dir, value))


def _put(values: dict, key: str, value, origin: str):
    if key not in KEY_SECTIONS:
        raise ConfigError(f"알 수 없는 설정 키입니다: {key} ({origin})")
    values[key] = None if isinstance(value, str) and not value.strip() else value


def load_config(
        path: Optional[str] = None,
        overrides: Optional[dict] = None,
        base_dir: Optional[str] = None) -> PipelineConfig:
    """설정 파일과 명령줄 덮어쓰기 값으로 PipelineConfig를 만듭니다.

    Args:
        path (str, optional): 설정 파일 경로. 없으면 기본값에서 시작합니다.
        overrides (dict, optional): 키 이름별 덮어쓸 값. None 값은 무시합니다.
        base_dir (str, optional): 상대 경로의 기준 디렉터리. 기본값은 설정 파일 위치 또는 현재 디렉터리

    Returns:
        PipelineConfig: 경로가 절대 경로로 풀린 설정

    Raises:
        ConfigError: 파일을 읽을 수 없거나, 모르는 섹션/키가 있거나, 값이 범위를 벗어난 경우
    """
    values = {}
    if path is not None:
        parser = configparser.ConfigParser(interpolation=None)
        try:
            with open(path, "r", encoding="utf-8") as file:
                parser.read_file(file)
        except OSError as error:
            raise ConfigError(f"설정 파일을 읽을 수 없습니다: {path} ({error})") from error
        except configparser.Error as error:
            raise ConfigError(f"설정 파일 형식이 잘못되었습니다: {path} ({error})") from error
        for section in parser.sections():
            if section not in SECTIONS:
                raise ConfigError(f"알 수 없는 설정 섹션입니다: [{section}]")
            for key, value in parser.items(section):
                if KEY_SECTIONS.get(key, section) != section:
                    raise ConfigError(f"{key}는 [{KEY_SECTIONS[key]}] 섹션의 키입니다.")
                _put(values, key, value, path)
    for key, value in (overrides or {}).items():
        if value is not None:
            _put(values, key, value, "명령줄")

    if base_dir is None:
        base_dir = os.path.dirname(os.path.abspath(path)) if path is not None else os.getcwd()
    for key in PATH_KEYS:
        if key in values:
            values[key] = _resolve(values[key], base_dir)
    values.setdefault("out_dir", _resolve("out", base_dir))

    try:
        config = PipelineConfig.model_validate(values)
    except ValidationError as error:
        problems = "; ".join(f"{'.'.join(str(p) for p in item['loc'])}: {item['msg']}" for item in error.errors())
        raise ConfigError(f"설정 값이 올바르지 않습니다: {problems}") from error
    logger.debug("설정을 읽었습니다: %s", path or "(기본값)")
    return config


def check_inputs(config: PipelineConfig, keys) -> None:
    """keys에 해당하는 입력 경로가 모두 지정되어 있고 존재하는지 확인합니다.

    Raises:
        ConfigError: 경로가 비어 있거나 파일이 없는 경우
    """
    for key in keys:
        value = getattr(config, key)
        if value is None:
            raise ConfigError(f"[paths] {key} 값이 필요합니다.")
        if not os.path.isfile(value):
            raise ConfigError(f"입력 파일이 없습니다: {key} = {value}")


def _text(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    return str(value)


def format_config(config: PipelineConfig, relative_to: Optional[str] = None) -> str:
    """설정을 섹션 순서대로 key = value 텍스트로 만듭니다.

    relative_to를 주면 그 디렉터리 아래의 경로를 상대 경로로 씁니다.
    """
    lines = []
    for section, keys in SECTIONS.items():
        lines.append(f"[{section}]")
        for key in keys:
            value = getattr(config, key)
            if key in PATH_KEYS and value is not None and relative_to is not None:
                value = os.path.relpath(value, relative_to).replace(os.sep, "/")
            lines.append(f"{key} = {_text(value)}".rstrip())
        lines.append("")
    return "\n".join(lines)


def save_config(config: PipelineConfig, path: str, relative: bool = True):
    directory = os.path.dirname(os.path.abspath(path))
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as file:
            file.write(format_config(config, directory if relative else None))
    except OSError as error:
        raise ConfigError(f"설정 파일을 쓸 수 없습니다: {path} ({error})") from error
