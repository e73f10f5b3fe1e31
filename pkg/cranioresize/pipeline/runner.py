"""파이프라인 단계 실행기

각 단계는 설정의 입력 파일과 out_dir의 이전 단계 산출물을 읽고, 정해진 이름의 산출물을
out_dir에 씁니다. 단계를 명령으로 하나씩 실행한 결과와 run_pipeline 결과는 같은 파일이 됩니다.

    extract-outer  ct_mesh                          -> outer_ct.ply
    register       scan_mesh, 랜드마크, outer_ct.ply -> scan_to_ct.txt, registered_scan.ply
    contour        registered_scan.ply              -> contour_model.txt
    toolpath       contour_model.txt, implant_mesh  -> toolpath.txt
    simulate-cut   toolpath.txt, implant_mesh       -> resized_implant.ply
    evaluate       defect_mesh, contour_model.txt   -> gap_report.txt (gap_report.csv)
"""
import hashlib
import json
import os
import time
from importlib import metadata
from typing import Callable, NamedTuple

from ..contour import (
    clean_contour_points, curvature_threshold, filter_by_curvature, fit_closed_polar_curve,
    fit_plane_frame, load_polar_model, sample_curve, save_polar_model, to_cylindrical)
from ..customerror import ConfigError, CranioResizeError, FrameMismatchError, StageError
from ..evaluation import gap_analysis, save_gap_report, virtual_cut
from ..meshcore import SpatialIndex, load_mesh, mean_curvature, save_mesh
from ..registration import (
    LandmarkSet, extract_outer_layer, fiducial_registration_error, icp, load_landmarks,
    register_points_svd, save_transform)
from ..settings import FRAME_CT, FRAME_SCAN, logger
from ..toolpath import export_toolpath, fit_spline, generate_toolpath, load_toolpath, project_spline_to_surface
from .config import PipelineConfig, check_inputs

OUTER_CT = "outer_ct.ply"
SCAN_TO_CT = "scan_to_ct.txt"
REGISTERED_SCAN = "registered_scan.ply"
CONTOUR_MODEL = "contour_model.txt"
TOOLPATH = "toolpath.txt"
RESIZED_IMPLANT = "resized_implant.ply"
GAP_REPORT = "gap_report.txt"
GAP_TABLE = "gap_report.csv"
MANIFEST = "manifest.json"

LIBRARIES = ("numpy", "scipy", "trimesh", "shapely", "pandas", "pydantic")


def artifact_path(config: PipelineConfig, name: str) -> str:
    return os.path.join(config.out_dir, name)


def _landmarks(path: str, frame: str) -> LandmarkSet:
    landmarks = load_landmarks(path)
    if landmarks.frame is None:
        return LandmarkSet(landmarks.points, landmarks.labels, frame)
    if landmarks.frame != frame:
        raise FrameMismatchError(f"{path}의 좌표계는 {frame}이어야 합니다. 입력: {landmarks.frame}")
    return landmarks


def extract_outer(config: PipelineConfig) -> dict:
    ct = load_mesh(config.ct_mesh, frame=FRAME_CT)
    outer = extract_outer_layer(ct)
    save_mesh(outer, artifact_path(config, OUTER_CT))
    return {"ct_faces": ct.n_faces, "outer_faces": outer.n_faces}


def register(config: PipelineConfig) -> dict:
    """랜드마크 SVD 정합으로 초기 변환을 구하고 바깥층 CT에 대해 ICP로 다듬습니다."""
    scan = load_mesh(config.scan_mesh, frame=FRAME_SCAN)
    outer = load_mesh(artifact_path(config, OUTER_CT), frame=FRAME_CT)
    scan_landmarks = _landmarks(config.scan_landmarks, FRAME_SCAN)
    ct_landmarks = _landmarks(config.ct_landmarks, FRAME_CT)

    init = register_points_svd(scan_landmarks, ct_landmarks)
    fre = fiducial_registration_error(init, scan_landmarks, ct_landmarks)
    logger.info("랜드마크 초기 정합: FRE %.4f mm", fre)
    result = icp(scan, SpatialIndex(outer), init, config.icp_params())

    transform = result.transform
    save_transform(transform, artifact_path(config, SCAN_TO_CT))
    registered = scan.transformed(transform.rotation, transform.translation, FRAME_CT)
    save_mesh(registered, artifact_path(config, REGISTERED_SCAN))
    return {
        "landmark_fre": fre,
        "icp_iterations": result.iterations,
        "icp_converged": result.converged,
        "icp_rms": result.final_rms,
    }


def contour(config: PipelineConfig) -> dict:
    scan = load_mesh(artifact_path(config, REGISTERED_SCAN), frame=FRAME_CT)
    field = mean_curvature(scan)
    threshold = config.curvature_threshold
    if threshold is None:
        threshold = curvature_threshold(field, config.curvature_percentile)

    cloud = clean_contour_points(filter_by_curvature(scan, field, threshold), config.cleanup_params())
    frame = fit_plane_frame(cloud)
    model = fit_closed_polar_curve(to_cylindrical(cloud, frame), config.fit_degree)
    save_polar_model(model, artifact_path(config, CONTOUR_MODEL))
    return {"threshold": threshold, "points": len(cloud.points), "residual_rms": model.residual_rms}


def toolpath(config: PipelineConfig) -> dict:
    model = load_polar_model(artifact_path(config, CONTOUR_MODEL), FRAME_CT)
    implant = load_mesh(config.implant_mesh, frame=FRAME_CT)

    spline = fit_spline(sample_curve(model, config.curve_samples), config.n_ctrl, model.frame)
    spline = project_spline_to_surface(spline, implant, model.frame, mode=config.projection_mode)
    path = generate_toolpath(spline, model.frame, config.tool_params(), config.step, config.offset_mode)
    export_toolpath(path, artifact_path(config, TOOLPATH), config.toolpath_format)
    return {"waypoints": len(path)}


def simulate_cut(config: PipelineConfig) -> dict:
    path = load_toolpath(artifact_path(config, TOOLPATH))
    implant = load_mesh(config.implant_mesh, frame=FRAME_CT)
    resized = virtual_cut(implant, path)
    save_mesh(resized, artifact_path(config, RESIZED_IMPLANT))
    return {"area_before": implant.area, "area_after": resized.area}


def evaluate(config: PipelineConfig) -> dict:
    """결손 가장자리와 (절삭된) 임플란트 경계 사이 간격을 보고서로 씁니다.

    simulate_cut이 꺼져 있으면 implant_mesh를 그대로 평가합니다.
    """
    model = load_polar_model(artifact_path(config, CONTOUR_MODEL), FRAME_CT)
    implant_path = artifact_path(config, RESIZED_IMPLANT) if config.simulate_cut else config.implant_mesh
    implant = load_mesh(implant_path, frame=FRAME_CT)
    defect = load_mesh(config.defect_mesh, frame=FRAME_CT)

    report = gap_analysis(implant, defect, model.frame, config.gap_samples, config.overhang_tolerance)
    csv_path = artifact_path(config, GAP_TABLE) if config.write_csv else None
    save_gap_report(report, artifact_path(config, GAP_REPORT), csv_path)
    if report.requires_trimming():
        logger.warning("임플란트가 결손부 밖으로 최대 %.3f mm 돌출됩니다. 추가 다듬기가 필요합니다.", -report.gaps.min())
    return report.summary()


class Stage(NamedTuple):
    """파이프라인 단계 정의

    Attributes:
        name (str): 단계(하위 명령) 이름
        run (Callable): 설정을 받아 요약 dict를 반환하는 함수
        inputs (tuple[str, ...]): 필요한 [paths] 키
        requires (tuple[str, ...]): out_dir에 있어야 하는 이전 단계 산출물
        outputs (tuple[str, ...]): 항상 쓰는 산출물
    """
    name: str
    run: Callable[[PipelineConfig], dict]
    inputs: tuple
    requires: tuple
    outputs: tuple


STAGES = (
    Stage("extract-outer", extract_outer, ("ct_mesh",), (), (OUTER_CT,)),
    Stage("register", register, ("scan_mesh", "scan_landmarks", "ct_landmarks"), (OUTER_CT,),
          (SCAN_TO_CT, REGISTERED_SCAN)),
    Stage("contour", contour, (), (REGISTERED_SCAN,), (CONTOUR_MODEL,)),
    Stage("toolpath", toolpath, ("implant_mesh",), (CONTOUR_MODEL,), (TOOLPATH,)),
    Stage("simulate-cut", simulate_cut, ("implant_mesh",), (TOOLPATH,), (RESIZED_IMPLANT,)),
    Stage("evaluate", evaluate, ("defect_mesh", "implant_mesh"), (CONTOUR_MODEL,), (GAP_REPORT,)),
)
STAGE_NAMES = tuple(stage.name for stage in STAGES)


def get_stage(name: str) -> Stage:
    for stage in STAGES:
        if stage.name == name:
            return stage
    raise ConfigError(f"알 수 없는 단계입니다: {name}")


def _requires(stage: Stage, config: PipelineConfig) -> tuple:
    if stage.name == "evaluate" and config.simulate_cut:
        return stage.requires + (RESIZED_IMPLANT,)
    return stage.requires


def _outputs(stage: Stage, config: PipelineConfig) -> tuple:
    if stage.name == "evaluate" and config.write_csv:
        return stage.outputs + (GAP_TABLE,)
    return stage.outputs


def _execute(stage: Stage, config: PipelineConfig) -> dict:
    logger.info("[%s] 시작", stage.name)
    started = time.perf_counter()
    try:
        summary = stage.run(config)
    except StageError:
        raise
    except CranioResizeError as error:
        raise StageError(stage.name, error) from error
    seconds = time.perf_counter() - started
    logger.info("[%s] 완료 (%.2f초)", stage.name, seconds)
    return {"name": stage.name, "seconds": seconds, "summary": summary, "outputs": list(_outputs(stage, config))}


def run_stage(name: str, config: PipelineConfig) -> dict:
    """단계 하나를 실행합니다.

    Raises:
        ConfigError: 입력 경로가 없거나 이전 단계 산출물이 out_dir에 없는 경우
        StageError: 단계 실행 중 오류가 난 경우 (원래 예외의 exit_code를 가짐)
    """
    stage = get_stage(name)
    check_inputs(config, stage.inputs)
    for required in _requires(stage, config):
        if not os.path.isfile(artifact_path(config, required)):
            raise ConfigError(f"{name} 단계에 필요한 이전 산출물이 없습니다: {artifact_path(config, required)}")
    os.makedirs(config.out_dir, exist_ok=True)
    return _execute(stage, config)


def pipeline_stages(config: PipelineConfig) -> list[Stage]:
    """설정에 따라 실행할 단계 목록. defect_mesh가 없으면 평가를 건너뜁니다."""
    stages = [stage for stage in STAGES if stage.name != "simulate-cut" or config.simulate_cut]
    if config.defect_mesh is None:
        stages = [stage for stage in stages if stage.name != "evaluate"]
    return stages


def sha256_file(path: str) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as file:
        for chunk in iter(lambda: file.read(1024 * 1024), b""):
            digest.update(chunk)
    return digest.hexdigest()


def library_versions() -> dict:
    from .. import __version__

    versions = {"cranioresize": __version__}
    for name in LIBRARIES:
        try:
            versions[name] = metadata.version(name)
        except metadata.PackageNotFoundError:
            versions[name] = "unknown"
    return versions


def run_pipeline(config: PipelineConfig) -> dict:
    """설정된 모든 단계를 순서대로 실행하고 manifest.json을 씁니다.

    입력 파일은 아무것도 쓰기 전에 한꺼번에 확인합니다.

    Args:
        config (PipelineConfig): 파이프라인 설정

    Returns:
        dict: manifest 내용 (config, versions, stages, artifacts)

    Raises:
        ConfigError: 입력 경로가 비어 있거나 파일이 없는 경우. 이때는 산출물을 쓰지 않습니다.
        StageError: 단계 실행 중 오류가 난 경우
    """
    stages = pipeline_stages(config)
    check_inputs(config, dict.fromkeys(key for stage in stages for key in stage.inputs))
    if config.defect_mesh is None:
        logger.info("defect_mesh가 없어 evaluate 단계를 건너뜁니다.")
    os.makedirs(config.out_dir, exist_ok=True)

    records = [_execute(stage, config) for stage in stages]
    artifacts = {
        name: sha256_file(artifact_path(config, name))
        for record in records for name in record["outputs"]}
    manifest = {
        "config": config.model_dump(),
        "versions": library_versions(),
        "stages": records,
        "artifacts": artifacts,
    }
    with open(artifact_path(config, MANIFEST), "w", encoding="utf-8", newline="\n") as file:
        json.dump(manifest, file, indent=2, sort_keys=True, default=float)
        file.write("\n")
    logger.info("파이프라인 완료: 산출물 %d개 (%s)", len(artifacts), config.out_dir)
    return manifest
