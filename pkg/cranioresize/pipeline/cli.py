"""cranioresize 명령줄 인터페이스

공통 옵션(--config, --out-dir, --seed, --verbose)은 하위 명령 앞에 둡니다. 설정 키는 하위 명령
뒤에 같은 이름의 옵션으로 덮어쓸 수 있습니다.

    cranioresize --config demo/pipeline.ini pipeline --tool_radius 2.5
    cranioresize --out-dir specimens synth --count 6 --evaluate

종료 코드: 0 성공, 2 설정 오류, 3 데이터 오류, 4 수치 오류
"""
import json
import logging
import os
import traceback
from functools import wraps
from typing import Annotated, Optional

import typer

from ..calibration import load_pose_samples, localize_implant, pivot_calibrate, save_pivot_solution
from ..customerror import ConfigError, CranioResizeError
from ..evaluation import SpecimenParams
from ..registration import load_landmarks, save_transform
from ..settings import logger
from ..toolpath import export_toolpath, load_toolpath, transform_toolpath
from .batch import evaluate_batch, specimen_directory, synthesize
from .config import PATH_KEYS, PipelineConfig, load_config
from .runner import TOOLPATH, artifact_path, run_pipeline, run_stage

CT_TO_BASE = "ct_to_base.txt"
TOOLPATH_BASE = "toolpath_base.txt"
PIVOT_SOLUTION = "pivot_solution.txt"
BATCH_SUMMARY = "batch_summary.csv"

OVERRIDES = {"allow_extra_args": True, "ignore_unknown_options": True}

app = typer.Typer(
    name="cranioresize",
    help="두개골 결손 스캔으로 임플란트 절삭 툴패스를 만들고 평가합니다.",
    no_args_is_help=True,
    add_completion=False,
)


def parse_overrides(args: list[str]) -> dict:
    """["--key", "value", "--other=value"] 형태의 남은 인자를 dict로 바꿉니다.

    Raises:
        ConfigError: 값이 없거나 옵션 형식이 아닌 인자가 있는 경우
    """
    overrides, index = {}, 0
    while index < len(args):
        token = args[index]
        if not token.startswith("--") or len(token) == 2:
            raise ConfigError(f"설정 덮어쓰기는 --key value 형식이어야 합니다: {token}")
        key, sep, value = token[2:].partition("=")
        if not sep:
            if index + 1 >= len(args):
                raise ConfigError(f"--{key}에 값이 없습니다.")
            index += 1
            value = args[index]
        overrides[key.replace("-", "_")] = value
        index += 1
    return overrides


def _absolute_paths(overrides: dict) -> dict:
    # 명령줄 경로는 설정 파일이 아니라 현재 디렉터리를 기준으로 합니다.
    return {
        key: os.path.abspath(value) if key in PATH_KEYS and value else value
        for key, value in overrides.items()}


def build_config(ctx: typer.Context) -> PipelineConfig:
    options = ctx.obj or {}
    overrides = dict(options.get("overrides", {}))
    overrides.update(parse_overrides(list(ctx.args)))
    return load_config(options.get("config"), _absolute_paths(overrides))


def error_boundary(func):
    """CranioResizeError를 로그로 남기고 exit_code로 종료합니다."""
    @wraps(func)
    def wrapper(*args, **kwargs):
        try:
            return func(*args, **kwargs)
        except CranioResizeError as error:
            logger.error(
                "%s: %s\n%s", type(error).__name__, error, "".join(traceback.format_tb(error.__traceback__)))
            typer.echo(f"오류: {error}", err=True)
            raise typer.Exit(code=error.exit_code) from error
    return wrapper


@app.callback()
def main(
        ctx: typer.Context,
        config: Annotated[Optional[str], typer.Option("--config", "-c", help="설정 파일 경로")] = None,
        out_dir: Annotated[Optional[str], typer.Option("--out-dir", "-o", help="산출물 디렉터리")] = None,
        seed: Annotated[Optional[int], typer.Option("--seed", help="난수 시드")] = None,
        verbose: Annotated[bool, typer.Option("--verbose", "-v", help="DEBUG 로그 출력")] = False):
    logger.setLevel(logging.DEBUG if verbose else logging.INFO)
    ctx.obj = {"config": config, "overrides": {"out_dir": out_dir, "seed": seed}}


def _stage(ctx: typer.Context, name: str):
    record = run_stage(name, build_config(ctx))
    typer.echo(json.dumps({name: record["summary"]}, sort_keys=True, default=float))


@app.command("extract-outer", context_settings=OVERRIDES)
@error_boundary
def extract_outer_command(ctx: typer.Context):
    """CT 메쉬에서 바깥층만 남겨 outer_ct.ply로 저장합니다."""
    _stage(ctx, "extract-outer")


@app.command("register", context_settings=OVERRIDES)
@error_boundary
def register_command(ctx: typer.Context):
    """랜드마크 초기 정합과 ICP로 스캔을 CT 좌표계로 옮깁니다."""
    _stage(ctx, "register")


@app.command("contour", context_settings=OVERRIDES)
@error_boundary
def contour_command(ctx: typer.Context):
    """정합된 스캔에서 결손부 윤곽을 찾아 극좌표 곡선 모델을 만듭니다."""
    _stage(ctx, "contour")


@app.command("toolpath", context_settings=OVERRIDES)
@error_boundary
def toolpath_command(ctx: typer.Context):
    """윤곽 모델을 임플란트 윗면에 투영하고 툴패스를 만듭니다."""
    _stage(ctx, "toolpath")


@app.command("simulate-cut", context_settings=OVERRIDES)
@error_boundary
def simulate_cut_command(ctx: typer.Context):
    """툴패스로 임플란트를 가상 절삭합니다."""
    _stage(ctx, "simulate-cut")


@app.command("evaluate", context_settings=OVERRIDES)
@error_boundary
def evaluate_command(ctx: typer.Context):
    """임플란트 경계와 결손부 가장자리 사이 간격 보고서를 씁니다."""
    _stage(ctx, "evaluate")


@app.command("pipeline", context_settings=OVERRIDES)
@error_boundary
def pipeline_command(ctx: typer.Context):
    """모든 단계를 실행하고 manifest.json을 씁니다."""
    manifest = run_pipeline(build_config(ctx))
    for record in manifest["stages"]:
        typer.echo(f"{record['name']}: {record['seconds']:.2f}s")
    typer.echo(f"산출물 {len(manifest['artifacts'])}개")


@app.command("synth", context_settings=OVERRIDES)
@error_boundary
def synth_command(
        ctx: typer.Context,
        count: Annotated[int, typer.Option("--count", "-n", min=1, help="만들 시편 개수")] = 1,
        params: Annotated[Optional[str], typer.Option("--params", help="SpecimenParams JSON 파일")] = None,
        evaluate: Annotated[bool, typer.Option("--evaluate", help="만든 시편마다 파이프라인을 실행")] = False,
        workers: Annotated[Optional[int], typer.Option("--workers", min=1, help="병렬 프로세스 수")] = None):
    """시드 seed, seed+1, ... 의 합성 시편과 pipeline.ini를 out_dir 아래에 만듭니다."""
    config = build_config(ctx)
    specimen_params = _specimen_params(params)
    # 설정 파일이나 덮어쓰기가 없으면 합성 시편용 기본값을 씁니다.
    customized = (ctx.obj or {}).get("config") is not None or bool(ctx.args)
    pipeline_config = config if customized else None
    seeds = [config.seed + index for index in range(count)]

    if evaluate:
        table = evaluate_batch(seeds, specimen_params, pipeline_config, config.out_dir, workers)
        os.makedirs(config.out_dir, exist_ok=True)
        table.to_csv(os.path.join(config.out_dir, BATCH_SUMMARY), index=False, float_format="%.6f")
        typer.echo(table.to_string(index=False))
        return
    for seed in seeds:
        typer.echo(synthesize(seed, specimen_directory(config.out_dir, seed), specimen_params, pipeline_config))


def _specimen_params(path: Optional[str]) -> SpecimenParams:
    if path is None:
        return SpecimenParams()
    try:
        with open(path, "r", encoding="utf-8") as file:
            return SpecimenParams.model_validate_json(file.read())
    except OSError as error:
        raise ConfigError(f"시편 파라미터 파일을 읽을 수 없습니다: {path} ({error})") from error
    except ValueError as error:
        raise ConfigError(f"시편 파라미터가 올바르지 않습니다: {path} ({error})") from error


@app.command("pivot-calibrate", context_settings=OVERRIDES)
@error_boundary
def pivot_calibrate_command(ctx: typer.Context):
    """pose_samples의 자세로 공구 끝점을 보정해 pivot_solution.txt로 저장합니다."""
    config = build_config(ctx)
    if config.pose_samples is None:
        raise ConfigError("[paths] pose_samples 값이 필요합니다.")
    solution = pivot_calibrate(load_pose_samples(config.pose_samples), config.reject_outliers)
    os.makedirs(config.out_dir, exist_ok=True)
    save_pivot_solution(solution, artifact_path(config, PIVOT_SOLUTION))
    typer.echo(solution.to_text(), nl=False)


@app.command("localize", context_settings=OVERRIDES)
@error_boundary
def localize_command(ctx: typer.Context):
    """임플란트 마커로 CT→base 변환을 구하고, 툴패스가 있으면 base 좌표계로 옮깁니다."""
    config = build_config(ctx)
    for key in ("implant_markers_base", "implant_markers_ct"):
        if getattr(config, key) is None:
            raise ConfigError(f"[paths] {key} 값이 필요합니다.")
    markers_base = load_landmarks(config.implant_markers_base)
    markers_ct = load_landmarks(config.implant_markers_ct)
    transform, error = localize_implant(markers_base, markers_ct)

    os.makedirs(config.out_dir, exist_ok=True)
    save_transform(transform, artifact_path(config, CT_TO_BASE))
    typer.echo(f"CT->base FRE {error:.4f} mm")
    if os.path.isfile(artifact_path(config, TOOLPATH)):
        moved = transform_toolpath(load_toolpath(artifact_path(config, TOOLPATH)), transform)
        export_toolpath(moved, artifact_path(config, TOOLPATH_BASE), config.toolpath_format)
        typer.echo(f"base 좌표계 툴패스: {artifact_path(config, TOOLPATH_BASE)}")
