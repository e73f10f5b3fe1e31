"""설정 파일, 단계 실행기, 배치 평가, 명령줄 인터페이스

Modules:
    config: key=value 설정 파일과 PipelineConfig
    runner: 파일 단위 단계 실행과 manifest.json
    batch: 합성 시편 생성과 병렬 평가
    cli: typer 명령줄 인터페이스
"""
from .config import PipelineConfig, load_config, save_config, format_config, check_inputs, SECTIONS
from .runner import (
    STAGES, STAGE_NAMES, Stage, run_stage, run_pipeline, pipeline_stages, artifact_path, sha256_file)
from .batch import synthesize, evaluate_specimen, evaluate_batch, specimen_directory

__all__ = [
    "PipelineConfig", "load_config", "save_config", "format_config", "check_inputs", "SECTIONS",
    "STAGES", "STAGE_NAMES", "Stage", "run_stage", "run_pipeline", "pipeline_stages", "artifact_path",
    "sha256_file",
    "synthesize", "evaluate_specimen", "evaluate_batch", "specimen_directory",
]
