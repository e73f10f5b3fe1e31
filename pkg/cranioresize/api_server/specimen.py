"""합성 시편 평가 API

시편을 임시 디렉터리에 만들고 파이프라인 전체를 실행해 간격 통계를 반환합니다.
"""
import tempfile

from fastapi import APIRouter

from ..customerror import ConfigError
from ..pipeline import load_config, run_pipeline, synthesize
from ..pipeline.config import PATH_KEYS
from ..settings import logger
from .schemas import GapSummary, SpecimenRequest

specimen_api = APIRouter(prefix="/specimen")


@specimen_api.post("/evaluate", response_model=GapSummary)
def evaluate(request: SpecimenRequest):
    """시편 하나를 평가합니다.

    settings로 경로 키나 seed는 바꿀 수 없습니다.
    """
    forbidden = sorted(set(request.settings) & (set(PATH_KEYS) | {"seed"}))
    if forbidden:
        raise ConfigError(f"API에서 바꿀 수 없는 설정입니다: {', '.join(forbidden)}")

    with tempfile.TemporaryDirectory(prefix="cranioresize-") as directory:
        config = load_config(synthesize(request.seed, directory, request.params), request.settings)
        manifest = run_pipeline(config)
    stages = {record["name"]: record["summary"] for record in manifest["stages"]}
    logger.info("시편 %d 평가: 평균 |간격| %.4f mm", request.seed, stages["evaluate"]["mean_abs_gap"])
    return {"seed": request.seed, "icp_rms": stages["register"]["icp_rms"], **stages["evaluate"]}
