"""HTTP API를 구성하는 모듈들

schemas.py에는 요청/응답 모델이 정의되어 있습니다.
이외의 모듈은 각각의 API 엔드포인트를 정의하고 있습니다.
"""
from .calibration import calibration_api
from .specimen import specimen_api

__all__ = ["calibration_api", "specimen_api"]
