"""유효성 검사를 위한 함수들을 모아놓은 모듈

배열의 모양과 값 범위를 확인하고, 실패하면 지정한 예외를 발생시킵니다.
"""
import numpy as np

from .customerror import InvalidParamsError, DataError


def validate_points(
        points,
        *,
        min_count: int = 1,
        name: str = "points",
        exception_type: type[DataError] = DataError) -> np.ndarray:
    """(n, 3) 실수 배열인지 확인하고 float64 배열로 반환하는 함수

    Args:
        points: 검사할 점 배열
        min_count (int): 최소 점 개수
        name (str): 오류 메시지에 사용할 이름
        exception_type: 실패 시 발생시킬 예외 타입

    Returns:
        np.ndarray: (n, 3) float64 배열
    """
    array = np.asarray(points, dtype=np.float64)
    if array.ndim == 1 and array.size == 0:
        array = array.reshape(0, 3)
    if array.ndim != 2 or array.shape[1] != 3:
        raise exception_type(f"{name}는 (n, 3) 배열이어야 합니다. 입력 모양: {array.shape}")
    if len(array) < min_count:
        raise exception_type(f"{name}는 최소 {min_count}개의 점이 필요합니다. 입력: {len(array)}개")
    if not np.all(np.isfinite(array)):
        raise exception_type(f"{name}에 유한하지 않은 값이 있습니다.")
    return array


def validate_vector(vector, *, name: str = "vector") -> np.ndarray:
    """길이 3 실수 벡터인지 확인하는 함수"""
    array = np.asarray(vector, dtype=np.float64).reshape(-1)
    if array.shape != (3,) or not np.all(np.isfinite(array)):
        raise InvalidParamsError(f"{name}는 유한한 3차원 벡터여야 합니다.")
    return array


def validate_unit(vector, *, name: str = "vector", tol: float = 1e-9) -> np.ndarray:
    """단위 벡터인지 확인하는 함수"""
    array = validate_vector(vector, name=name)
    if abs(np.linalg.norm(array) - 1.0) > tol:
        raise InvalidParamsError(f"{name}는 단위 벡터여야 합니다. 길이: {np.linalg.norm(array)}")
    return array


def validate_positive(*args, names: tuple[str, ...] = (), allow_zero: bool = False):
    """여러 인자에 대해 양수인지 확인하는 함수

    Args:
        args: 검사할 값들
        names (tuple[str, ...]): 오류 메시지에 사용할 이름들
        allow_zero (bool): 0을 허용할지 여부
    """
    for index, value in enumerate(args):
        label = names[index] if index < len(names) else f"인자 {index}"
        if value is None or not np.isfinite(value):
            raise InvalidParamsError(f"{label}는 유한한 수여야 합니다.")
        if value < 0 or (value == 0 and not allow_zero):
            raise InvalidParamsError(f"{label}는 양수여야 합니다. 입력: {value}")
