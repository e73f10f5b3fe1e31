"""사용자 정의 예외를 처리하는 모듈

모든 예외는 ValueError를 상속하며, CLI 종료 코드로 사용할 exit_code를 가집니다.

classes:
    CranioResizeError: 패키지 예외의 최상위 클래스
    ConfigError: 설정 파일, 경로, 파라미터 범위 오류 (종료 코드 2)
    DataError: 입력 데이터가 잘못되었거나 비어 있는 경우 (종료 코드 3)
    NumericalError: 수치 계산이 퇴화되었거나 실패한 경우 (종료 코드 4)
    StageError: 파이프라인 단계에서 발생한 예외를 단계 이름과 함께 감싸는 클래스
"""


class CranioResizeError(ValueError):
    """패키지에서 발생하는 모든 예외의 부모 클래스"""
    exit_code = 1

    def __init__(self, message: str):
        self.message = message
        super().__init__(message)


class ConfigError(CranioResizeError):
    """설정 값이나 입력 경로가 유효하지 않을 때 발생하는 예외"""
    exit_code = 2


class DataError(CranioResizeError):
    """입력 데이터에 대한 예외의 부모 클래스"""
    exit_code = 3


class NumericalError(CranioResizeError):
    """수치적으로 풀 수 없는 입력에 대한 예외의 부모 클래스"""
    exit_code = 4


# 데이터 오류
class ParseError(DataError):
    """메쉬, 랜드마크, 변환 파일을 해석하지 못했을 때 발생하는 예외"""


class MeshIoError(DataError):
    """파일을 쓰거나 읽는 중 입출력 오류가 발생했을 때의 예외"""


class EmptyMeshError(DataError):
    """면 또는 정점이 없는 메쉬에 대한 예외"""


class InvalidMeshError(DataError):
    """TriangleMesh 불변 조건을 만족하지 않는 입력에 대한 예외"""


class NonManifoldError(DataError):
    """세 개 이상의 면이 공유하는 엣지가 있을 때 발생하는 예외"""


class EmptyResultError(DataError):
    """외곽층 추출이나 가상 절삭 결과 남은 정점이 없을 때 발생하는 예외"""


class EmptySelectionError(DataError):
    """곡률 필터나 정리 단계 이후 점이 남지 않았을 때 발생하는 예외"""


class CountMismatchError(DataError):
    """대응점 개수가 서로 다를 때 발생하는 예외"""


class FrameMismatchError(DataError):
    """좌표계 이름이 맞지 않는 객체를 합성하거나 적용할 때 발생하는 예외"""


class NoCorrespondencesError(DataError):
    """ICP 소스 점이 비어 있을 때 발생하는 예외"""


class NoBoundaryError(DataError):
    """경계 루프가 없는 메쉬로 간격 분석을 시도할 때 발생하는 예외"""


class AmbiguousLoopsError(DataError):
    """후보 경계 루프의 길이가 10% 이내로 비슷해 하나를 고를 수 없을 때의 예외"""


class OpenToolpathError(DataError):
    """닫히지 않은 툴패스로 가상 절삭을 시도할 때 발생하는 예외"""


class EmptyToolpathError(DataError):
    """웨이포인트가 없는 툴패스를 내보내려 할 때 발생하는 예외"""


class ProjectionMissError(DataError):
    """제어점을 임플란트 표면에 투영하지 못했을 때 발생하는 예외"""


class TooFewPointsError(DataError):
    """스플라인 제어점 수가 부족할 때 발생하는 예외"""


class InvalidParamsError(DataError):
    """시편 생성 파라미터가 유효하지 않을 때 발생하는 예외"""


# 수치 오류
class DegenerateConfigurationError(NumericalError):
    """점들이 한 직선 위에 있거나 겹쳐서 강체 변환이나 평면을 정할 수 없을 때의 예외"""


class RankDeficientError(NumericalError):
    """최소제곱 문제의 계수 행렬이 랭크 부족일 때 발생하는 예외"""


class InsufficientCoverageError(NumericalError):
    """윤곽 점들의 각도 간격이 허용치보다 클 때 발생하는 예외"""


class InsufficientDiversityError(NumericalError):
    """피벗 보정 자세들의 회전이 충분히 다양하지 않을 때 발생하는 예외"""


class DivergedInitError(NumericalError):
    """ICP 초기 정렬 오차가 허용 범위를 넘었을 때 발생하는 예외"""


class DegenerateTangentError(NumericalError):
    """곡선의 평면 내 접선 길이가 0일 때 발생하는 예외"""


class CenterOnCurveError(NumericalError):
    """곡선 점이 중심점 O_c와 겹칠 때 발생하는 예외"""


class NonPositiveRadiusError(NumericalError):
    """맞춘 극좌표 곡선의 반지름이 0 이하가 되는 구간이 있을 때의 예외"""


class InvalidTransformError(NumericalError):
    """회전 행렬이 고유 직교 행렬이 아닐 때 발생하는 예외"""


class StageError(CranioResizeError):
    """파이프라인 단계 이름과 원래 예외를 함께 담는 예외

    Attributes:
        stage (str): 실패한 단계 이름
        cause (CranioResizeError): 원래 발생한 예외
    """

    def __init__(self, stage: str, cause: CranioResizeError):
        self.stage = stage
        self.cause = cause
        self.exit_code = cause.exit_code
        super().__init__(f"[{stage}] {type(cause).__name__}: {cause.message}")
