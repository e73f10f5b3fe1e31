"""패키지 전역에서 사용하는 설정 상수와 로거를 정의합니다.

좌표계 이름, 수치 허용오차, 각 단계의 기본 파라미터를 모아 둡니다.
단위는 모두 밀리미터(mm)와 라디안이며, 각도 파라미터만 도(degree)로 받습니다.
"""
import logging

# 좌표계 이름
FRAME_SCAN = "scan"
FRAME_CT = "CT"
FRAME_BASE = "base"
FRAME_EE = "ee"
FRAME_TCP = "TCP"
FRAME_REF = "ref"

# mesh-core
STL_MERGE_TOLERANCE = 1e-6  # STL 중복 정점 병합 거리 (mm)
NORMAL_UNIT_TOLERANCE = 1e-9
ROTATION_TOLERANCE = 1e-9

# registration
ICP_MAX_ITERS = 100
ICP_RMS_TOL = 1e-4
ICP_TRIM_FRACTION = 0.0
ICP_DIVERGENCE_GATE = 50.0
ICP_SAMPLE_SIZE = 4000

# contour
CURVATURE_PERCENTILE = 90.0
CLEANUP_RADIUS_FACTOR = 3.0  # 평균 엣지 길이의 배수
CLEANUP_MIN_CLUSTER_FRACTION = 0.5
CLEANUP_NEIGHBORS = 8
FIT_DEGREE = 8
THETA_GAP_LIMIT_DEG = 90.0
RADIUS_CHECK_SAMPLES = 4096

# toolpath
TOOL_RADIUS = 3.0
TILT_ANGLE_DEG = 20.0
CUT_DEPTH = 3.0
TOOLPATH_STEP = 0.5
SPLINE_CONTROL_POINTS = 32
CURVE_SAMPLES = 256
PROJECTION_GATE = 10.0

# calibration
PIVOT_MIN_SINGULAR_VALUE = 1e-6

# evaluation
GAP_SAMPLES = 360
OVERHANG_TOLERANCE = 0.1

logging.basicConfig(
    format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
    level=logging.INFO
)
logger = logging.getLogger("cranioresize_logger")
