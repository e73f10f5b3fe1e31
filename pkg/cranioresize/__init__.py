"""두개골 결손 스캔으로 임플란트 절삭 툴패스를 만드는 기하 처리 패키지

하위 패키지:
    meshcore: 삼각형 메쉬, 파일 입출력, 곡률, 최근접점 색인
    registration: 강체 변환, SVD 정합, ICP, 바깥층 추출
    contour: 곡률 기반 윤곽 점 추출과 닫힌 극좌표 곡선 맞춤
    toolpath: 스플라인 투영, 공구 반경 보정, 툴패스 내보내기
    calibration: 피벗 보정과 임플란트 위치 추정
    evaluation: 합성 시편, 가상 절삭, 간격 분석
    pipeline: 설정 파일, 단계 실행기, 명령줄 인터페이스
    api_server: HTTP 엔드포인트
"""
__version__ = "0.1.0"
