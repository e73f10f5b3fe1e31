"""곡률 필터와 자동 정리로 결손부 윤곽 점군을 추출하는 모듈입니다.

classes:
    ContourPointCloud: 윤곽 후보 점군
    CleanupParams: 자동 정리 파라미터

functions:
    curvature_threshold: 곡률 분위수 임계값
    filter_by_curvature: |H| 임계값 이상인 정점 선택
    clean_contour_points: 최대 연결 요소 + 통계적 이상점 제거
    save_point_cloud / load_point_cloud: "x y z" 텍스트 입출력
"""
from typing import Optional

import numpy as np
from pydantic import BaseModel, Field
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components
from scipy.spatial import cKDTree

from ..customerror import EmptySelectionError, InvalidParamsError, MeshIoError, ParseError
from ..meshcore import TriangleMesh, VertexScalarField, vertex_normals
from ..settings import (
    CLEANUP_MIN_CLUSTER_FRACTION, CLEANUP_NEIGHBORS, CLEANUP_RADIUS_FACTOR,
    CURVATURE_PERCENTILE, logger)
from ..validation import validate_points


class ContourPointCloud:
    """곡률 필터를 통과한 윤곽 후보 점군

    Attributes:
        points (np.ndarray): (n, 3) 점 좌표 (mm)
        frame (str | None): 좌표계 이름
        normals (np.ndarray | None): (n, 3) 원본 메쉬 정점 법선. 평면 방향 결정에 쓰입니다.
        mean_edge_length (float | None): 원본 메쉬의 평균 엣지 길이. 정리 반경 기본값에 쓰입니다.
    """

    def __init__(
            self,
            points,
            frame: Optional[str] = None,
            normals=None,
            mean_edge_length: Optional[float] = None):
        self.points = validate_points(points, name="윤곽 점군", min_count=0)
        if normals is not None:
            normals = np.asarray(normals, dtype=np.float64)
            if normals.shape != self.points.shape:
                raise InvalidParamsError("법선 배열은 점 배열과 같은 모양이어야 합니다.")
        self.normals = normals
        self.frame = frame
        self.mean_edge_length = mean_edge_length

    def __len__(self):
        return len(self.points)

    def subset(self, mask) -> "ContourPointCloud":
        """mask(불리언 또는 인덱스)로 고른 부분 점군. 입력 순서를 유지합니다."""
        normals = None if self.normals is None else self.normals[mask]
        return ContourPointCloud(self.points[mask], self.frame, normals, self.mean_edge_length)

    def __repr__(self):
        return f"ContourPointCloud(n={len(self)}, frame={self.frame!r})"


class CleanupParams(BaseModel):
    """윤곽 점군 자동 정리 파라미터

    Attributes:
        neighbor_radius (float | None): 반경 이웃 그래프의 반경 (mm). None이면 평균 엣지 길이의 3배
        min_cluster_fraction (float): 최대 연결 요소가 전체에서 차지해야 하는 최소 비율, 미달이면 경고
        neighbors (int): 통계적 이상점 판정에 쓰는 이웃 수 k
    """
    neighbor_radius: Optional[float] = Field(None, gt=0)
    min_cluster_fraction: float = Field(CLEANUP_MIN_CLUSTER_FRACTION, gt=0, le=1)
    neighbors: int = Field(CLEANUP_NEIGHBORS, ge=1)


def curvature_threshold(field: VertexScalarField, percentile: float = CURVATURE_PERCENTILE) -> float:
    """신뢰할 수 있는 정점의 |H| 분위수를 임계값으로 반환합니다."""
    if not 0 <= percentile <= 100:
        raise InvalidParamsError(f"분위수는 0과 100 사이여야 합니다. 입력: {percentile}")
    values = field.values[field.reliable]
    if not len(values):
        raise EmptySelectionError("곡률을 신뢰할 수 있는 정점이 없습니다.")
    return float(np.percentile(values, percentile))


def filter_by_curvature(
        mesh: TriangleMesh,
        field: VertexScalarField,
        threshold: float) -> ContourPointCloud:
    """|H| ≥ threshold 인 정점을 윤곽 점군으로 고릅니다.

    경계 정점처럼 곡률을 신뢰할 수 없는 정점은 제외합니다.

    Args:
        mesh (TriangleMesh): 곡률을 계산한 메쉬
        field (VertexScalarField): mesh의 |H| 필드
        threshold (float): 임계값 (1/mm)

    Returns:
        ContourPointCloud: 선택된 정점 좌표, 법선, 평균 엣지 길이를 담은 점군

    Raises:
        EmptySelectionError: 선택된 정점이 없는 경우
    """
    if len(field) != mesh.n_vertices:
        raise InvalidParamsError("곡률 필드가 메쉬와 맞지 않습니다.")
    selected = field.reliable & (field.values >= threshold)
    if not selected.any():
        raise EmptySelectionError(f"|H| ≥ {threshold:.6g} 인 정점이 없습니다. 임계값을 낮추세요.")

    normals = mesh.normals if mesh.normals is not None else vertex_normals(mesh).vectors
    logger.info("곡률 필터: 임계값 %.4f, 정점 %d개 중 %d개 선택", threshold, mesh.n_vertices, int(selected.sum()))
    return ContourPointCloud(
        mesh.vertices[selected], mesh.frame, normals[selected], mesh.mean_edge_length)


def _default_radius(cloud: ContourPointCloud) -> float:
    if cloud.mean_edge_length:
        return CLEANUP_RADIUS_FACTOR * cloud.mean_edge_length
    if len(cloud) < 2:
        return 1.0
    distances, _ = cKDTree(cloud.points).query(cloud.points, k=2)
    return CLEANUP_RADIUS_FACTOR * float(np.median(distances[:, 1]))


def clean_contour_points(
        cloud: ContourPointCloud,
        params: Optional[CleanupParams] = None) -> ContourPointCloud:
    """수동 정리를 대신하는 결정적 자동 정리

    1. 반경 이웃 그래프에서 가장 큰 연결 요소만 남깁니다. 크기가 같으면 가장 작은
       점 번호를 가진 요소를 남기고 경고를 남깁니다.
    2. k개 이웃까지의 평균 거리가 (평균 + 2·표준편차)를 넘는 점을 제거합니다.

    Args:
        cloud (ContourPointCloud): 입력 점군
        params (CleanupParams, optional): 정리 파라미터

    Returns:
        ContourPointCloud: 입력의 부분집합 (순서 유지)

    Raises:
        EmptySelectionError: 입력이 비었거나 결과가 비는 경우
    """
    params = params or CleanupParams()
    if not len(cloud):
        raise EmptySelectionError("정리할 윤곽 점이 없습니다.")

    radius = params.neighbor_radius or _default_radius(cloud)
    count = len(cloud)
    tree = cKDTree(cloud.points)
    pairs = tree.query_pairs(radius, output_type="ndarray")
    graph = coo_matrix((np.ones(len(pairs)), (pairs[:, 0], pairs[:, 1])), shape=(count, count))
    _, labels = connected_components(graph, directed=False)
    sizes = np.bincount(labels)
    largest = int(sizes.max())
    tied = np.flatnonzero(sizes == largest)
    if len(tied) > 1:
        logger.warning("크기가 %d인 연결 요소가 %d개 있어 가장 앞선 요소를 남깁니다.", largest, len(tied))
    if largest < params.min_cluster_fraction * count:
        logger.warning(
            "가장 큰 연결 요소가 전체의 %.1f%%뿐입니다. 윤곽 선택이 여러 조각으로 나뉘었을 수 있습니다.",
            100.0 * largest / count)
    # connected_components는 가장 작은 점 번호부터 요소 번호를 매깁니다.
    kept = cloud.subset(labels == tied[0])

    k = min(params.neighbors, len(kept) - 1)
    if k >= 1:
        distances, _ = cKDTree(kept.points).query(kept.points, k=k + 1)
        mean_distance = distances[:, 1:].mean(axis=1)
        limit = mean_distance.mean() + 2.0 * mean_distance.std() + 1e-9
        kept = kept.subset(mean_distance <= limit)

    if not len(kept):
        raise EmptySelectionError("정리 후 남은 윤곽 점이 없습니다.")
    logger.info("윤곽 정리: %d -> %d개 (반경 %.3f mm)", count, len(kept), radius)
    return kept


def save_point_cloud(cloud: ContourPointCloud, path: str):
    """점군을 한 줄에 "x y z" 형식으로 저장합니다."""
    text = "".join(f"{x:.17g} {y:.17g} {z:.17g}\n" for x, y, z in cloud.points)
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as file:
            file.write(text)
    except OSError as error:
        raise MeshIoError(f"점군 파일을 쓸 수 없습니다: {path} ({error})") from error


def load_point_cloud(path: str, frame: Optional[str] = None) -> ContourPointCloud:
    try:
        with open(path, "r", encoding="utf-8") as file:
            lines = file.read().splitlines()
    except OSError as error:
        raise MeshIoError(f"점군 파일을 읽을 수 없습니다: {path} ({error})") from error
    points = []
    for line in lines:
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        try:
            values = [float(value) for value in line.split()]
        except ValueError as error:
            raise ParseError(f"점 좌표를 읽을 수 없습니다: {line}") from error
        if len(values) != 3:
            raise ParseError(f"점 행은 'x y z' 형식이어야 합니다: {line}")
        points.append(values)
    return ContourPointCloud(np.array(points).reshape(-1, 3), frame)
