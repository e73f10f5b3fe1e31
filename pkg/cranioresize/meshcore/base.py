"""삼각형 메쉬와 정점 스칼라 필드를 정의하는 모듈입니다.

classes:
    TriangleMesh: 정점, 면, 선택적 정점 법선을 가지는 불변 삼각형 메쉬
    VertexScalarField: 메쉬의 정점마다 하나의 스칼라 값을 가지는 필드
    NormalField: 정점 법선과 유효 여부 플래그

functions:
    centroid: 메쉬 정점들의 산술 평균
    vertex_normals: 면적 가중 정점 법선
"""
from typing import NamedTuple, Optional

import numpy as np

from ..customerror import EmptyMeshError, InvalidMeshError
from ..settings import NORMAL_UNIT_TOLERANCE


def _frozen(array: np.ndarray) -> np.ndarray:
    array = np.array(array, copy=True)
    array.setflags(write=False)
    return array


class TriangleMesh:
    """인덱스 기반 삼각형 메쉬 클래스

    생성 이후에는 배열이 읽기 전용으로 고정되어 여러 스레드에서 안전하게 조회할 수 있습니다.
    좌표 단위는 mm이며, frame에는 메쉬가 표현된 좌표계 이름을 기록합니다.

    Attributes:
        vertices (np.ndarray): (n, 3) 정점 좌표
        faces (np.ndarray): (m, 3) 정점 인덱스
        normals (np.ndarray | None): (n, 3) 단위 정점 법선
        frame (str | None): 좌표계 이름, None이면 지정되지 않음

    Examples:
        >>> mesh = TriangleMesh([[0, 0, 0], [1, 0, 0], [0, 1, 0]], [[0, 1, 2]])
        >>> mesh.n_vertices, mesh.n_faces
        (3, 1)
    """

    def __init__(
            self,
            vertices,
            faces,
            normals=None,
            frame: Optional[str] = None):
        """TriangleMesh 객체를 생성하고 불변 조건을 검사합니다.

        Args:
            vertices: (n, 3) 정점 좌표
            faces: (m, 3) 정점 인덱스
            normals (optional): (n, 3) 단위 정점 법선
            frame (str, optional): 좌표계 이름

        Raises:
            InvalidMeshError: 인덱스 범위, 중복 인덱스, 법선 길이 조건을 어긴 경우
        """
        vertices = np.asarray(vertices, dtype=np.float64)
        if vertices.size == 0:
            vertices = vertices.reshape(0, 3)
        faces = np.asarray(faces, dtype=np.int64)
        if faces.size == 0:
            faces = faces.reshape(0, 3)

        if vertices.ndim != 2 or vertices.shape[1] != 3:
            raise InvalidMeshError(f"정점 배열은 (n, 3) 모양이어야 합니다. 입력 모양: {vertices.shape}")
        if faces.ndim != 2 or faces.shape[1] != 3:
            raise InvalidMeshError(f"면 배열은 (m, 3) 모양이어야 합니다. 입력 모양: {faces.shape}")
        if len(faces) and (faces.min() < 0 or faces.max() >= len(vertices)):
            raise InvalidMeshError("면 인덱스가 정점 개수 범위를 벗어났습니다.")
        if len(faces) and np.any(
                (faces[:, 0] == faces[:, 1])
                | (faces[:, 1] == faces[:, 2])
                | (faces[:, 0] == faces[:, 2])):
            raise InvalidMeshError("같은 정점을 두 번 참조하는 면이 있습니다.")

        if normals is not None:
            normals = np.asarray(normals, dtype=np.float64)
            if normals.shape != vertices.shape:
                raise InvalidMeshError("법선 배열은 정점 배열과 같은 모양이어야 합니다.")
            lengths = np.linalg.norm(normals, axis=1)
            if np.any(np.abs(lengths - 1.0) > NORMAL_UNIT_TOLERANCE):
                raise InvalidMeshError("저장된 법선은 단위 길이여야 합니다.")

        self.vertices = _frozen(vertices)
        self.faces = _frozen(faces)
        self.normals = None if normals is None else _frozen(normals)
        self.frame = frame

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    @property
    def n_faces(self) -> int:
        return len(self.faces)

    @property
    def triangles(self) -> np.ndarray:
        """(m, 3, 3) 면별 정점 좌표"""
        return self.vertices[self.faces]

    @property
    def face_cross(self) -> np.ndarray:
        """면마다 (v1 - v0) x (v2 - v0), 크기는 면적의 두 배입니다."""
        tri = self.triangles
        return np.cross(tri[:, 1] - tri[:, 0], tri[:, 2] - tri[:, 0])

    @property
    def face_areas(self) -> np.ndarray:
        return 0.5 * np.linalg.norm(self.face_cross, axis=1)

    @property
    def face_normals(self) -> np.ndarray:
        """단위 면 법선, 면적이 0인 면은 0 벡터"""
        cross = self.face_cross
        length = np.linalg.norm(cross, axis=1)
        out = np.zeros_like(cross)
        nonzero = length > 0
        out[nonzero] = cross[nonzero] / length[nonzero, None]
        return out

    @property
    def area(self) -> float:
        return float(self.face_areas.sum())

    @property
    def edges(self) -> np.ndarray:
        """(k, 2) 정렬된 고유 엣지"""
        if not len(self.faces):
            return np.zeros((0, 2), dtype=np.int64)
        pairs = self.faces[:, [0, 1, 1, 2, 2, 0]].reshape(-1, 2)
        return np.unique(np.sort(pairs, axis=1), axis=0)

    @property
    def mean_edge_length(self) -> float:
        edges = self.edges
        if not len(edges):
            return 0.0
        return float(np.linalg.norm(
            self.vertices[edges[:, 0]] - self.vertices[edges[:, 1]], axis=1).mean())

    @property
    def bounds(self) -> np.ndarray:
        """(2, 3) 축 정렬 경계 상자의 최소/최대 좌표"""
        if not self.n_vertices:
            raise EmptyMeshError("정점이 없는 메쉬의 경계 상자를 구할 수 없습니다.")
        return np.vstack([self.vertices.min(axis=0), self.vertices.max(axis=0)])

    def with_normals(self, normals) -> "TriangleMesh":
        return TriangleMesh(self.vertices, self.faces, normals, self.frame)

    def with_frame(self, frame: Optional[str]) -> "TriangleMesh":
        return TriangleMesh(self.vertices, self.faces, self.normals, frame)

    def transformed(self, rotation, translation, frame: Optional[str] = None) -> "TriangleMesh":
        """강체 변환을 적용한 새 메쉬를 반환합니다.

        Args:
            rotation: 3x3 회전 행렬
            translation: 이동 벡터
            frame (str, optional): 결과 메쉬의 좌표계 이름. 주어지지 않으면 기존 이름 유지

        Returns:
            TriangleMesh: 변환된 메쉬
        """
        rotation = np.asarray(rotation, dtype=np.float64)
        translation = np.asarray(translation, dtype=np.float64)
        vertices = self.vertices @ rotation.T + translation
        normals = None
        if self.normals is not None:
            normals = self.normals @ rotation.T
            normals /= np.linalg.norm(normals, axis=1)[:, None]
        return TriangleMesh(vertices, self.faces, normals, frame if frame is not None else self.frame)

    def flipped(self) -> "TriangleMesh":
        """면의 방향을 뒤집은 메쉬, 저장된 법선도 반대로 뒤집습니다."""
        normals = None if self.normals is None else -self.normals
        return TriangleMesh(self.vertices, self.faces[:, ::-1], normals, self.frame)

    def submesh(self, vertex_mask) -> "TriangleMesh":
        """vertex_mask가 True인 정점과, 세 정점이 모두 남은 면만 남긴 메쉬를 반환합니다.

        어떤 면에도 쓰이지 않더라도 선택된 정점은 모두 유지됩니다.
        """
        vertex_mask = np.asarray(vertex_mask, dtype=bool)
        remap = np.full(self.n_vertices, -1, dtype=np.int64)
        remap[vertex_mask] = np.arange(int(vertex_mask.sum()))
        keep_faces = vertex_mask[self.faces].all(axis=1)
        normals = None if self.normals is None else self.normals[vertex_mask]
        return TriangleMesh(
            self.vertices[vertex_mask], remap[self.faces[keep_faces]], normals, self.frame)

    def face_subset(self, face_mask) -> "TriangleMesh":
        """선택한 면과 그 면들이 사용하는 정점만 남긴 메쉬를 반환합니다."""
        face_mask = np.asarray(face_mask, dtype=bool)
        used = np.zeros(self.n_vertices, dtype=bool)
        used[self.faces[face_mask].reshape(-1)] = True
        remap = np.full(self.n_vertices, -1, dtype=np.int64)
        remap[used] = np.arange(int(used.sum()))
        normals = None if self.normals is None else self.normals[used]
        return TriangleMesh(self.vertices[used], remap[self.faces[face_mask]], normals, self.frame)

    def __repr__(self):
        return (f"TriangleMesh(vertices={self.n_vertices}, faces={self.n_faces}, "
                f"frame={self.frame!r})")


class VertexScalarField:
    """메쉬 정점마다 스칼라 값을 하나씩 가지는 필드

    Attributes:
        mesh (TriangleMesh): 필드가 정의된 메쉬
        values (np.ndarray): 정점별 값
        reliable (np.ndarray): 값을 신뢰할 수 있는 정점 여부 (경계 정점은 False)
        name (str): 필드 이름, PLY 내보내기에서 속성 이름으로 쓰입니다.
    """

    def __init__(self, mesh: TriangleMesh, values, reliable=None, name: str = "quality"):
        values = np.asarray(values, dtype=np.float64).reshape(-1)
        if len(values) != mesh.n_vertices:
            raise InvalidMeshError(
                f"필드 길이({len(values)})가 정점 개수({mesh.n_vertices})와 다릅니다.")
        if reliable is None:
            reliable = np.ones(len(values), dtype=bool)
        self.mesh = mesh
        self.values = _frozen(values)
        self.reliable = _frozen(np.asarray(reliable, dtype=bool))
        self.name = name

    def __len__(self):
        return len(self.values)


class NormalField(NamedTuple):
    """정점 법선 계산 결과

    Attributes:
        vectors (np.ndarray): (n, 3) 단위 법선, 유효하지 않은 정점은 0 벡터
        valid (np.ndarray): (n,) 유효 여부
    """
    vectors: np.ndarray
    valid: np.ndarray


def centroid(mesh: TriangleMesh) -> np.ndarray:
    """메쉬 정점 좌표의 산술 평균 o = Σq_i / n 을 반환합니다.

    Raises:
        EmptyMeshError: 정점이 없는 경우
    """
    if mesh.n_vertices == 0:
        raise EmptyMeshError("정점이 없는 메쉬의 중심을 구할 수 없습니다.")
    return mesh.vertices.mean(axis=0)


def vertex_normals(mesh: TriangleMesh) -> NormalField:
    """면적 가중 평균으로 정점 법선을 계산합니다.

    각 면의 외적 벡터(크기가 면적의 두 배)를 세 정점에 더한 뒤 정규화합니다.
    어떤 면에도 속하지 않거나 합이 0인 정점은 0 벡터와 valid=False를 가집니다.

    Args:
        mesh (TriangleMesh): 대상 메쉬

    Returns:
        NormalField: 정점 법선과 유효 여부
    """
    accum = np.zeros((mesh.n_vertices, 3))
    if mesh.n_faces:
        cross = mesh.face_cross
        for corner in range(3):
            np.add.at(accum, mesh.faces[:, corner], cross)
    length = np.linalg.norm(accum, axis=1)
    valid = length > 0
    vectors = np.zeros_like(accum)
    vectors[valid] = accum[valid] / length[valid, None]
    return NormalField(vectors, valid)
