"""좌표계 사이의 강체 변환과 랜드마크 집합, 그리고 이들의 텍스트 입출력을 정의합니다.

classes:
    RigidTransform: 좌표계 이름이 붙은 고유 강체 변환 (회전 + 이동)
    LandmarkSet: 이름이 붙은 3차원 점들의 순서 있는 집합

functions:
    save_transform / load_transform: 4x4 행렬 텍스트 입출력
    save_landmarks / load_landmarks: "label x y z" 텍스트 입출력
"""
from typing import Optional, Sequence

import numpy as np

from ..customerror import (
    FrameMismatchError, InvalidTransformError, MeshIoError, ParseError)
from ..settings import ROTATION_TOLERANCE
from ..validation import validate_points

_NO_FRAME = "-"


class RigidTransform:
    """from_frame 좌표를 to_frame 좌표로 옮기는 강체 변환 y = R·x + t

    Attributes:
        rotation (np.ndarray): 3x3 고유 직교 행렬
        translation (np.ndarray): 이동 벡터 (mm)
        from_frame (str | None): 원본 좌표계 이름
        to_frame (str | None): 대상 좌표계 이름

    Examples:
        >>> T = RigidTransform(np.eye(3), [1, 2, 3], "scan", "CT")
        >>> T.apply([0, 0, 0])
        array([1., 2., 3.])
    """

    def __init__(
            self,
            rotation,
            translation,
            from_frame: Optional[str] = None,
            to_frame: Optional[str] = None):
        rotation = np.asarray(rotation, dtype=np.float64)
        translation = np.asarray(translation, dtype=np.float64).reshape(-1)
        if rotation.shape != (3, 3) or translation.shape != (3,):
            raise InvalidTransformError("회전은 3x3, 이동은 길이 3이어야 합니다.")
        if not (np.all(np.isfinite(rotation)) and np.all(np.isfinite(translation))):
            raise InvalidTransformError("변환에 유한하지 않은 값이 있습니다.")
        if np.max(np.abs(rotation.T @ rotation - np.eye(3))) > ROTATION_TOLERANCE:
            raise InvalidTransformError("회전 행렬이 직교 행렬이 아닙니다.")
        if abs(np.linalg.det(rotation) - 1.0) > ROTATION_TOLERANCE:
            raise InvalidTransformError("회전 행렬의 행렬식이 +1이 아닙니다 (반사 변환).")

        rotation.setflags(write=False)
        translation.setflags(write=False)
        self.rotation = rotation
        self.translation = translation
        self.from_frame = from_frame
        self.to_frame = to_frame

    @classmethod
    def identity(cls, from_frame: Optional[str] = None, to_frame: Optional[str] = None):
        return cls(np.eye(3), np.zeros(3), from_frame, to_frame)

    @classmethod
    def from_matrix(cls, matrix, from_frame: Optional[str] = None, to_frame: Optional[str] = None):
        """4x4 동차 행렬로부터 변환을 만듭니다."""
        matrix = np.asarray(matrix, dtype=np.float64)
        if matrix.shape != (4, 4) or not np.allclose(matrix[3], [0, 0, 0, 1], atol=1e-12):
            raise InvalidTransformError("동차 변환 행렬은 마지막 행이 (0, 0, 0, 1)인 4x4 행렬이어야 합니다.")
        return cls(matrix[:3, :3], matrix[:3, 3], from_frame, to_frame)

    @property
    def matrix(self) -> np.ndarray:
        """4x4 동차 행렬"""
        out = np.eye(4)
        out[:3, :3] = self.rotation
        out[:3, 3] = self.translation
        return out

    @property
    def rotation_angle(self) -> float:
        """회전 각도 (라디안)"""
        cosine = np.clip((np.trace(self.rotation) - 1.0) / 2.0, -1.0, 1.0)
        return float(np.arccos(cosine))

    def apply(self, points) -> np.ndarray:
        """점 또는 (n, 3) 점 배열에 변환을 적용합니다."""
        points = np.asarray(points, dtype=np.float64)
        return points @ self.rotation.T + self.translation

    def apply_vectors(self, vectors) -> np.ndarray:
        """방향 벡터에는 회전만 적용합니다."""
        return np.asarray(vectors, dtype=np.float64) @ self.rotation.T

    def compose(self, inner: "RigidTransform") -> "RigidTransform":
        """self ∘ inner, 즉 inner를 먼저 적용한 뒤 self를 적용하는 변환

        Raises:
            FrameMismatchError: inner.to_frame과 self.from_frame이 다른 경우
        """
        if inner.to_frame != self.from_frame:
            raise FrameMismatchError(
                f"변환을 합성할 수 없습니다: {inner.from_frame}->{inner.to_frame} 다음에 "
                f"{self.from_frame}->{self.to_frame}")
        rotation = self.rotation @ inner.rotation
        u, _, vt = np.linalg.svd(rotation)
        return RigidTransform(
            u @ vt, self.rotation @ inner.translation + self.translation,
            inner.from_frame, self.to_frame)

    def __matmul__(self, inner: "RigidTransform") -> "RigidTransform":
        return self.compose(inner)

    def inverse(self) -> "RigidTransform":
        rotation = self.rotation.T
        return RigidTransform(rotation, -rotation @ self.translation, self.to_frame, self.from_frame)

    def relabeled(self, from_frame: Optional[str], to_frame: Optional[str]) -> "RigidTransform":
        return RigidTransform(self.rotation, self.translation, from_frame, to_frame)

    def __repr__(self):
        return (f"RigidTransform({self.from_frame}->{self.to_frame}, "
                f"angle={np.degrees(self.rotation_angle):.4f}deg, t={self.translation.tolist()})")


class LandmarkSet:
    """이름이 붙은 3차원 점들의 순서 있는 집합

    Attributes:
        labels (list[str]): 점 이름
        points (np.ndarray): (n, 3) 좌표 (mm)
        frame (str | None): 좌표계 이름
    """

    def __init__(self, points, labels: Optional[Sequence[str]] = None, frame: Optional[str] = None):
        points = validate_points(points, name="랜드마크", exception_type=ParseError)
        if labels is None:
            labels = [f"p{index}" for index in range(len(points))]
        labels = [str(label) for label in labels]
        if len(labels) != len(points):
            raise ParseError("랜드마크 이름 개수와 점 개수가 다릅니다.")
        points.setflags(write=False)
        self.points = points
        self.labels = labels
        self.frame = frame

    def __len__(self):
        return len(self.points)

    def transformed(self, transform: RigidTransform) -> "LandmarkSet":
        """변환을 적용한 랜드마크 집합. 좌표계 이름이 맞아야 합니다."""
        if transform.from_frame != self.frame:
            raise FrameMismatchError(
                f"{self.frame} 좌표계 랜드마크에 {transform.from_frame}->{transform.to_frame} 변환을 적용할 수 없습니다.")
        return LandmarkSet(transform.apply(self.points), self.labels, transform.to_frame)

    def __repr__(self):
        return f"LandmarkSet(n={len(self)}, frame={self.frame!r})"


def _frame_text(frame: Optional[str]) -> str:
    return _NO_FRAME if frame is None else frame


def _frame_value(text: str) -> Optional[str]:
    return None if text == _NO_FRAME else text


def _read_lines(path: str) -> list[str]:
    try:
        with open(path, "r", encoding="utf-8") as file:
            return file.read().splitlines()
    except OSError as error:
        raise MeshIoError(f"파일을 읽을 수 없습니다: {path} ({error})") from error


def _write_text(path: str, text: str):
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as file:
            file.write(text)
    except OSError as error:
        raise MeshIoError(f"파일을 쓸 수 없습니다: {path} ({error})") from error


def format_transform(transform: RigidTransform) -> str:
    """변환을 "# frames: a -> b" 헤더와 4x4 행 우선 행렬 텍스트로 만듭니다."""
    lines = [f"# frames: {_frame_text(transform.from_frame)} -> {_frame_text(transform.to_frame)}"]
    for row in transform.matrix:
        lines.append(" ".join(f"{value:.17g}" for value in row))
    return "\n".join(lines) + "\n"


def parse_transform(text: str) -> RigidTransform:
    from_frame = to_frame = None
    rows = []
    for line in text.splitlines():
        line = line.strip()
        if not line:
            continue
        if line.startswith("#"):
            body = line[1:].strip()
            if body.startswith("frames:"):
                parts = body[len("frames:"):].split("->")
                if len(parts) != 2:
                    raise ParseError(f"좌표계 헤더 형식이 잘못되었습니다: {line}")
                from_frame, to_frame = (_frame_value(part.strip()) for part in parts)
            continue
        try:
            rows.append([float(value) for value in line.split()])
        except ValueError as error:
            raise ParseError(f"변환 행렬 값을 읽을 수 없습니다: {line}") from error
    if len(rows) != 4 or any(len(row) != 4 for row in rows):
        raise ParseError("변환 파일에는 4개의 값이 있는 행 4개가 필요합니다.")
    return RigidTransform.from_matrix(np.array(rows), from_frame, to_frame)


def save_transform(transform: RigidTransform, path: str):
    _write_text(path, format_transform(transform))


def load_transform(path: str) -> RigidTransform:
    return parse_transform("\n".join(_read_lines(path)))


def save_landmarks(landmarks: LandmarkSet, path: str):
    """랜드마크를 "# frame: name" 헤더와 "label x y z" 행으로 저장합니다."""
    lines = [f"# frame: {_frame_text(landmarks.frame)}"]
    for label, point in zip(landmarks.labels, landmarks.points):
        lines.append(f"{label} " + " ".join(f"{value:.17g}" for value in point))
    _write_text(path, "\n".join(lines) + "\n")


def load_landmarks(path: str) -> LandmarkSet:
    frame = None
    labels, points = [], []
    for line in _read_lines(path):
        line = line.strip()
        if not line:
            continue
        if line.startswith("#"):
            body = line[1:].strip()
            if body.startswith("frame:"):
                frame = _frame_value(body[len("frame:"):].strip())
            continue
        tokens = line.split()
        if len(tokens) != 4:
            raise ParseError(f"랜드마크 행은 'label x y z' 형식이어야 합니다: {line}")
        try:
            points.append([float(value) for value in tokens[1:]])
        except ValueError as error:
            raise ParseError(f"랜드마크 좌표를 읽을 수 없습니다: {line}") from error
        labels.append(tokens[0])
    if not points:
        raise ParseError(f"랜드마크가 없습니다: {path}")
    return LandmarkSet(points, labels, frame)
