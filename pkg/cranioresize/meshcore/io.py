"""STL/PLY 메쉬 파일을 읽고 쓰는 모듈입니다.

파일 해석과 직렬화는 trimesh에 맡기고, 이 모듈은 형식 검사, STL 중복 정점 병합,
법선과 "quality" 정점 속성 처리만 담당합니다.

functions:
    load_mesh: 파일에서 TriangleMesh를 읽습니다.
    save_mesh: TriangleMesh를 파일로 저장합니다.
    merge_duplicate_vertices: 허용오차 이내의 정점을 하나로 합칩니다.
"""
import os
import struct
from typing import Optional

import numpy as np
import trimesh
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components
from scipy.spatial import cKDTree

from ..customerror import EmptyMeshError, MeshIoError, ParseError
from ..settings import STL_MERGE_TOLERANCE, logger
from .base import TriangleMesh, VertexScalarField

MESH_FORMATS = ("stl-binary", "stl-ascii", "ply", "ply-ascii")


def guess_format(path: str) -> str:
    """파일 확장자로 기본 형식을 추정합니다. STL은 바이너리로 간주합니다."""
    extension = os.path.splitext(path)[1].lower()
    if extension == ".stl":
        return "stl-binary"
    if extension == ".ply":
        return "ply"
    raise ParseError(f"확장자로 메쉬 형식을 알 수 없습니다: {path}")


def merge_duplicate_vertices(
        vertices: np.ndarray,
        faces: np.ndarray,
        tolerance: float = STL_MERGE_TOLERANCE) -> tuple[np.ndarray, np.ndarray]:
    """tolerance 이내로 가까운 정점들을 하나로 합칩니다.

    가까운 정점 쌍으로 그래프를 만들고 연결 요소마다 가장 앞선 정점 하나를 남깁니다.
    병합 후 같은 정점을 두 번 참조하게 된 면은 제거됩니다.

    Args:
        vertices (np.ndarray): (n, 3) 정점 좌표
        faces (np.ndarray): (m, 3) 면 인덱스
        tolerance (float): 병합 거리 (mm)

    Returns:
        tuple[np.ndarray, np.ndarray]: 병합된 정점과 다시 번호를 매긴 면
    """
    if not len(vertices):
        return vertices, faces
    pairs = cKDTree(vertices).query_pairs(tolerance, output_type="ndarray")
    graph = coo_matrix(
        (np.ones(len(pairs)), (pairs[:, 0], pairs[:, 1])),
        shape=(len(vertices), len(vertices)))
    _, labels = connected_components(graph, directed=False)
    _, first = np.unique(labels, return_index=True)
    merged = vertices[first]
    faces = labels[faces]
    collapsed = (faces[:, 0] == faces[:, 1]) | (faces[:, 1] == faces[:, 2]) | (faces[:, 0] == faces[:, 2])
    if collapsed.any():
        logger.warning("정점 병합으로 퇴화된 면 %d개를 제거했습니다.", int(collapsed.sum()))
        faces = faces[~collapsed]
    return merged, faces


def _check_binary_stl(path: str):
    with open(path, "rb") as file:
        header = file.read(84)
    if len(header) < 84:
        raise ParseError(f"바이너리 STL 헤더가 잘렸습니다: {path}")
    (count,) = struct.unpack("<I", header[80:84])
    expected = 84 + 50 * count
    size = os.path.getsize(path)
    if size != expected:
        raise ParseError(
            f"바이너리 STL 크기가 맞지 않습니다: 삼각형 {count}개에는 {expected} 바이트가 필요하지만 "
            f"파일은 {size} 바이트입니다.")


def _ply_vertex_properties(path: str) -> list[str]:
    properties, in_vertex = [], False
    with open(path, "rb") as file:
        for raw in file:
            line = raw.decode("ascii", errors="replace").strip()
            if line == "end_header":
                break
            tokens = line.split()
            if tokens[:1] == ["element"]:
                in_vertex = len(tokens) > 1 and tokens[1] == "vertex"
            elif tokens[:1] == ["property"] and in_vertex:
                properties.append(tokens[-1])
    return properties


def load_mesh(path: str, format: Optional[str] = None, frame: Optional[str] = None) -> TriangleMesh:
    """메쉬 파일을 읽어 TriangleMesh를 반환합니다.

    STL 입력은 1e-6 mm 이내의 중복 정점을 병합합니다. PLY에 nx, ny, nz 속성이 있으면
    정점 법선으로 읽습니다.

    Args:
        path (str): 파일 경로
        format (str, optional): stl-binary, stl-ascii, ply, ply-ascii 중 하나. 없으면 확장자로 추정
        frame (str, optional): 결과 메쉬의 좌표계 이름

    Returns:
        TriangleMesh: 읽은 메쉬

    Raises:
        MeshIoError: 파일을 열 수 없는 경우
        ParseError: 형식에 맞지 않는 파일
        EmptyMeshError: 면이 하나도 없는 경우

    Examples:
        >>> mesh = load_mesh("scan.ply")
    """
    format = format or guess_format(path)
    if format not in MESH_FORMATS:
        raise ParseError(f"지원하지 않는 메쉬 형식입니다: {format}")
    if not os.path.isfile(path):
        raise MeshIoError(f"메쉬 파일이 없습니다: {path}")

    try:
        if format == "stl-binary":
            _check_binary_stl(path)
        file_type = "stl" if format.startswith("stl") else "ply"
        with open(path, "rb") as file:
            loaded = trimesh.load(file, file_type=file_type, process=False, force="mesh")
        vertices = np.asarray(loaded.vertices, dtype=np.float64)
        faces = np.asarray(loaded.faces, dtype=np.int64)
    except OSError as error:
        raise MeshIoError(f"메쉬 파일을 읽을 수 없습니다: {path} ({error})") from error
    except ParseError:
        raise
    except Exception as error:
        raise ParseError(f"{format} 파일을 해석하지 못했습니다: {path} ({error})") from error

    if not len(faces):
        raise EmptyMeshError(f"면이 없는 메쉬입니다: {path}")

    normals = None
    if file_type == "stl":
        vertices, faces = merge_duplicate_vertices(vertices, faces)
    elif {"nx", "ny", "nz"} <= set(_ply_vertex_properties(path)):
        normals = np.array(loaded.vertex_normals, dtype=np.float64)
        normals /= np.linalg.norm(normals, axis=1)[:, None]

    mesh = TriangleMesh(vertices, faces, normals, frame)
    logger.debug("메쉬를 읽었습니다: %s (%r)", path, mesh)
    return mesh


def save_mesh(
        mesh: TriangleMesh,
        path: str,
        format: Optional[str] = None,
        field: Optional[VertexScalarField] = None):
    """TriangleMesh를 파일로 저장합니다.

    PLY는 좌표를 64비트 실수로 저장하므로 손실이 없습니다. STL은 형식상 32비트 실수입니다.
    field를 주면 PLY 정점 속성으로 함께 저장합니다(기본 이름 "quality").

    Args:
        mesh (TriangleMesh): 저장할 메쉬
        path (str): 저장 경로
        format (str, optional): stl-binary, stl-ascii, ply, ply-ascii 중 하나
        field (VertexScalarField, optional): PLY에 함께 기록할 정점 스칼라 필드

    Raises:
        MeshIoError: 파일을 쓸 수 없는 경우
    """
    format = format or guess_format(path)
    if format not in MESH_FORMATS:
        raise ParseError(f"지원하지 않는 메쉬 형식입니다: {format}")

    exported = trimesh.Trimesh(
        vertices=mesh.vertices.copy(), faces=mesh.faces.copy(), process=False, validate=False)
    if format == "stl-binary":
        data = trimesh.exchange.stl.export_stl(exported)
    elif format == "stl-ascii":
        data = trimesh.exchange.stl.export_stl_ascii(exported).encode("ascii")
    else:
        include_normals = mesh.normals is not None
        if include_normals:
            exported.vertex_normals = mesh.normals.copy()
        if field is not None:
            exported.vertex_attributes[field.name] = np.asarray(field.values, dtype=np.float64)
        data = trimesh.exchange.ply.export_ply(
            exported,
            encoding="ascii" if format == "ply-ascii" else "binary",
            vertex_normal=include_normals,
            include_attributes=field is not None)

    try:
        with open(path, "wb") as file:
            file.write(data)
    except OSError as error:
        raise MeshIoError(f"메쉬 파일을 쓸 수 없습니다: {path} ({error})") from error
    logger.debug("메쉬를 저장했습니다: %s (%s)", path, format)
