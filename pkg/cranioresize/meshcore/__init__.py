"""삼각형 메쉬 표현, 파일 입출력, 법선, 곡률, 공간 질의, 경계 추출 패키지"""
from .base import TriangleMesh, VertexScalarField, NormalField, centroid, vertex_normals
from .curvature import mean_curvature
from .io import load_mesh, save_mesh, merge_duplicate_vertices, MESH_FORMATS
from .spatial import SpatialIndex, ClosestPoints, RayHits
from .topology import boundary_loops, boundary_vertex_mask, edge_face_counts, loop_length

__all__ = [
    "TriangleMesh", "VertexScalarField", "NormalField", "centroid", "vertex_normals",
    "mean_curvature",
    "load_mesh", "save_mesh", "merge_duplicate_vertices", "MESH_FORMATS",
    "SpatialIndex", "ClosestPoints", "RayHits",
    "boundary_loops", "boundary_vertex_mask", "edge_face_counts", "loop_length",
]
