import numpy as np
import pytest
from scipy.spatial import cKDTree

from cranioresize.customerror import MeshIoError, ParseError
from cranioresize.meshcore import (
    VertexScalarField, load_mesh, mean_curvature, save_mesh, vertex_normals)
from cranioresize.meshcore.primitives import icosphere

SINGLE_TRIANGLE_STL = """solid one
  facet normal 0 0 1
    outer loop
      vertex 0 0 0
      vertex 1 0 0
      vertex 0 1 0
    endloop
  endfacet
endsolid one
"""


def test_single_triangle_ascii_stl(tmp_path):
    path = tmp_path / "one.stl"
    path.write_text(SINGLE_TRIANGLE_STL)
    mesh = load_mesh(str(path), "stl-ascii")
    assert mesh.n_vertices == 3
    assert mesh.n_faces == 1


def test_icosphere_ply_round_trip_is_lossless(tmp_path):
    mesh = icosphere(80.0, 3)
    path = str(tmp_path / "sphere.ply")
    save_mesh(mesh, path, "ply")
    loaded = load_mesh(path, "ply")
    assert loaded.n_vertices == 642
    assert loaded.n_faces == 1280
    np.testing.assert_array_equal(loaded.vertices, mesh.vertices)
    np.testing.assert_array_equal(loaded.faces, mesh.faces)


def test_ascii_ply_round_trip(tmp_path):
    mesh = icosphere(10.0, 2)
    path = str(tmp_path / "sphere_ascii.ply")
    save_mesh(mesh, path, "ply-ascii")
    loaded = load_mesh(path, "ply-ascii")
    np.testing.assert_allclose(loaded.vertices, mesh.vertices, atol=1e-6)
    np.testing.assert_array_equal(loaded.faces, mesh.faces)


def test_ply_round_trip_keeps_normals(tmp_path):
    mesh = icosphere(10.0, 2)
    mesh = mesh.with_normals(vertex_normals(mesh).vectors)
    path = str(tmp_path / "normals.ply")
    save_mesh(mesh, path, "ply")
    loaded = load_mesh(path, "ply")
    assert loaded.normals is not None
    np.testing.assert_allclose(loaded.normals, mesh.normals, atol=1e-9)


@pytest.mark.parametrize("format", ["stl-binary", "stl-ascii"])
def test_stl_round_trip_topology_after_merge(tmp_path, format):
    mesh = icosphere(30.0, 2)
    path = str(tmp_path / "sphere.stl")
    save_mesh(mesh, path, format)
    loaded = load_mesh(path, format)
    assert loaded.n_vertices == mesh.n_vertices
    assert loaded.n_faces == mesh.n_faces

    distance, mapping = cKDTree(mesh.vertices).query(loaded.vertices)
    assert distance.max() < 1e-5
    original = {tuple(sorted(face)) for face in mesh.faces.tolist()}
    recovered = {tuple(sorted(face)) for face in mapping[loaded.faces].tolist()}
    assert original == recovered


def test_truncated_binary_stl(tmp_path):
    path = tmp_path / "sphere.stl"
    save_mesh(icosphere(1.0, 1), str(path), "stl-binary")
    data = path.read_bytes()
    path.write_bytes(data[:-20])
    with pytest.raises(ParseError):
        load_mesh(str(path), "stl-binary")


def test_missing_file():
    with pytest.raises(MeshIoError):
        load_mesh("/nonexistent/mesh.ply")


def test_write_to_unwritable_path(tmp_path):
    with pytest.raises(MeshIoError):
        save_mesh(icosphere(1.0, 1), str(tmp_path / "missing_dir" / "mesh.ply"), "ply")


def test_unknown_extension():
    with pytest.raises(ParseError):
        load_mesh("mesh.obj")


def test_quality_property_is_exported(tmp_path):
    mesh = icosphere(10.0, 2)
    field = mean_curvature(mesh)
    path = tmp_path / "curvature.ply"
    save_mesh(mesh, str(path), "ply", field=field)
    header = path.read_bytes().split(b"end_header")[0]
    assert b"quality" in header


def test_scalar_field_length_must_match():
    from cranioresize.customerror import InvalidMeshError
    with pytest.raises(InvalidMeshError):
        VertexScalarField(icosphere(1.0, 1), np.zeros(3))
