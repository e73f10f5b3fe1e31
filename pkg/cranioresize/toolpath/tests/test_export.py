import numpy as np
import pytest

from cranioresize.contour import PlaneFrame
from cranioresize.customerror import EmptyToolpathError, MeshIoError
from cranioresize.toolpath import (
    Toolpath, ToolParams, export_toolpath, fit_spline, generate_toolpath, load_toolpath)

GOLDEN_WAYPOINTS = (
    "# cranioresize toolpath\n"
    "# frame CT\n"
    "# tool_radius 3 tilt_angle 0 cut_depth 3\n"
    "# step 0.5\n"
    "# plane_normal 0 0 1\n"
    "# center 0.25 1 0\n"
    "# count 2\n"
    "0.000000 0.000000 0.000000 0.000000 0.000000 1.000000\n"
    "0.500000 0.000000 0.000000 0.000000 0.000000 1.000000\n"
)

GOLDEN_GCODE = (
    "; cranioresize toolpath\n"
    "; frame CT\n"
    "; tool_radius 3 tilt_angle 0 cut_depth 3\n"
    "; step 0.5\n"
    "; plane_normal 0 0 1\n"
    "; center 0.25 1 0\n"
    "; count 2\n"
    "; feed: F word omitted, set by the operator\n"
    "G90\n"
    "G21\n"
    "G1 X0.000000 Y0.000000 Z0.000000 I0.000000 J0.000000 K1.000000\n"
    "G1 X0.500000 Y0.000000 Z0.000000 I0.000000 J0.000000 K1.000000\n"
)


@pytest.fixture
def two_waypoints() -> Toolpath:
    return Toolpath(
        [[0.0, 0.0, 0.0], [0.5, 0.0, 0.0]], [[0.0, 0.0, 1.0], [0.0, 0.0, 1.0]],
        ToolParams(tool_radius=3.0, tilt_angle=0.0, cut_depth=3.0),
        [0.0, 0.0, 1.0], [0.25, 1.0, 0.0], 0.5, "CT")


def test_waypoint_text_golden(tmp_path, two_waypoints):
    path = tmp_path / "toolpath.txt"
    export_toolpath(two_waypoints, str(path))
    assert path.read_bytes() == GOLDEN_WAYPOINTS.encode("ascii")


def test_gcode_golden(tmp_path, two_waypoints):
    path = tmp_path / "toolpath.nc"
    export_toolpath(two_waypoints, str(path), "gcode-like")
    assert path.read_bytes() == GOLDEN_GCODE.encode("ascii")


@pytest.mark.parametrize("format", ["waypoint-text", "gcode-like"])
def test_round_trip(tmp_path, format):
    theta = 2.0 * np.pi * np.arange(128) / 128
    points = np.stack([30.0 * np.cos(theta), 22.0 * np.sin(theta), 3.0 * np.cos(theta)], axis=1)
    frame = PlaneFrame([0.0, 0.0, 0.0], [0.0, 0.0, 1.0], [1.0, 0.0, 0.0], frame="CT")
    original = generate_toolpath(fit_spline(points, 32), frame)
    path = tmp_path / "toolpath.txt"
    export_toolpath(original, str(path), format)
    loaded = load_toolpath(str(path))
    assert loaded.frame == "CT"
    assert loaded.tool == original.tool
    np.testing.assert_allclose(loaded.positions, original.positions, atol=1e-6)
    np.testing.assert_allclose(loaded.axes, original.axes, atol=2e-6)


def test_empty_toolpath_not_written(tmp_path):
    empty = Toolpath(np.zeros((0, 3)), np.zeros((0, 3)), ToolParams(), [0, 0, 1], [0, 0, 0], 0.5, "CT")
    path = tmp_path / "empty.txt"
    with pytest.raises(EmptyToolpathError):
        export_toolpath(empty, str(path))
    assert not path.exists()


def test_unwritable_path(tmp_path, two_waypoints):
    with pytest.raises(MeshIoError):
        export_toolpath(two_waypoints, str(tmp_path / "missing" / "toolpath.txt"))
