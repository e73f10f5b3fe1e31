import filecmp
import os

import numpy as np
import pytest
from scipy.spatial.transform import Rotation
from typer.testing import CliRunner

from cranioresize.calibration import save_pose_samples, synthetic_pivot_poses
from cranioresize.customerror import ConfigError
from cranioresize.pipeline import STAGE_NAMES, load_config, run_pipeline
from cranioresize.pipeline.cli import app, parse_overrides
from cranioresize.registration import LandmarkSet, RigidTransform, load_transform, save_landmarks

runner = CliRunner()


def test_help():
    result = runner.invoke(app, ["--help"])
    assert result.exit_code == 0
    for name in STAGE_NAMES + ("synth", "pipeline", "pivot-calibrate", "localize"):
        assert name in result.output


def test_parse_overrides():
    assert parse_overrides(["--tool_radius", "2.5", "--tilt-angle=15", "--out_dir", "x"]) == {
        "tool_radius": "2.5", "tilt_angle": "15", "out_dir": "x"}
    with pytest.raises(ConfigError):
        parse_overrides(["--tool_radius"])
    with pytest.raises(ConfigError):
        parse_overrides(["2.5"])


@pytest.fixture(scope="module")
def specimen(tmp_path_factory):
    root = tmp_path_factory.mktemp("synth")
    result = runner.invoke(app, ["--out-dir", str(root), "--seed", "4", "synth", "--count", "1"])
    assert result.exit_code == 0, result.output
    return root / "specimen_0004"


def test_synth_writes_ready_config(specimen):
    config = load_config(str(specimen / "pipeline.ini"))
    assert config.seed == 4
    assert config.curvature_percentile == 95.0
    assert config.trim_fraction == 0.1
    assert config.scan_mesh == str(specimen / "scan.ply")
    assert config.out_dir == str(specimen / "out")


def test_chained_commands_match_pipeline(specimen, tmp_path):
    config_path = str(specimen / "pipeline.ini")
    chained, whole = tmp_path / "chained", tmp_path / "whole"
    for name in STAGE_NAMES:
        result = runner.invoke(app, ["--config", config_path, "--out-dir", str(chained), name])
        assert result.exit_code == 0, result.output

    manifest = run_pipeline(load_config(config_path, {"out_dir": str(whole)}))
    assert len(manifest["artifacts"]) == 7
    for name in manifest["artifacts"]:
        assert filecmp.cmp(chained / name, whole / name, shallow=False), name


def test_override_reaches_stage(specimen, tmp_path):
    config_path = str(specimen / "pipeline.ini")
    result = runner.invoke(app, ["--config", config_path, "--out-dir", str(tmp_path), "extract-outer"])
    assert result.exit_code == 0, result.output
    result = runner.invoke(
        app, ["--config", config_path, "--out-dir", str(tmp_path), "register", "--max_iters", "0"])
    assert result.exit_code == 2


def test_missing_config_file(tmp_path):
    result = runner.invoke(app, ["--config", str(tmp_path / "missing.ini"), "pipeline"])
    assert result.exit_code == 2


def test_missing_input_writes_nothing(tmp_path):
    config = tmp_path / "pipeline.ini"
    config.write_text("[paths]\nct_mesh = missing.ply\nout_dir = out\n", encoding="utf-8")
    result = runner.invoke(app, ["--config", str(config), "pipeline"])
    assert result.exit_code == 2
    assert not (tmp_path / "out").exists()


def test_unknown_override(tmp_path):
    result = runner.invoke(app, ["--out-dir", str(tmp_path), "pipeline", "--spindle_speed", "1000"])
    assert result.exit_code == 2


def test_data_error_exit_code(tmp_path):
    broken = tmp_path / "ct.ply"
    broken.write_text("not a mesh\n", encoding="utf-8")
    result = runner.invoke(
        app, ["--out-dir", str(tmp_path / "out"), "extract-outer", "--ct_mesh", str(broken)])
    assert result.exit_code == 3


def test_pivot_calibrate(tmp_path):
    tip = np.array([5.0, -3.0, 120.0])
    poses = synthetic_pivot_poses(tip, [400.0, 0.0, 50.0], 20, np.random.default_rng(3))
    save_pose_samples(poses, str(tmp_path / "poses.txt"))
    result = runner.invoke(
        app, ["--out-dir", str(tmp_path), "pivot-calibrate", "--pose_samples", str(tmp_path / "poses.txt")])
    assert result.exit_code == 0, result.output
    text = (tmp_path / "pivot_solution.txt").read_text(encoding="utf-8")
    assert "[pivot]" in text
    values = next(line for line in text.splitlines() if line.startswith("tip_offset="))
    np.testing.assert_allclose([float(v) for v in values.split("=")[1].split()], tip, atol=1e-6)


def test_pivot_calibrate_needs_poses(tmp_path):
    result = runner.invoke(app, ["--out-dir", str(tmp_path), "pivot-calibrate"])
    assert result.exit_code == 2


def test_localize(tmp_path):
    truth = RigidTransform(Rotation.from_euler("z", 30, degrees=True).as_matrix(), [300.0, 20.0, 10.0], "CT", "base")
    markers = np.array([[20.0, 0.0, 75.0], [-10.0, 17.0, 75.0], [-10.0, -17.0, 76.0], [0.0, 0.0, 78.0]])
    save_landmarks(LandmarkSet(markers, frame="CT"), str(tmp_path / "ct.txt"))
    save_landmarks(LandmarkSet(truth.apply(markers), frame="base"), str(tmp_path / "base.txt"))

    result = runner.invoke(app, [
        "--out-dir", str(tmp_path), "localize",
        "--implant_markers_ct", str(tmp_path / "ct.txt"), "--implant_markers_base", str(tmp_path / "base.txt")])
    assert result.exit_code == 0, result.output
    estimate = load_transform(str(tmp_path / "ct_to_base.txt"))
    np.testing.assert_allclose(estimate.matrix, truth.matrix, atol=1e-9)
    assert not os.path.exists(tmp_path / "toolpath_base.txt")
