import os
import tempfile
import unittest

import pytest

from cranioresize.customerror import ConfigError
from cranioresize.pipeline import PipelineConfig, check_inputs, format_config, load_config, save_config

DEMO = """\
[paths]
scan_mesh = scan.ply
ct_mesh = /data/ct_model.ply
out_dir = results

[contour]
curvature_threshold =
fit_degree = 6

[toolpath]
tool_radius = 2.5
projection_mode = closest

[evaluation]
write_csv = true

[run]
seed = 7
"""


def write(path, text):
    path.write_text(text, encoding="utf-8")
    return str(path)


class TestLoadConfig(unittest.TestCase):

    def setUp(self):
        self.directory = tempfile.TemporaryDirectory()
        self.root = self.directory.name
        self.path = os.path.join(self.root, "pipeline.ini")
        with open(self.path, "w", encoding="utf-8") as file:
            file.write(DEMO)

    def tearDown(self):
        self.directory.cleanup()

    def test_values_from_file(self):
        config = load_config(self.path)
        self.assertEqual(config.tool_radius, 2.5)
        self.assertEqual(config.fit_degree, 6)
        self.assertEqual(config.projection_mode, "closest")
        self.assertTrue(config.write_csv)
        self.assertEqual(config.seed, 7)

    def test_relative_paths_follow_config_file(self):
        config = load_config(self.path)
        self.assertEqual(config.scan_mesh, os.path.join(self.root, "scan.ply"))
        self.assertEqual(config.out_dir, os.path.join(self.root, "results"))
        self.assertEqual(config.ct_mesh, os.path.normpath("/data/ct_model.ply"))

    def test_empty_value_is_none(self):
        self.assertIsNone(load_config(self.path).curvature_threshold)

    def test_defaults_for_missing_keys(self):
        config = load_config(self.path)
        self.assertEqual(config.tilt_angle, 20.0)
        self.assertEqual(config.n_ctrl, 32)
        self.assertIsNone(config.implant_mesh)

    def test_overrides_win(self):
        config = load_config(self.path, {"tool_radius": "3.5", "seed": 11, "fit_degree": None})
        self.assertEqual(config.tool_radius, 3.5)
        self.assertEqual(config.seed, 11)
        self.assertEqual(config.fit_degree, 6)

    def test_round_trip(self):
        config = load_config(self.path)
        copy_path = os.path.join(self.root, "copy.ini")
        save_config(config, copy_path)
        self.assertEqual(load_config(copy_path), config)


def test_defaults_without_file(tmp_path):
    config = load_config(base_dir=str(tmp_path))
    assert config.out_dir == os.path.join(str(tmp_path), "out")
    assert config.tool_radius == 3.0
    assert config.simulate_cut is True


@pytest.mark.parametrize("text", [
    "[toolpath]\nspindle_speed = 1000\n",
    "[robot]\nhost = localhost\n",
    "[contour]\ntool_radius = 2.0\n",
    "tool_radius = 2.0\n",
])
def test_malformed_files(tmp_path, text):
    with pytest.raises(ConfigError):
        load_config(write(tmp_path / "bad.ini", text))


@pytest.mark.parametrize("overrides", [
    {"tilt_angle": "60"},
    {"tool_radius": "0"},
    {"trim_fraction": "1.0"},
    {"projection_mode": "nearest"},
    {"toolpath_format": "dxf"},
    {"max_iters": "many"},
    {"unknown_key": "1"},
])
def test_invalid_values(overrides):
    with pytest.raises(ConfigError) as raised:
        load_config(overrides=overrides)
    assert raised.value.exit_code == 2


def test_missing_file():
    with pytest.raises(ConfigError):
        load_config("/nonexistent/pipeline.ini")


def test_check_inputs(tmp_path):
    scan = tmp_path / "scan.ply"
    scan.write_bytes(b"ply\n")
    config = PipelineConfig(scan_mesh=str(scan), ct_mesh=str(tmp_path / "missing.ply"))
    check_inputs(config, ["scan_mesh"])
    with pytest.raises(ConfigError):
        check_inputs(config, ["ct_mesh"])
    with pytest.raises(ConfigError):
        check_inputs(config, ["implant_mesh"])


def test_parameter_models():
    config = PipelineConfig(seed=5, trim_fraction=0.1, tool_radius=2.0, neighbors=4)
    assert config.icp_params().seed == 5
    assert config.icp_params().trim_fraction == 0.1
    assert config.tool_params().tool_radius == 2.0
    assert config.cleanup_params().neighbors == 4


def test_format_writes_every_section():
    text = format_config(PipelineConfig(reject_outliers=True))
    for section in ("[paths]", "[registration]", "[contour]", "[toolpath]", "[calibration]", "[evaluation]",
                    "[run]"):
        assert section in text
    assert "reject_outliers = true" in text
    assert "scan_mesh =\n" in text
