import json
import os

import numpy as np
import pytest

from cranioresize.customerror import ConfigError, StageError
from cranioresize.pipeline import (
    STAGE_NAMES, load_config, pipeline_stages, run_pipeline, run_stage, sha256_file, synthesize)
from cranioresize.registration import load_transform

ARTIFACTS = {
    "outer_ct.ply", "scan_to_ct.txt", "registered_scan.ply", "contour_model.txt", "toolpath.txt",
    "resized_implant.ply", "gap_report.txt"}


def without_timings(manifest):
    stripped = json.loads(json.dumps(manifest, default=float))
    for record in stripped["stages"]:
        record.pop("seconds")
    return stripped


@pytest.fixture(scope="module")
def demo(tmp_path_factory):
    directory = tmp_path_factory.mktemp("specimen")
    config = load_config(synthesize(2, str(directory)))
    manifest = run_pipeline(config)
    return directory, config, manifest


def test_stage_order():
    assert STAGE_NAMES == ("extract-outer", "register", "contour", "toolpath", "simulate-cut", "evaluate")


def test_writes_seven_artifacts(demo):
    _, config, manifest = demo
    assert set(manifest["artifacts"]) == ARTIFACTS
    for name, digest in manifest["artifacts"].items():
        assert sha256_file(os.path.join(config.out_dir, name)) == digest
    with open(os.path.join(config.out_dir, "manifest.json"), encoding="utf-8") as file:
        assert json.load(file) == json.loads(json.dumps(manifest, default=float))


def test_manifest_contents(demo):
    _, config, manifest = demo
    assert manifest["config"]["seed"] == 2
    assert manifest["config"]["scan_mesh"] == config.scan_mesh
    assert [record["name"] for record in manifest["stages"]] == list(STAGE_NAMES)
    assert {"cranioresize", "numpy", "scipy", "trimesh"} <= set(manifest["versions"])


def test_resized_implant_fits(demo):
    _, _, manifest = demo
    report = manifest["stages"][-1]["summary"]
    assert report["count"] == 360
    assert report["mean_abs_gap"] < 0.5


def test_registration_recovers_truth(demo):
    directory, config, _ = demo
    estimate = load_transform(os.path.join(config.out_dir, "scan_to_ct.txt"))
    truth = load_transform(os.path.join(str(directory), "scan_to_ct_truth.txt"))
    residual = truth.inverse() @ estimate
    assert np.degrees(residual.rotation_angle) < 1.0
    assert np.linalg.norm(residual.translation) < 1.0


def test_rerun_is_deterministic(demo):
    _, config, manifest = demo
    assert without_timings(run_pipeline(config)) == without_timings(manifest)


def test_missing_scan_writes_nothing(demo, tmp_path):
    _, config, _ = demo
    out_dir = tmp_path / "out"
    broken = config.model_copy(update={"scan_mesh": str(tmp_path / "missing.ply"), "out_dir": str(out_dir)})
    with pytest.raises(ConfigError) as raised:
        run_pipeline(broken)
    assert raised.value.exit_code == 2
    assert not out_dir.exists()


def test_stage_needs_previous_artifact(demo, tmp_path):
    _, config, _ = demo
    with pytest.raises(ConfigError):
        run_stage("contour", config.model_copy(update={"out_dir": str(tmp_path)}))


def test_unknown_stage(demo):
    with pytest.raises(ConfigError):
        run_stage("mill", demo[1])


def test_stage_error_keeps_cause(demo, tmp_path):
    _, config, _ = demo
    (tmp_path / "contour_model.txt").write_text("not a curve model\n", encoding="utf-8")
    with pytest.raises(StageError) as raised:
        run_stage("toolpath", config.model_copy(update={"out_dir": str(tmp_path)}))
    assert raised.value.stage == "toolpath"
    assert raised.value.exit_code == 3
    assert "ParseError" in str(raised.value)


def test_optional_stages(demo):
    _, config, _ = demo
    names = [stage.name for stage in pipeline_stages(config.model_copy(update={"simulate_cut": False}))]
    assert "simulate-cut" not in names and "evaluate" in names
    names = [stage.name for stage in pipeline_stages(config.model_copy(update={"defect_mesh": None}))]
    assert names[-1] == "simulate-cut"
