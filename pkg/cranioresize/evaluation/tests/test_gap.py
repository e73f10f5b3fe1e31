import unittest

import numpy as np
import pandas as pd
import pytest

from cranioresize.contour import (
    ContourPointCloud, PlaneFrame, fit_closed_polar_curve, fit_plane_frame, sample_curve, to_cylindrical)
from cranioresize.customerror import AmbiguousLoopsError, FrameMismatchError, NoBoundaryError
from cranioresize.evaluation import (
    SpecimenParams, defect_rim_loop, gap_analysis, generate_specimen, implant_loop, save_gap_report, virtual_cut)
from cranioresize.meshcore.primitives import annulus, combine, disk
from cranioresize.toolpath import fit_spline, generate_toolpath, project_spline_to_surface

FLAT = PlaneFrame([0.0, 0.0, 0.0], [0.0, 0.0, 1.0], [1.0, 0.0, 0.0], frame="CT")


def skull():
    return annulus(40.0, 60.0, 10, 256).with_frame("CT")


def implant(radius):
    return disk(radius, 10, 256).with_frame("CT")


class TestFlatGaps(unittest.TestCase):

    def test_exact_fit(self):
        report = gap_analysis(implant(40.0), skull(), FLAT)
        self.assertEqual(report.count, 360)
        self.assertLess(report.max, 1e-9)
        self.assertFalse(report.requires_trimming())

    def test_undersized_implant(self):
        report = gap_analysis(implant(38.0), skull(), FLAT)
        self.assertAlmostEqual(report.mean, 2.0, delta=0.02)
        self.assertTrue(np.all(report.gaps > 0))
        self.assertFalse(report.requires_trimming())

    def test_oversized_implant(self):
        report = gap_analysis(implant(41.0), skull(), FLAT)
        np.testing.assert_allclose(report.gaps, -1.0, atol=0.02)
        self.assertTrue(report.requires_trimming())
        self.assertFalse(report.requires_trimming(tolerance=1.5))

    def test_sample_count(self):
        report = gap_analysis(implant(39.0), skull(), FLAT, n_samples=90)
        self.assertEqual(report.count, 90)
        np.testing.assert_allclose(np.diff(report.arc_length), 2.0 * np.pi * 39.0 / 90, rtol=1e-3)


def test_rim_is_smallest_enclosing_loop():
    rim = defect_rim_loop(skull(), FLAT)
    np.testing.assert_allclose(np.hypot(rim[:, 0], rim[:, 1]), 40.0, atol=1e-9)


def test_rim_must_enclose_center():
    shifted = disk(10.0, 5, 64).transformed(np.eye(3), [100.0, 0.0, 0.0], "CT")
    with pytest.raises(NoBoundaryError):
        defect_rim_loop(shifted, FLAT)


def test_implant_without_top_face():
    with pytest.raises(NoBoundaryError):
        implant_loop(implant(40.0).flipped(), FLAT)


def test_ambiguous_rim():
    crowded = combine(annulus(40.0, 45.0, 4, 256), annulus(41.5, 60.0, 10, 256), frame="CT")
    with pytest.raises(AmbiguousLoopsError):
        gap_analysis(implant(38.0), crowded, FLAT)


def test_frame_mismatch():
    with pytest.raises(FrameMismatchError):
        gap_analysis(implant(40.0).with_frame("scan"), skull(), FLAT)


def test_report_files(tmp_path):
    report = gap_analysis(implant(38.0), skull(), FLAT, n_samples=36)
    text_path, csv_path = tmp_path / "gaps.txt", tmp_path / "gaps.csv"
    save_gap_report(report, str(text_path), str(csv_path))

    lines = text_path.read_text(encoding="utf-8").splitlines()
    assert lines[0] == "# gap report"
    assert "# count 36" in lines
    assert "# requires_trimming no" in lines
    rows = [line for line in lines if not line.startswith("#")]
    assert len(rows) == 36

    frame = pd.read_csv(csv_path)
    assert list(frame.columns) == ["s", "gap", "x", "y", "z"]
    np.testing.assert_allclose(frame["gap"], report.gaps, atol=1e-6)


def test_summary_keys():
    summary = gap_analysis(implant(41.0), skull(), FLAT).summary()
    assert summary["requires_trimming"] is True
    assert summary["min_signed_gap"] == pytest.approx(-1.0, abs=0.02)


class TestSpecimenGaps(unittest.TestCase):

    @classmethod
    def setUpClass(cls):
        cls.specimen = generate_specimen(3, SpecimenParams(), with_scan=False)
        cloud = ContourPointCloud(cls.specimen.ground_truth_contour, "CT")
        cls.frame = fit_plane_frame(cloud)

    def test_oversized_implant_overhangs(self):
        report = gap_analysis(self.specimen.oversized_implant, self.specimen.defect_skull, self.frame)
        self.assertTrue(report.requires_trimming())
        self.assertTrue(np.all(report.gaps < -4.0))

    def test_resized_implant_fits(self):
        coordinates = to_cylindrical(self.specimen.ground_truth_contour, self.frame)
        model = fit_closed_polar_curve(coordinates)
        spline = fit_spline(sample_curve(model, 256), 32, self.frame)
        spline = project_spline_to_surface(spline, self.specimen.oversized_implant, self.frame)
        toolpath = generate_toolpath(spline, self.frame)
        resized = virtual_cut(self.specimen.oversized_implant, toolpath)

        self.assertLess(resized.area, self.specimen.oversized_implant.area)
        report = gap_analysis(resized, self.specimen.defect_skull, self.frame)
        self.assertLess(report.mean, 0.25)
        self.assertLess(report.max, 0.75)
