import numpy as np
import pytest

from cranioresize.contour import PlaneFrame
from cranioresize.customerror import ProjectionMissError, TooFewPointsError
from cranioresize.evaluation.specimen import SpecimenParams, generate_specimen
from cranioresize.meshcore.primitives import plate
from cranioresize.toolpath import fit_spline, project_spline_to_surface

FLAT = PlaneFrame([0.0, 0.0, 0.0], [0.0, 0.0, 1.0], [1.0, 0.0, 0.0])


def circle(radius, count=256, z=0.0):
    theta = 2.0 * np.pi * np.arange(count) / count
    return np.stack([radius * np.cos(theta), radius * np.sin(theta), np.full(count, z)], axis=1)


class TestFitSpline:

    def test_circle_with_sixteen_controls(self):
        spline = fit_spline(circle(25.0), 16)
        dense = spline(np.linspace(0.0, spline.period, 4096))
        deviation = np.abs(np.linalg.norm(dense[:, :2], axis=1) - 25.0)
        assert deviation.max() < 0.05

    def test_interpolates_all_points(self):
        points = circle(25.0, 40) + np.random.default_rng(0).normal(scale=0.5, size=(40, 3))
        spline = fit_spline(points, 40)
        np.testing.assert_allclose(spline(spline.knots[:-1]), points, atol=1e-9)

    def test_closed_and_smooth(self):
        spline = fit_spline(circle(10.0, 64), 12)
        np.testing.assert_allclose(spline(0.0), spline(spline.period - 1e-12), atol=1e-9)
        np.testing.assert_allclose(spline.derivative(0.0), spline.derivative(spline.period - 1e-12), atol=1e-9)

    def test_duplicate_closing_point_ignored(self):
        points = circle(10.0, 32)
        spline = fit_spline(np.vstack([points, points[:1]]), 32)
        assert len(spline.control_points) == 32

    def test_too_few_controls(self):
        with pytest.raises(TooFewPointsError):
            fit_spline(circle(25.0), 3)

    def test_uniform_samples_are_evenly_spaced(self):
        spline = fit_spline(circle(25.0), 32)
        samples = spline.sample_uniform(200)
        chords = np.linalg.norm(np.roll(samples, -1, axis=0) - samples, axis=1)
        assert chords.max() - chords.min() < 1e-3


class TestProjection:

    def test_points_on_surface_stay(self):
        implant = plate(40.0, 2.0, 20)
        spline = fit_spline(circle(5.0, 64, z=2.0), 16)
        projected = project_spline_to_surface(spline, implant, FLAT)
        assert np.max(np.abs(projected.control_points - spline.control_points)) < 1e-6

    def test_planar_projection_upward(self):
        implant = plate(40.0, 2.0, 20)
        spline = fit_spline(circle(5.0, 64, z=0.0), 16)
        projected = project_spline_to_surface(spline, implant, FLAT)
        np.testing.assert_allclose(projected.control_points[:, 2], 2.0, atol=1e-12)
        np.testing.assert_allclose(projected.control_points[:, :2], spline.control_points[:, :2], atol=1e-12)

    def test_spherical_cap(self):
        specimen = generate_specimen(3, SpecimenParams(harmonic_amplitudes=[]), with_scan=False)
        implant = specimen.oversized_implant
        spline = fit_spline(circle(20.0, 128, z=100.0), 32)
        projected = project_spline_to_surface(spline, implant, FLAT)
        expected = np.sqrt(80.0 ** 2 - 20.0 ** 2)
        assert np.max(np.abs(projected.control_points[:, 2] - expected)) < implant.mean_edge_length

    def test_closest_mode(self):
        implant = plate(40.0, 2.0, 20)
        spline = fit_spline(circle(5.0, 64, z=3.0), 16)
        projected = project_spline_to_surface(spline, implant, FLAT, mode="closest")
        np.testing.assert_allclose(projected.control_points[:, 2], 2.0, atol=1e-12)

    def test_outside_footprint(self):
        implant = plate(40.0, 2.0, 20)
        spline = fit_spline(circle(100.0, 64), 16)
        with pytest.raises(ProjectionMissError):
            project_spline_to_surface(spline, implant, FLAT)
