"""Forward solvers: cavity, inclusion, Neumann drive, analytic disc oracle."""

from __future__ import annotations

import math

import numpy as np
import pytest

from enclosure2d import (
    BoundaryMeasurement,
    CompatibilityError,
    ContainmentError,
    EllipseDomain,
    MaterialSpec,
    PolygonRegion,
    analytic_disc,
    forward_solution,
    solve_cavity,
    solve_inclusion,
    solve_neumann,
)
from enclosure2d.boundary import HarmonicTrace

UNIT_DISC = EllipseDomain(1.0, 1.0)
OFFSET_SQUARE = PolygonRegion(
    ((0.1, -0.05), (0.4, -0.05), (0.4, 0.25), (0.1, 0.25))
)
COS1 = HarmonicTrace.single(1)


def _circle_polygon(radius: float, count: int) -> PolygonRegion:
    angles = np.linspace(0.0, 2.0 * math.pi, count, endpoint=False)
    return PolygonRegion(tuple((radius * math.cos(t), radius * math.sin(t))
                               for t in angles))


class TestIntactConductor:
    def test_disc_flux_is_scaled_cosine(self):
        meas = solve_cavity(UNIT_DISC, None, COS1, 1.5, grid=512, target=1e-9)
        np.testing.assert_allclose(meas.flux, 1.5 * np.cos(meas.theta),
                                   atol=1e-10)
        assert meas.conductivity == 1.5
        assert meas.accuracy is not None and meas.accuracy < 1e-9

    def test_flux_conserves_charge(self, disc_square_measurement):
        assert disc_square_measurement.conservation_defect() < 1e-8


class TestCavitySolver:
    def test_polygonized_disc_cavity_matches_analytic(self):
        """A 48-gon stand-in for a round cavity reproduces the closed form."""
        poly = _circle_polygon(0.5, 48)
        meas = solve_cavity(UNIT_DISC, poly, COS1, 1.0, grid=1024, target=1e-6)
        exact = 0.6 * np.cos(meas.theta)
        rel = np.max(np.abs(meas.flux - exact)) / 0.6
        assert rel < 2e-3

    def test_linearity_in_the_voltage(self):
        fa = HarmonicTrace.single(1)
        fb = HarmonicTrace.single(2, 0.0, 1.0)
        combo = HarmonicTrace(2, (0.0, 1.0, 0.0), (0.0, 0.0, 2.0))
        ma = solve_cavity(UNIT_DISC, OFFSET_SQUARE, fa, 1.0, grid=1024,
                          target=1e-10)
        mb = solve_cavity(UNIT_DISC, OFFSET_SQUARE, fb, 1.0, grid=1024,
                          target=1e-10)
        mc = solve_cavity(UNIT_DISC, OFFSET_SQUARE, combo, 1.0, grid=1024,
                          target=1e-10)
        scale = np.max(np.abs(mc.flux))
        np.testing.assert_allclose(mc.flux, ma.flux + 2.0 * mb.flux,
                                   atol=1e-9 * scale)

    def test_conductivity_scales_flux_exactly(self):
        base = solve_cavity(UNIT_DISC, OFFSET_SQUARE, COS1, 1.0, grid=1024,
                            target=1e-10)
        doubled = solve_cavity(UNIT_DISC, OFFSET_SQUARE, COS1, 2.0, grid=1024,
                               target=1e-10)
        np.testing.assert_array_equal(doubled.flux, 2.0 * base.flux)

    def test_region_must_stay_inside_domain(self):
        crossing = PolygonRegion(((0.0, 0.0), (1.5, 0.0), (0.5, 0.5)))
        with pytest.raises(ContainmentError):
            solve_cavity(UNIT_DISC, crossing, COS1, 1.0, grid=512)


class TestInclusionSolver:
    def test_concentric_disc_inclusion_oracle(self):
        """Two-phase disc: exterior current gains (1+mu R^2)/(1-mu R^2).

        mu = (inner-outer)/(inner+outer); for outer 1, inner 3, R = 0.5
        the factor is 9/7.
        """
        poly = _circle_polygon(0.5, 48)
        meas = solve_inclusion(UNIT_DISC, poly, COS1, MaterialSpec(1.0, 3.0),
                               grid=1024, target=1e-6)
        factor = 9.0 / 7.0
        rel = np.max(np.abs(meas.flux - factor * np.cos(meas.theta))) / factor
        assert rel < 2e-3

    def test_vanishing_contrast_recovers_intact_data(self):
        meas = solve_inclusion(UNIT_DISC, OFFSET_SQUARE, COS1,
                               MaterialSpec(1.0, 1.0 + 1e-6), grid=1024,
                               target=1e-8)
        assert np.max(np.abs(meas.flux - np.cos(meas.theta))) < 1e-6

    def test_extreme_contrast_warns(self):
        with pytest.warns(RuntimeWarning, match="contrast"):
            solve_inclusion(UNIT_DISC, OFFSET_SQUARE, COS1,
                            MaterialSpec(1.0, 2000.0), grid=512, target=1e-4,
                            max_resolution=1)


class TestMaterialSpec:
    def test_positive_conductivities_required(self):
        with pytest.raises(Exception):
            MaterialSpec(-1.0, None)

    def test_inner_must_differ_from_outer(self):
        with pytest.raises(Exception):
            MaterialSpec(2.0, 2.0)


class TestNeumannSolver:
    def test_intact_disc_voltage(self):
        theta = np.linspace(0.0, 2.0 * math.pi, 512, endpoint=False)
        voltage = solve_neumann(UNIT_DISC, None, MaterialSpec(1.0, None),
                                np.cos(theta), target=1e-8)
        np.testing.assert_allclose(voltage, np.cos(theta), atol=1e-8)

    def test_non_conserving_current_is_rejected(self):
        with pytest.raises(CompatibilityError, match="conserve"):
            solve_neumann(UNIT_DISC, None, MaterialSpec(1.0, None),
                          np.ones(512))


class TestAnalyticDiscModel:
    def test_flux_factor_and_matched_conductivity(self):
        model = analytic_disc(0.5, 1)
        assert model.flux_factor == pytest.approx(0.6, abs=1e-15)
        assert model.matched_conductivity(1.0) == pytest.approx(0.6, abs=1e-15)

    def test_matched_pair_has_identical_current(self):
        """Cavity data and the matched intact conductor agree pointwise."""
        model = analytic_disc(0.4, 2)
        meas = model.measurement(1.3, 1024)
        matched = model.matched_conductivity(1.3)
        intact = matched * 2.0 * np.cos(2.0 * meas.theta)
        np.testing.assert_allclose(meas.flux, intact, atol=1e-14)

    def test_measurement_against_polygonized_solver(self):
        model = analytic_disc(0.5, 1)
        exact = model.measurement(1.0, 1024)
        poly = _circle_polygon(0.5, 48)
        solved = solve_cavity(UNIT_DISC, poly, COS1, 1.0, grid=1024,
                              target=1e-6)
        rel = np.max(np.abs(solved.flux - exact.flux)) / np.max(np.abs(exact.flux))
        assert rel < 2e-3


class TestMeasurementType:
    def test_save_load_round_trip(self, tmp_path, disc_square_measurement):
        path = tmp_path / "measurement.txt"
        disc_square_measurement.save(path)
        back = BoundaryMeasurement.load(path)
        np.testing.assert_array_equal(back.voltage,
                                      disc_square_measurement.voltage)
        np.testing.assert_array_equal(back.flux, disc_square_measurement.flux)
        assert back.conductivity == disc_square_measurement.conductivity

    def test_without_conductivity_drops_only_gamma(self, disc_square_measurement):
        unknown = disc_square_measurement.without_conductivity()
        assert unknown.conductivity is None
        assert unknown.accuracy == disc_square_measurement.accuracy
        np.testing.assert_array_equal(unknown.flux, disc_square_measurement.flux)

    def test_grossly_non_conserving_flux_warns(self):
        theta = np.linspace(0.0, 2.0 * math.pi, 64, endpoint=False)
        with pytest.warns(RuntimeWarning, match="conservation"):
            BoundaryMeasurement(1.0, 1.0, np.cos(theta), np.ones(64), 1.0, None)

    def test_accuracy_must_be_positive(self):
        theta = np.linspace(0.0, 2.0 * math.pi, 64, endpoint=False)
        with pytest.raises(ValueError, match="accuracy"):
            BoundaryMeasurement(1.0, 1.0, np.cos(theta), np.cos(theta), 1.0,
                                -1e-9)


def test_forward_solution_interior_potential():
    """The full solution object evaluates the potential away from the boundary."""
    solution = forward_solution(UNIT_DISC, None, COS1, MaterialSpec(1.0, None),
                                grid=512, target=1e-8)
    pts = np.array([[0.3, 0.1], [-0.2, 0.4]])
    np.testing.assert_allclose(solution.potential(pts), pts[:, 0], atol=1e-8)
    assert solution.converged < 1e-8
