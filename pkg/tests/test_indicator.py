"""Probe pairings, slope extraction, discrete ladders, mode recovery."""

from __future__ import annotations

import dataclasses
import math

import numpy as np
import pytest

from enclosure2d import (
    ContractViolationError,
    Direction,
    EllipseDomain,
    GeometryError,
    IndicatorTrace,
    MaterialSpec,
    PointPair,
    PolygonRegion,
    QuadratureError,
    UndefinedRegimeError,
    analytic_disc,
    classical_indicator,
    discrete_tau_sequence,
    flux_moment,
    forward_solution,
    greens_identity_residual,
    moment_series,
    perpendicular_tau_sequence,
    point_difference,
    probe_trace,
    refined_support,
    slope_fit,
    solve_cavity,
    support_function,
    support_modes,
    trace_pairing,
    vertical_indicator,
)
from enclosure2d.boundary import HarmonicTrace

UNIT_DISC = EllipseDomain(1.0, 1.0)
WIDE_ELLIPSE = EllipseDomain(2.0, 1.0)
TOP_TRIANGLE = PolygonRegion(((-0.15, 0.3), (0.15, 0.3), (0.0, 0.55)))
EAST = Direction(1.0, 0.0)
COS1 = HarmonicTrace.single(1)


class TestPairings:
    def test_flux_moment_on_analytic_cavity(self):
        """A pure first-harmonic current pairs to 0.6 pi tau W."""
        meas = analytic_disc(0.5, 1).measurement(1.0, 1024)
        for tau in (2.0, 5.0):
            value = flux_moment(meas, EAST, tau)
            assert abs(value.to_complex()) == pytest.approx(
                0.6 * math.pi * tau, rel=1e-12
            )

    def test_flux_moment_matches_direct_quadrature(self):
        """Independent trapezoid replication of the arc integral."""
        meas = analytic_disc(0.5, 1).measurement(1.0, 1024)
        tau, d = 3.0, Direction.from_angle(0.7)
        w = complex(d.ox, d.oy)
        probe = np.exp(tau * np.exp(-1j * meas.theta) * w)
        manual = np.sum(meas.flux * probe) * (2.0 * math.pi / meas.grid_size)
        value = flux_moment(meas, d, tau).to_complex()
        assert value == pytest.approx(manual, rel=1e-10)

    def test_trace_pairing_matches_direct_quadrature(self):
        """The probe's normal derivative factors through the line element."""
        meas = analytic_disc(0.5, 1).measurement(1.0, 1024)
        tau, d = 3.0, Direction.from_angle(2.1)
        w = complex(d.ox, d.oy)
        probe = np.exp(tau * np.exp(-1j * meas.theta) * w)
        manual = (
            tau * w
            * np.sum(meas.voltage * probe * np.exp(-1j * meas.theta))
            * (2.0 * math.pi / meas.grid_size)
        )
        value = trace_pairing(meas, d, tau).to_complex()
        assert value == pytest.approx(manual, rel=1e-10)

    def test_flux_moment_of_zero_current(self):
        theta = np.linspace(0.0, 2.0 * math.pi, 256, endpoint=False)
        from enclosure2d import BoundaryMeasurement

        meas = BoundaryMeasurement(1.0, 1.0, np.cos(theta), np.zeros(256),
                                   1.0, None)
        assert flux_moment(meas, EAST, 4.0).is_zero

    def test_intact_conductor_factorization(self):
        """Pairing the intact current equals gamma tau W times the moment."""
        meas = solve_cavity(WIDE_ELLIPSE, None, COS1, 1.5, grid=1024,
                            target=1e-9)
        for ang, tau in ((0.4, 3.0), (2.2, 6.0)):
            d = Direction.from_angle(ang)
            w = complex(d.ox, d.oy)
            lhs = flux_moment(meas, d, tau).to_complex()
            rhs = 1.5 * tau * w * moment_series(WIDE_ELLIPSE, COS1, d,
                                                tau).to_complex()
            assert lhs == pytest.approx(rhs, rel=1e-8)


class TestClassicalIndicator:
    def test_requires_known_conductivity(self, disc_square_measurement):
        unknown = disc_square_measurement.without_conductivity()
        with pytest.raises(ContractViolationError):
            classical_indicator(unknown, EAST, 3.0)

    def test_shift_rescales_exactly(self, disc_square_measurement):
        base = classical_indicator(disc_square_measurement, EAST, 10.0)
        shifted = classical_indicator(disc_square_measurement, EAST, 10.0,
                                      shift=0.2)
        assert shifted.ratio_log(base) == pytest.approx(-2.0, abs=1e-9)

    def test_shift_classifies_the_support(self, disc_square_measurement):
        """Shifting below the support grows, shifting above decays."""
        h = support_function(
            PolygonRegion(((0.1, -0.05), (0.4, -0.05), (0.4, 0.25),
                           (0.1, 0.25))), EAST)
        below = [classical_indicator(disc_square_measurement, EAST, tau,
                                     shift=h - 0.3).log_abs
                 for tau in (8.0, 14.0)]
        above = [classical_indicator(disc_square_measurement, EAST, tau,
                                     shift=h + 0.3).log_abs
                 for tau in (8.0, 14.0)]
        assert below[1] - below[0] > 0.5
        assert above[1] - above[0] < -0.5

    def test_refuses_when_cancellation_swamps_the_data(
            self, disc_square_measurement):
        """Far beyond the decay range the pairing is refused, not guessed."""
        with pytest.raises(QuadratureError, match="uncertified"):
            classical_indicator(disc_square_measurement, EAST, 60.0)


class TestSlopeFit:
    @staticmethod
    def _trace(taus, values):
        samples = tuple(
            (float(t), float(v), 0.0) for t, v in zip(taus, values)
        )
        return IndicatorTrace(EAST, "generic", samples, ())

    def test_recovers_exact_affine_log_model(self):
        taus = np.geomspace(2.0, 20.0, 12)
        values = 1.7 * taus - 0.5 * np.log(taus) + 2.0
        est = slope_fit(self._trace(taus, values))
        assert est.value == pytest.approx(1.7, abs=1e-9)
        assert est.stderr < 1e-9
        assert est.algebraic_correction
        assert est.samples_used == 12
        assert est.window[0] >= 2.0 and est.window[1] <= 20.0

    def test_requires_enough_samples(self):
        taus = (1.0, 2.0, 3.0)
        with pytest.raises(ValueError, match="at least 8 samples"):
            slope_fit(self._trace(taus, taus))

    def test_requires_wide_tau_span(self):
        taus = np.linspace(5.0, 6.0, 10)
        with pytest.raises(ValueError, match="ratio"):
            slope_fit(self._trace(taus, taus))

    def test_oscillation_dips_are_excluded(self):
        taus = np.geomspace(2.0, 20.0, 14)
        values = 0.9 * taus + 1.0
        values[7] -= 40.0
        est = slope_fit(self._trace(taus, values))
        assert est.excluded_dips == 1
        assert not est.reliable
        assert est.value == pytest.approx(0.9, abs=1e-6)

    def test_clean_fit_is_reliable(self):
        taus = np.geomspace(2.0, 20.0, 12)
        rng = np.random.default_rng(5)
        values = 1.2 * taus + 0.05 * rng.standard_normal(12)
        est = slope_fit(self._trace(taus, values))
        assert est.stderr >= 0.0
        assert est.reliable


class TestProbeTrace:
    def test_taus_strictly_increasing_enforced(self):
        samples = ((2.0, 0.0, 0.0), (1.0, 0.0, 0.0))
        with pytest.raises(ValueError, match="strictly increasing"):
            IndicatorTrace(EAST, "generic", samples, ())

    def test_scaling_leaves_slope_unchanged(self, disc_square_measurement):
        """Slope of the raw pairing ignores overall current scale."""
        taus = tuple(np.geomspace(2.0, 20.0, 12))
        unknown = disc_square_measurement.without_conductivity()
        d = Direction.from_angle(0.9)
        s1 = slope_fit(probe_trace(unknown, d, taus)).value
        scaled = dataclasses.replace(unknown, flux=unknown.flux * 7.3)
        s2 = slope_fit(probe_trace(scaled, d, taus)).value
        assert abs(s1 - s2) < 1e-12

    def test_save_load_round_trip(self, tmp_path, disc_square_measurement):
        unknown = disc_square_measurement.without_conductivity()
        trace = probe_trace(unknown, EAST, (2.0, 4.0, 8.0))
        path = tmp_path / "trace.txt"
        trace.save(path)
        back = IndicatorTrace.load(path)
        assert back.samples == trace.samples
        assert back.regime == trace.regime

    def test_log_magnitudes_stay_finite(self, disc_square_measurement):
        unknown = disc_square_measurement.without_conductivity()
        trace = probe_trace(unknown, EAST, tuple(np.geomspace(2.0, 30.0, 10)))
        assert np.all(np.isfinite(trace.log_magnitudes))


class TestDiscreteLadders:
    def test_vertical_ladder_spacing(self):
        taus = discrete_tau_sequence(WIDE_ELLIPSE, 3)
        root3 = math.sqrt(3.0)
        assert taus[0] == pytest.approx(math.pi / root3, abs=1e-12)
        assert taus[2] == pytest.approx(3.0 * math.pi / root3, abs=1e-12)

    def test_vertical_ladder_needs_distinct_foci(self):
        with pytest.raises(UndefinedRegimeError, match="circle"):
            discrete_tau_sequence(UNIT_DISC, 5)

    def test_point_pair_ladder_values(self):
        pair = PointPair((1.0, 0.0), (-1.0, 0.0))
        taus = perpendicular_tau_sequence(pair, 3)
        assert taus == pytest.approx(
            (math.pi / 4.0, 5.0 * math.pi / 4.0, 9.0 * math.pi / 4.0)
        )


class TestVerticalIndicator:
    @pytest.fixture(scope="class")
    def tuned_measurement(self):
        """Voltage tuned so the downward vertical functional cancels."""
        tuned = HarmonicTrace(2, (0.0, 1.0, 0.0),
                              (0.0, 0.0, -math.sqrt(3.0) / 10.0))
        return solve_cavity(WIDE_ELLIPSE, TOP_TRIANGLE, tuned, 1.0,
                            grid=1024, target=1e-6)

    def test_vanishing_functional_is_flagged(self, tuned_measurement):
        trace = vertical_indicator(tuned_measurement, -1, l_max=30)
        assert trace.warnings
        assert trace.warnings[0].startswith("vanishing-condition")

    def test_healthy_sign_is_not_flagged(self, tuned_measurement):
        trace = vertical_indicator(tuned_measurement, +1, l_max=30)
        assert not any(w.startswith("vanishing-condition")
                       for w in trace.warnings)

    def test_uncertified_rungs_are_dropped_with_warnings(
            self, tuned_measurement):
        trace = vertical_indicator(tuned_measurement, +1, l_max=30)
        assert len(trace.samples) < 30
        assert any("quadrature refused" in w for w in trace.warnings)


class TestRefinedSupport:
    def test_converges_on_the_disc_square(self, disc_square_measurement):
        est = refined_support(disc_square_measurement, EAST,
                              (5.0, 7.0, 10.0, 14.0, 20.0))
        assert est.value == pytest.approx(0.4, abs=0.03)

    def test_mode_recovery_locates_the_supporting_corner(
            self, ellipse_triangle_measurement):
        d = Direction.from_angle(1.2)
        modes = support_modes(ellipse_triangle_measurement, d, 15.0)
        target = support_function(TOP_TRIANGLE, d)
        best_h, best_pos = modes[0]
        assert best_h == pytest.approx(target, abs=0.05)
        # positions use the conjugate coordinate x1 - i x2
        assert abs(best_pos - complex(0.0, -0.55)) < 0.1

    def test_mode_recovery_refuses_starved_directions(
            self, ellipse_triangle_measurement):
        with pytest.raises(QuadratureError, match="mode recovery"):
            support_modes(ellipse_triangle_measurement,
                          Direction.from_angle(2.0), 15.0)


class TestPointDifference:
    PAIR = PointPair((1.0, 0.0), (-1.0, 0.0))
    MATERIAL = MaterialSpec(1.0, None)

    def test_zero_at_tau_zero(self):
        value = point_difference(UNIT_DISC, None, self.MATERIAL, self.PAIR,
                                 Direction.from_angle(0.5), 0.0, grid=512)
        assert value.is_zero

    def test_perpendicular_direction_requires_the_ladder(self):
        with pytest.raises(UndefinedRegimeError):
            point_difference(UNIT_DISC, None, self.MATERIAL, self.PAIR,
                             Direction(0.0, 1.0), 3.0, grid=512)

    def test_perpendicular_direction_on_ladder_is_defined(self):
        tau = perpendicular_tau_sequence(self.PAIR, 3)[1]
        value = point_difference(UNIT_DISC, None, self.MATERIAL, self.PAIR,
                                 Direction(0.0, 1.0), tau, grid=512)
        assert not value.is_zero

    def test_points_must_lie_on_the_boundary(self):
        inland = PointPair((0.5, 0.5), (1.0, 0.0))
        with pytest.raises(GeometryError):
            point_difference(UNIT_DISC, None, self.MATERIAL, inland,
                             Direction.from_angle(0.5), 3.0, grid=512)


def test_greens_residual_vanishes_for_intact_conductor():
    solution = forward_solution(UNIT_DISC, None, COS1, MaterialSpec(1.0, None),
                                grid=1024, target=1e-8)
    assert greens_identity_residual(solution, EAST, 3.0) < 1e-10
