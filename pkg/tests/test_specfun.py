"""Bessel evaluation across series, extended, and split asymptotic regimes."""

from __future__ import annotations

import cmath
import math

import mpmath
import pytest

from enclosure2d import BranchError, bessel_j, bessel_j_scaled, hankel_terms
from enclosure2d.specfun import _split_eval


def _reference(m: int, z: complex) -> complex:
    return complex(mpmath.besselj(m, mpmath.mpc(z.real, z.imag)))


def test_first_order_at_two():
    assert bessel_j(1, 2.0) == pytest.approx(0.5767248077568736, abs=1e-12)


def test_values_at_origin():
    assert bessel_j(0, 0.0) == pytest.approx(1.0, abs=1e-15)
    assert bessel_j(3, 0.0) == 0.0


@pytest.mark.parametrize("m", [0, 1, 3, 7])
@pytest.mark.parametrize("z", [2.0 + 1.0j, 10.0 - 3.0j, 25.0 + 0.0j, 28.0j])
def test_series_regime_against_mpmath(m, z):
    ref = _reference(m, z)
    assert bessel_j(m, z) == pytest.approx(ref, rel=1e-9, abs=1e-30)


@pytest.mark.parametrize("m", [0, 2, 5])
@pytest.mark.parametrize("z", [35.0 + 5.0j, 50.0j, 80.0 - 12.0j])
def test_split_regime_against_mpmath(m, z):
    """Scaled value times the exponential matches the reference."""
    w, sigma = bessel_j_scaled(m, z)
    ref = _reference(m, z)
    assert w * math.exp(sigma) == pytest.approx(ref, rel=1e-9)


def test_plain_and_scaled_agree_in_overlap():
    z = 31.0j
    w, sigma = bessel_j_scaled(0, z)
    assert w * math.exp(sigma) == pytest.approx(bessel_j(0, z), rel=1e-10)


def test_three_term_recurrence():
    z = 7.0 + 2.0j
    for m in range(1, 6):
        lhs = bessel_j(m - 1, z) + bessel_j(m + 1, z)
        rhs = (2.0 * m / z) * bessel_j(m, z)
        assert lhs == pytest.approx(rhs, rel=1e-8)


def test_generating_function_sum():
    """All orders at a real argument sum to one."""
    x = 3.7
    total = sum(bessel_j(m, x) for m in range(-40, 41))
    assert total == pytest.approx(1.0, abs=1e-8)


def test_negative_order_parity():
    z = 4.0 + 1.5j
    assert bessel_j(-3, z) == pytest.approx(-bessel_j(3, z), rel=1e-14)
    assert bessel_j(-2, z) == pytest.approx(bessel_j(2, z), rel=1e-14)


def test_negative_argument_parity():
    z = 5.0 + 2.0j
    assert bessel_j(1, -z) == pytest.approx(-bessel_j(1, z), rel=1e-14)


def test_scaled_sigma_tracks_imaginary_part():
    w, sigma = bessel_j_scaled(1, -100.0j)
    assert sigma == 100.0
    assert abs(w) == pytest.approx(0.039744153, abs=1e-8)


def test_scaled_keeps_huge_arguments_finite():
    w, sigma = bessel_j_scaled(2, 5000.0j)
    assert math.isfinite(abs(w))
    assert sigma == 5000.0
    # log magnitude agrees with the reference to float precision
    ref = mpmath.log(abs(mpmath.besselj(2, mpmath.mpc(0.0, 5000.0))))
    assert math.log(abs(w)) + sigma == pytest.approx(float(ref), rel=1e-10)


def test_scaled_requires_expansion_radius():
    with pytest.raises(ValueError, match="scaled evaluation requires"):
        bessel_j_scaled(1, 1.0)
    with pytest.raises(ValueError):
        bessel_j_scaled(0, 30.0j)


def test_scaled_folds_negative_real_parts():
    z = 40.0 + 9.0j
    w, sigma = bessel_j_scaled(1, z)
    w_neg, sigma_neg = bessel_j_scaled(1, -z)
    assert sigma_neg == sigma
    assert w_neg == pytest.approx(-w, rel=1e-14)


def test_sector_guard_rejects_near_axis_arguments():
    """The split expansion itself refuses the sector the public API folds."""
    with pytest.raises(BranchError, match="negative real axis"):
        _split_eval(0, cmath.rect(40.0, math.pi - 0.01))


def test_asymptotic_weights_first_order():
    terms = hankel_terms(1, 3)
    assert terms.order == 1
    assert terms.values == (1.0, 0.375, -0.1171875, 0.1025390625)
    assert terms.count == 4


def test_asymptotic_weights_zero_order():
    values = hankel_terms(0, 1).values
    assert values[0] == 1.0
    assert values[1] == pytest.approx(-0.125, abs=1e-15)


@pytest.mark.parametrize("m", [0, 2, 4])
def test_asymptotic_weights_product_formula(m):
    values = hankel_terms(m, 5).values
    for s in range(6):
        prod = 1.0
        for k in range(1, s + 1):
            prod *= 4.0 * m * m - (2.0 * k - 1.0) ** 2
        expected = prod / (math.factorial(s) * 8.0**s)
        assert values[s] == pytest.approx(expected, rel=1e-13, abs=1e-15)


def test_asymptotic_weights_term_cap():
    with pytest.raises(ValueError, match="term count"):
        hankel_terms(1, 20)
    with pytest.raises(ValueError, match="order"):
        hankel_terms(-1, 3)


def test_large_series_order_is_refused():
    with pytest.raises(ValueError, match="too large"):
        bessel_j(200, 5.0)
