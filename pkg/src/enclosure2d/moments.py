"""Weighted boundary moments of exponential probes and their exact forms.

The central object is the integral over the outer boundary of

    f(theta) * exp(tau * (x1 - i x2) * (omega1 + i omega2))

taken against the complex line element.  For band limited ``f`` this has a
closed form: a finite Bessel sum on a proper ellipse, a plain power series
on a circle.  Both forms are produced in split ``mantissa * exp(log_scale)``
representation because the integral grows like ``exp(tau * s0)`` with
``s0 = sqrt(a^2 w1^2 + b^2 w2^2)``.

A direct adaptive quadrature of the same integral is kept alongside as an
independent cross check; it scales the integrand by ``exp(-tau * s0)``
before summing so the refinement loop works at order-one magnitudes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import mpmath as mp

import numpy as np

from .boundary import HarmonicTrace
from .errors import CircleBranchError, InternalConsistencyError, QuadratureError
from .geometry import Direction, EllipseDomain
from .scaled import ScaledComplex
from .specfun import SERIES_RADIUS, bessel_j, bessel_j_scaled

_I_POW = (1 + 0j, 1j, -1 + 0j, -1j)
_CHECK_RTOL = 1e-12


@dataclass(frozen=True)
class MomentCoefficients:
    """Expansion weights C_0..C_{N+1} of a trace on a proper ellipse.

    The weights always sum to zero (the probe with tau = 0 integrates a
    zero-mean density); the constructor enforces this as a consistency
    check on the assembly.
    """

    domain: EllipseDomain
    trace: HarmonicTrace
    values: tuple[complex, ...]

    def __post_init__(self) -> None:
        if len(self.values) != self.trace.bandlimit + 2:
            raise InternalConsistencyError(
                f"expected {self.trace.bandlimit + 2} weights, got {len(self.values)}"
            )
        scale = max((abs(c) for c in self.values), default=0.0)
        total = sum(self.values)
        if scale > 0.0 and abs(total) > 1e-12 * scale:
            raise InternalConsistencyError(
                f"weights sum to {total}, expected 0 at scale {scale}"
            )

    @property
    def scale(self) -> float:
        """Magnitude yardstick sum(m^2 |C_m|) used to judge degeneracy."""
        return sum(m * m * abs(c) for m, c in enumerate(self.values))


def coefficients(domain: EllipseDomain, trace: HarmonicTrace) -> MomentCoefficients:
    """Assemble the Bessel expansion weights for ``trace`` on ``domain``.

    Only defined for a proper ellipse; the construction divides by a - b.
    """
    if domain.is_circle:
        raise CircleBranchError(
            "expansion weights are undefined on a circle (a == b); "
            "use the circular closed form instead"
        )
    a, b = domain.a, domain.b
    n_band = trace.bandlimit
    a_plus = 0.5 * (1.0 / a + 1.0 / b)
    a_minus = 0.5 * (1.0 / a - 1.0 / b)
    p = math.sqrt((a + b) / (a - b))
    gam = trace.gamma
    vals: list[complex] = []
    for m in range(n_band + 2):
        if m == 0:
            vals.append(a_minus * gam(-1) + a_plus * gam(1))
            continue
        plus_part = a_minus * gam(m - 1) + a_plus * gam(m + 1)
        minus_part = a_plus * gam(-(m - 1)) + a_minus * gam(-(m + 1))
        vals.append(plus_part * p**m + minus_part * p ** (-m))
    return MomentCoefficients(domain, trace, tuple(vals))


def moment_series(
    domain: EllipseDomain,
    trace: HarmonicTrace,
    direction: Direction,
    tau: float,
) -> ScaledComplex:
    """Closed-form value of the weighted boundary moment at frequency tau."""
    if tau <= 0.0:
        raise ValueError(f"tau must be positive, got {tau}")
    w = complex(direction.ox, direction.oy)
    if domain.is_circle:
        return _circle_series(domain.a, trace, w, tau)
    c = domain.focal_distance
    z = -1j * c * tau * w
    front = 2.0 * math.pi * domain.a * domain.b
    weights = coefficients(domain, trace).values
    if abs(z) <= SERIES_RADIUS:
        total = 0j
        for m, c_m in enumerate(weights):
            if c_m == 0:
                continue
            total += _I_POW[m % 4] * bessel_j(m, z) * c_m
        return ScaledComplex.make(front * total, 0.0)
    total = 0j
    sigma = abs(z.imag)
    for m, c_m in enumerate(weights):
        if c_m == 0:
            continue
        w_m, sig_m = bessel_j_scaled(m, z)
        if sig_m != sigma:
            raise InternalConsistencyError("scaled Bessel factors disagree on the exponent")
        total += _I_POW[m % 4] * w_m * c_m
    return ScaledComplex.make(front * total, sigma)


def _circle_series(a: float, trace: HarmonicTrace, w: complex, tau: float) -> ScaledComplex:
    base = a * tau * w
    term = 1.0 + 0j
    log_pull = 0.0
    total = 0j
    for m in range(trace.bandlimit):
        total += term * trace.gamma(m + 1)
        term *= base / (m + 1)
        # keep the running power from overflowing for large a*tau
        mag = abs(term)
        if mag > 1e100:
            shift = math.log(mag)
            term /= mag
            total /= mag
            log_pull += shift
    return ScaledComplex.make(2.0 * math.pi * a * total, log_pull)


def moment_quadrature(
    domain: EllipseDomain,
    trace: HarmonicTrace,
    direction: Direction,
    tau: float,
    rtol: float = 1e-10,
    start: int = 256,
    limit: int = 1 << 20,
) -> ScaledComplex:
    """Trapezoid evaluation of the weighted moment, refined until stable.

    The periodic integrand makes the trapezoid rule spectrally accurate,
    so doubling the grid until two passes agree to ``rtol`` is a reliable
    stopping rule.  The returned value carries log-scale ``tau * s0``.
    """
    if tau <= 0.0:
        raise ValueError(f"tau must be positive, got {tau}")
    a, b = domain.a, domain.b
    w = complex(direction.ox, direction.oy)
    s0 = domain.boundary_support(direction)
    previous: complex | None = None
    n = start
    while n <= limit:
        value, mean_mag = _trapezoid_pass(a, b, trace, w, tau, s0, n)
        # Sample formation and summation noise: once the (scaled) integral
        # cancels down to this level, double precision cannot certify rtol.
        roundoff = 8.0 * 2.2e-16 * math.log2(max(n, 2)) * mean_mag
        diff = math.inf if previous is None else abs(value - previous)
        if diff + roundoff <= rtol * abs(value):
            return ScaledComplex.make(value, tau * s0)
        if diff <= 4.0 * roundoff or n >= (1 << 14):
            # Converged onto the noise floor without certifying: the
            # integral is genuinely smaller than the f64 cancellation
            # error, so re-run the ladder in wide arithmetic.
            return _quadrature_mp(
                a, b, trace, w, tau, s0, n, rtol, mean_mag, abs(value)
            )
        previous = value
        n *= 2
    raise QuadratureError(
        f"quadrature did not certify {rtol} within {limit} nodes; the integrand "
        "cancellation may exceed what double precision summation can resolve"
    )


def _trapezoid_pass_mp(a, b, trace: HarmonicTrace, w, tau, s0, n: int):
    step = 2.0 * mp.pi / n
    total = mp.mpc(0)
    mass = mp.mpf(0)
    wc = mp.mpc(w.real, w.imag)
    for k in range(n):
        theta = step * k
        ct, st = mp.cos(theta), mp.sin(theta)
        f = mp.mpf(trace.alpha[0]) / 2
        for m in range(1, trace.bandlimit + 1):
            f += trace.alpha[m] * mp.cos(m * theta) + trace.beta[m] * mp.sin(m * theta)
        zbar = mp.mpc(a * ct, -b * st)
        line = mp.mpc(b * ct, -a * st)
        value = f * mp.exp(tau * (zbar * wc) - tau * s0) * line
        total += value
        mass += abs(value)
    return total * step, mass * step


def _quadrature_mp(
    a, b, trace, w, tau, s0, start: int, rtol: float, mean_mag: float, floor: float
) -> ScaledComplex:
    """Wide-precision trapezoid ladder for deeply cancelling integrands.

    The working precision is sized from the observed cancellation depth
    (mass over the f64 noise floor) so that arithmetic error sits well
    below the requested tolerance of the true value.
    """
    depth = math.log10(mean_mag / max(floor, 1e-300)) if mean_mag > 0.0 else 0.0
    dps = min(60, 25 + max(0, int(depth)))
    with mp.workdps(dps):
        previous = None
        n = max(256, min(start, 1 << 12))
        while n <= (1 << 14):
            value, mass = _trapezoid_pass_mp(a, b, trace, w, tau, s0, n)
            noise = mp.mpf(10) ** (1 - dps) * mass
            if previous is not None:
                diff = abs(value - previous)
                if diff + noise <= rtol * abs(value):
                    return ScaledComplex.make(complex(value), tau * s0)
            previous = value
            n *= 2
    raise QuadratureError(
        f"quadrature did not certify {rtol} even in wide arithmetic; the "
        "integral is indistinguishable from zero at this precision"
    )


def _trapezoid_pass(
    a: float,
    b: float,
    trace: HarmonicTrace,
    w: complex,
    tau: float,
    s0: float,
    n: int,
) -> tuple[complex, float]:
    theta = np.linspace(0.0, 2.0 * math.pi, n, endpoint=False)
    zbar = a * np.cos(theta) - 1j * b * np.sin(theta)
    line = b * np.cos(theta) - 1j * a * np.sin(theta)
    scaled_exp = np.exp(tau * (zbar * w) - tau * s0)
    values = trace.evaluate(theta) * scaled_exp * line
    total = complex(values.sum() * (2.0 * math.pi / n))
    mean_mag = float(np.mean(np.abs(values))) * 2.0 * math.pi
    return total, mean_mag


def condition_sum(domain: EllipseDomain, trace: HarmonicTrace, sign: int) -> complex:
    """Degeneracy test value sum_m sign^m m^2 C_m for a horizontal probe.

    ``sign`` is the sign of the first probe component.  Computed from the
    assembled weights and cross checked against the telescoped per-harmonic
    form; disagreement indicates an assembly bug and raises.
    """
    if sign not in (-1, 1):
        raise ValueError(f"sign must be +1 or -1, got {sign}")
    weights = coefficients(domain, trace).values
    direct = sum(
        (sign**m) * m * m * c_m for m, c_m in enumerate(weights) if m > 0
    )
    closed = -sign * _harmonic_total(domain, trace, sign)
    _check_agreement(direct, closed, weights)
    return complex(direct)


def condition_vertical(
    domain: EllipseDomain, trace: HarmonicTrace, sign: int
) -> complex:
    """Degeneracy test value for a vertical probe at the discrete frequencies.

    ``sign`` is the sign of the second probe component.  Equals
    ``sum_m m^2 (C_m(f) - i sign C_m(f~))`` where ``f~`` is the trace
    reflected through the horizontal axis.
    """
    if sign not in (-1, 1):
        raise ValueError(f"sign must be +1 or -1, got {sign}")
    weights = coefficients(domain, trace).values
    reflected = coefficients(domain, trace.reflect()).values
    direct = sum(
        m * m * (weights[m] - 1j * sign * reflected[m])
        for m in range(1, len(weights))
    )
    closed = 0j
    for j in range(1, trace.bandlimit + 1):
        t_j = _harmonic_term(domain, trace, j)
        closed += (1.0 - sign * 1j * (-1.0) ** j) * t_j
    closed *= -2.0 / (domain.a * domain.b)
    _check_agreement(direct, closed, weights)
    return complex(direct)


def _harmonic_term(domain: EllipseDomain, trace: HarmonicTrace, j: int) -> complex:
    a, b = domain.a, domain.b
    c2 = a * a - b * b
    g = trace.gamma(j)
    return j * c2 ** (-(j - 1) / 2.0) * ((a + b) ** j * g - (a - b) ** j * g.conjugate())


def _harmonic_total(domain: EllipseDomain, trace: HarmonicTrace, sign: int) -> complex:
    total = 0j
    for j in range(1, trace.bandlimit + 1):
        total += (sign**j) * _harmonic_term(domain, trace, j)
    return 2.0 * total / (domain.a * domain.b)


def _check_agreement(
    direct: complex, closed: complex, weights: tuple[complex, ...]
) -> None:
    scale = max(abs(direct), abs(closed), sum(m * m * abs(c) for m, c in enumerate(weights)))
    if scale > 0.0 and abs(direct - closed) > _CHECK_RTOL * scale:
        raise InternalConsistencyError(
            f"degeneracy sums disagree: direct {direct} vs telescoped {closed}"
        )
