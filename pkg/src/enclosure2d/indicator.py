"""Indicator functionals built from one boundary measurement.

The probe family pairs the measured current with complex exponentials
whose modulus grows in a chosen direction.  The log-magnitude of the
pairing, swept over the growth rate tau, carries the support of the
hidden region in its slope; everything here evaluates those pairings
with explicit error control and fits the slope with an algebraic
correction term.

All exponentially scaled quantities travel as ScaledComplex, pre-scaled
by exp(-tau * s0) with s0 the boundary support in the probe direction,
so no intermediate ever overflows.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .boundary import infer_trace
from .errors import (
    ContractViolationError,
    GeometryError,
    InternalConsistencyError,
    NotBandLimitedError,
    QuadratureError,
    UndefinedRegimeError,
)
from .forward import BoundaryMeasurement, ConductorSolution, MaterialSpec, solve_neumann
from .geometry import Direction, EllipseDomain, PointPair, PolygonRegion
from .moments import condition_vertical, coefficients
from .scaled import ScaledComplex

_FMT = "%.17g"
_EPS = 2.2e-16
DEFAULT_RTOL = 1e-7
TRACE_RTOL = 1e-3
FLOOR_GUARD = 10.0
VERTICAL_TOLERANCE = 1e-8
CONDITION_THRESHOLD = 1e-8


@dataclass(frozen=True)
class SlopeEstimate:
    """Fitted growth rate of log|pairing| in tau.

    The fit model is ``s * tau + c * log(tau) + d``; the logarithmic term
    absorbs the algebraic prefactor of the pairing, which otherwise
    biases the slope at moderate tau.  ``window`` is the tau range the
    fit actually used after trimming.
    """

    value: float
    stderr: float
    window: tuple[float, float]
    algebraic_correction: bool
    samples_used: int
    excluded_dips: int

    @property
    def reliable(self) -> bool:
        return self.excluded_dips == 0 and math.isfinite(self.stderr)


@dataclass(frozen=True)
class IndicatorTrace:
    """Samples of one indicator functional along a tau schedule.

    ``samples`` rows are (tau, log-magnitude, phase); the log-magnitude is
    absolute (scale included).  Refused quadratures are dropped from the
    samples and recorded in ``warnings``.
    """

    direction: Direction
    regime: str
    samples: tuple[tuple[float, float, float], ...]
    warnings: tuple[str, ...] = ()

    def __post_init__(self):
        rows = tuple((float(t), float(m), float(p)) for t, m, p in self.samples)
        taus = [r[0] for r in rows]
        if any(t2 <= t1 for t1, t2 in zip(taus, taus[1:])):
            raise ValueError("tau samples must be strictly increasing")
        if not all(math.isfinite(v) for row in rows for v in row):
            raise ValueError("indicator samples must be finite")
        object.__setattr__(self, "samples", rows)
        object.__setattr__(self, "warnings", tuple(str(w) for w in self.warnings))

    @property
    def taus(self) -> np.ndarray:
        return np.array([r[0] for r in self.samples])

    @property
    def log_magnitudes(self) -> np.ndarray:
        return np.array([r[1] for r in self.samples])

    def save(self, path) -> None:
        lines = [
            "# enclosure indicator trace",
            f"# direction {_FMT % self.direction.ox} {_FMT % self.direction.oy}",
            f"# regime {self.regime}",
        ]
        lines += [f"# warning {w}" for w in self.warnings]
        lines.append("# columns: tau logmag phase")
        lines += [f"{_FMT % t} {_FMT % m} {_FMT % p}" for t, m, p in self.samples]
        Path(path).write_text("\n".join(lines) + "\n")

    @staticmethod
    def load(path) -> "IndicatorTrace":
        direction = None
        regime = "generic"
        warn: list[str] = []
        rows: list[tuple[float, float, float]] = []
        for raw in Path(path).read_text().splitlines():
            line = raw.strip()
            if not line:
                continue
            if line.startswith("#"):
                body = line[1:].strip()
                if body.startswith("direction"):
                    _, sx, sy = body.split()
                    direction = Direction(float(sx), float(sy))
                elif body.startswith("regime"):
                    regime = body.split(None, 1)[1]
                elif body.startswith("warning"):
                    warn.append(body.split(None, 1)[1])
                continue
            t, m, p = line.split()
            rows.append((float(t), float(m), float(p)))
        if direction is None:
            raise ValueError("indicator trace file lacks the direction header")
        return IndicatorTrace(direction, regime, tuple(rows), tuple(warn))


def _probe_samples(meas: BoundaryMeasurement, direction: Direction, tau: float):
    """Scaled probe and geometry factors on the measurement grid."""
    theta = meas.theta
    a, b = meas.a, meas.b
    w = complex(direction.ox, direction.oy)
    zbar = a * np.cos(theta) - 1j * b * np.sin(theta)
    support = meas.domain.boundary_support(direction)
    probe = np.exp(tau * zbar * w - tau * support)
    return theta, probe, support, w


def _certified_sum(
    values: np.ndarray,
    n: int,
    rtol: float,
    label: str,
    data_accuracy: float | None = None,
) -> complex:
    """Trapezoid total of pre-scaled periodic samples with honest refusal.

    Compares the full grid against its half-resolution subsampling and adds
    a roundoff floor proportional to the absolute sample mass; if the
    certificate fails the sum is refused rather than returned degraded.

    ``data_accuracy`` is the relative error bound of the sampled data when
    one is known.  A pairing that cancels down to that error carries no
    information however well it is integrated, so such totals are refused
    as well.
    """
    full = np.sum(values) * (2.0 * math.pi / n)
    half = np.sum(values[::2]) * (2.0 * math.pi / (n // 2))
    diff = abs(full - half)
    mean_mag = float(np.mean(np.abs(values))) * 2.0 * math.pi
    roundoff = 8.0 * _EPS * math.log2(n) * mean_mag
    if diff + roundoff > rtol * abs(full):
        raise QuadratureError(
            f"{label}: grid sum uncertified, diff {diff:.3e} + roundoff "
            f"{roundoff:.3e} exceeds {rtol:.1e} x |{abs(full):.3e}|; "
            "cancellation may exceed the sampled data"
        )
    if data_accuracy is not None and abs(full) < FLOOR_GUARD * data_accuracy * mean_mag:
        raise QuadratureError(
            f"{label}: total {abs(full):.3e} sits below the measurement accuracy "
            f"floor {data_accuracy:.1e} x mass {mean_mag:.3e}; the pairing has "
            "cancelled into the data error"
        )
    return full


def flux_moment(
    meas: BoundaryMeasurement,
    direction: Direction,
    tau: float,
    rtol: float = DEFAULT_RTOL,
) -> ScaledComplex:
    """Pairing of the measured current with the exponential probe.

    Computes the arc integral of flux times exp(tau (x1 - i x2) W) and
    returns it in split form, pre-scaled by the boundary support.  The
    fixed-grid quadrature is certified against its half-grid subsampling;
    an uncertifiable value raises QuadratureError instead of degrading.
    """
    if not tau > 0.0:
        raise ValueError(f"tau must be positive, got {tau}")
    theta, probe, support, _ = _probe_samples(meas, direction, tau)
    values = meas.flux * probe * meas.domain.speed(theta)
    total = _certified_sum(values, meas.grid_size, rtol, "flux pairing", meas.accuracy)
    return ScaledComplex.make(total, tau * support)


def trace_pairing(
    meas: BoundaryMeasurement,
    direction: Direction,
    tau: float,
    rtol: float = DEFAULT_RTOL,
) -> ScaledComplex:
    """Arc integral of the voltage against the probe's normal derivative.

    Uses the factorization of the probe's normal derivative through the
    complex line element, so only smooth quantities are sampled.
    """
    if not tau > 0.0:
        raise ValueError(f"tau must be positive, got {tau}")
    theta, probe, support, w = _probe_samples(meas, direction, tau)
    a, b = meas.a, meas.b
    line = b * np.cos(theta) - 1j * a * np.sin(theta)
    values = meas.voltage * probe * line
    total = _certified_sum(values, meas.grid_size, rtol, "voltage pairing", meas.accuracy)
    return ScaledComplex.make(tau * w * total, tau * support)


def classical_indicator(
    meas: BoundaryMeasurement,
    direction: Direction,
    tau: float,
    shift: float = 0.0,
    rtol: float = DEFAULT_RTOL,
) -> ScaledComplex:
    """Current pairing minus conductivity times the voltage pairing.

    Vanishes identically for an intact conductor, so its growth isolates
    the hidden region; its decay rate stays meaningful even when the
    region sits in the probe's shadow.  The combination is integrated as
    one certified sum, never as a difference of separately certified
    integrals, because the two pairings cancel to many digits and a
    difference would inherit both absolute errors.  Needs the background
    conductivity; measurements that withhold it cannot form this.
    ``shift`` moves the probe's reference line, which multiplies the
    value by exp(-tau * shift) exactly.
    """
    if meas.conductivity is None:
        raise ContractViolationError(
            "classical indicator needs the background conductivity; "
            "this measurement withholds it"
        )
    if not tau > 0.0:
        raise ValueError(f"tau must be positive, got {tau}")
    theta, probe, support, w = _probe_samples(meas, direction, tau)
    a, b = meas.a, meas.b
    line = b * np.cos(theta) - 1j * a * np.sin(theta)
    combined = meas.flux * meas.domain.speed(theta) - meas.conductivity * tau * w * meas.voltage * line
    total = _certified_sum(
        combined * probe, meas.grid_size, rtol, "background-free pairing", meas.accuracy
    )
    return ScaledComplex.make(total, tau * support - tau * shift)


def probe_trace(
    meas: BoundaryMeasurement,
    direction: Direction,
    taus,
    rtol: float = TRACE_RTOL,
    regime: str = "generic",
    subtract_background: bool = False,
) -> IndicatorTrace:
    """Evaluate an indicator on a tau schedule, skipping refused samples.

    With ``subtract_background`` the classical background-free pairing is
    sampled instead of the raw current pairing; that needs the measurement
    to disclose its conductivity.  The default certification tolerance is
    looser here than for single pairing values: a magnitude certified to
    one part in a thousand perturbs the fitted log by at most 1e-3, while
    insisting on more would refuse the deep-tau samples that carry the
    growth rate.
    """
    rows: list[tuple[float, float, float]] = []
    warnings: list[str] = []
    for tau in taus:
        try:
            if subtract_background:
                val = classical_indicator(meas, direction, float(tau), rtol=rtol)
            else:
                val = flux_moment(meas, direction, float(tau), rtol)
        except QuadratureError:
            warnings.append(f"tau {tau:.6g}: quadrature refused, sample dropped")
            continue
        if val.is_zero:
            warnings.append(f"tau {tau:.6g}: pairing vanished, sample dropped")
            continue
        rows.append((float(tau), val.log_abs, val.phase))
    return IndicatorTrace(direction, regime, tuple(rows), tuple(warnings))


def discrete_tau_sequence(domain: EllipseDomain, l_max: int, l_min: int = 1) -> tuple[float, ...]:
    """Growth rates at which vertical probing of an ellipse is meaningful.

    Vertical probes resonate with the focal chord; only the arithmetic
    sequence pi/c, 2 pi/c, ... (c the focal half-distance) avoids the
    oscillation zeros.  Undefined on a circle, whose foci coincide.
    """
    if domain.is_circle:
        raise UndefinedRegimeError(
            "vertical probing needs distinct foci; the domain is a circle"
        )
    c = domain.focal_distance
    if l_min < 1:
        raise ValueError(f"l_min must be >= 1, got {l_min}")
    return tuple(l * math.pi / c for l in range(l_min, l_max + 1))


def vertical_indicator(
    meas: BoundaryMeasurement,
    sign: int,
    l_max: int = 40,
    l_min: int = 1,
    rtol: float = TRACE_RTOL,
    subtract_background: bool = False,
) -> IndicatorTrace:
    """Current pairing along the vertical probe at its discrete tau ladder.

    ``sign`` picks the direction (0, +1) or (0, -1).  The pairing decays
    like the region's vertical support only when a computable functional
    of the voltage data is nonzero; a vanishing functional is reported as
    a warning on the returned trace, not an error, since nearby data may
    still be informative.
    """
    if sign not in (1, -1):
        raise ValueError(f"sign must be +1 or -1, got {sign}")
    domain = meas.domain
    taus = discrete_tau_sequence(domain, l_max, l_min)
    direction = Direction(0.0, float(sign))
    warnings: list[str] = []
    try:
        trace = infer_trace(meas.voltage)
        cond = condition_vertical(domain, trace, sign)
        scale = coefficients(domain, trace).scale
        if abs(cond) <= CONDITION_THRESHOLD * scale:
            warnings.append(
                f"vanishing-condition: vertical functional {abs(cond):.3e} is below "
                f"{CONDITION_THRESHOLD:.1e} x {scale:.3e}; the decay rate may not "
                "reflect the region support"
            )
    except NotBandLimitedError:
        warnings.append("condition unverified: voltage data is not band-limited")
    base = probe_trace(
        meas,
        direction,
        taus,
        rtol,
        regime="discrete-vertical",
        subtract_background=subtract_background,
    )
    return IndicatorTrace(
        direction, "discrete-vertical", base.samples, tuple(warnings) + base.warnings
    )


def slope_fit(
    trace: IndicatorTrace,
    min_samples: int = 8,
    min_ratio: float = 3.0,
    cond_limit: float = 1e8,
    dip_rtol: float = 1e-12,
) -> SlopeEstimate:
    """Fit s * tau + c * log(tau) + d to the upper part of a trace.

    Preconditions: at least ``min_samples`` samples spanning a tau ratio
    of ``min_ratio``.  The fit uses the upper half of the logarithmic tau
    range, drops samples that dip more than ``dip_rtol`` relative below
    the window maximum (oscillation zeros), and then trims from the left
    until the design matrix condition number is acceptable.
    """
    taus = trace.taus
    mags = trace.log_magnitudes
    if taus.size < min_samples:
        raise ValueError(f"need at least {min_samples} samples, got {taus.size}")
    ratio = taus[-1] / taus[0]
    if ratio < min_ratio:
        raise ValueError(f"tau range ratio {ratio:.3g} is below {min_ratio}")

    cut = math.sqrt(taus[0] * taus[-1])
    keep = taus >= cut
    taus, mags = taus[keep], mags[keep]
    floor = float(np.max(mags)) + math.log(dip_rtol)
    dips = mags < floor
    excluded = int(np.count_nonzero(dips))
    taus, mags = taus[~dips], mags[~dips]
    if taus.size < 4:
        raise ValueError(
            f"only {taus.size} usable samples remain in the fit window after "
            f"excluding {excluded} dips"
        )

    start = 0
    design = np.column_stack([taus, np.log(taus), np.ones_like(taus)])
    while taus.size - start > 4 and np.linalg.cond(design[start:]) > cond_limit:
        start += 1
    x = design[start:]
    y = mags[start:]
    t = taus[start:]
    beta, _, _, _ = np.linalg.lstsq(x, y, rcond=None)
    resid = y - x @ beta

    # The magnitude of competing growth contributions dips below its
    # envelope and never rises above it, so when enough samples survive,
    # refit on the upper residual half: beats stop dragging the rate
    # down, while a clean exponential is left essentially unchanged.
    upper = resid >= np.median(resid)
    if int(np.count_nonzero(upper)) >= 6 and t[upper][-1] >= 1.5 * t[upper][0]:
        x, y, t = x[upper], y[upper], t[upper]
        beta, _, _, _ = np.linalg.lstsq(x, y, rcond=None)
        resid = y - x @ beta

    dof = y.size - 3
    if dof > 0:
        sigma2 = float(resid @ resid) / dof
        cov = sigma2 * np.linalg.inv(x.T @ x)
        stderr = math.sqrt(max(cov[0, 0], 0.0))
    else:
        stderr = math.inf
    return SlopeEstimate(
        value=float(beta[0]),
        stderr=stderr,
        window=(float(t[0]), float(t[-1])),
        algebraic_correction=True,
        samples_used=int(y.size),
        excluded_dips=excluded,
    )


def _moment_weight(meas: BoundaryMeasurement) -> np.ndarray:
    """Common integrand weight for the polynomial-probe pairings.

    Integrating the voltage term by parts moves the probe's normal
    derivative onto the voltage data, whose theta derivative is taken
    spectrally on the uniform grid.  The result pairs every polynomial
    probe through one weight, so the pairings carry the corner structure
    of the hidden region as pure exponential modes in the polynomial
    degree.
    """
    spectrum = np.fft.rfft(meas.voltage)
    spectrum *= 1j * np.arange(spectrum.size)
    dvoltage = np.fft.irfft(spectrum, meas.grid_size)
    return meas.flux * meas.domain.speed(meas.theta) + 1j * meas.conductivity * dvoltage


def support_modes(
    meas: BoundaryMeasurement,
    direction: Direction,
    tau: float,
    orders: int = 6,
    max_modes: int = 3,
    rtol: float = TRACE_RTOL,
) -> tuple[tuple[float, complex], ...]:
    """Dominant point sources of the background-free pairing at one tau.

    Pairs the data against conjugate-polynomial multiples of the probe and
    runs a matrix pencil over the polynomial degree.  Each recovered mode
    is a point in the conductor (a corner of the hidden region, in the
    conjugate coordinate) together with its support value along the probe
    direction.  Competing corners that defeat a magnitude fit by beating
    against each other appear here as separate modes.

    Returns (support value, conjugate position) pairs sorted by descending
    support.  Raises QuadratureError when too few pairings certify.
    """
    if meas.conductivity is None:
        raise ContractViolationError(
            "mode recovery needs the background conductivity; "
            "this measurement withholds it"
        )
    theta, probe, _, w = _probe_samples(meas, direction, tau)
    a = meas.a
    zeta = (a * np.cos(theta) - 1j * meas.b * np.sin(theta)) / a
    weight = _moment_weight(meas) * probe

    moments: list[complex] = []
    term = weight.copy()
    for k in range(orders):
        try:
            moments.append(
                _certified_sum(term, meas.grid_size, rtol, f"degree-{k} pairing", meas.accuracy)
            )
        except QuadratureError:
            break
        term = term * zeta
    if len(moments) < 5:
        raise QuadratureError(
            f"only {len(moments)} polynomial pairings certify at tau {tau:.6g}; "
            "mode recovery needs at least 5"
        )

    m = np.array(moments)
    half = len(moments) // 2
    cols = len(moments) - half
    y0 = np.array([[m[i + j] for j in range(cols)] for i in range(half)])
    y1 = np.array([[m[i + j + 1] for j in range(cols)] for i in range(half)])
    u, s, vh = np.linalg.svd(y0)
    rank = int(np.sum(s >= max(1e-10 * s[0], 1e-14)))
    rank = max(1, min(rank, max_modes, half))
    ur = u[:, :rank]
    vr = vh[:rank].conj().T
    z = (ur.conj().T @ y1 @ vr) / s[:rank]
    modes = np.linalg.eigvals(z)

    modes = modes[(np.abs(modes) <= 1.02) & (np.abs(modes) >= 1e-6)]
    if modes.size == 0:
        raise QuadratureError(f"no interior modes recovered at tau {tau:.6g}")
    vander = np.vander(modes, len(moments), increasing=True).T
    amps, _, _, _ = np.linalg.lstsq(vander, m, rcond=None)
    strength = np.abs(amps) * np.linalg.norm(vander, axis=0)
    keep = strength >= 0.01 * float(np.max(strength))
    modes, amps = modes[keep], amps[keep]

    out = []
    for mode in modes:
        position = a * mode
        out.append((float((position * complex(w)).real), complex(position)))
    out.sort(key=lambda item: -item[0])
    return tuple(out)


_PENCIL_QUANTILES = (0.4, 0.55, 0.7, 0.85, 1.0)


def refined_support(
    meas: BoundaryMeasurement,
    direction: Direction,
    taus,
    orders: int = 8,
    max_modes: int = 4,
    rtol: float = TRACE_RTOL,
) -> SlopeEstimate:
    """Support of the hidden region from mode recovery at several taus.

    First certifies the background-free pairing over the requested taus to
    learn which of them the data can support, then runs the
    polynomial-degree pencil at a handful of quantiles of that surviving
    range.  The top mode's support value drifts like c/tau because the
    edges adjacent to a corner leak into its amplitude, so the drift is
    fitted and extrapolated to tau = infinity.  Points at large tau are
    weighted up since that is where the edge leakage is smallest.  Use on
    directions where magnitude fitting is confounded by competing corners;
    a clean single-corner direction gives the same answer either way.
    """
    trace = probe_trace(meas, direction, taus, rtol=rtol, subtract_background=True)
    alive = trace.taus
    points: dict[float, float] = {}
    for frac in _PENCIL_QUANTILES:
        if alive.size == 0:
            break
        tau = float(alive[min(int(frac * (alive.size - 1)), alive.size - 1)])
        if tau in points:
            continue
        try:
            modes = support_modes(meas, direction, tau, orders, max_modes, rtol=rtol)
        except QuadratureError:
            continue
        points[tau] = modes[0][0]
    if len(points) < 3:
        raise QuadratureError(
            "mode recovery certified at fewer than three taus; no stable support estimate"
        )
    ts = np.array(sorted(points))
    hs = np.array([points[t] for t in ts])
    design = np.column_stack([np.ones_like(ts), 1.0 / ts])
    beta, _, _, _ = np.linalg.lstsq(design * ts[:, None], hs * ts, rcond=None)
    resid = hs - design @ beta
    return SlopeEstimate(
        value=float(beta[0]),
        stderr=max(2.0 * float(np.max(np.abs(resid))), 0.004),
        window=(float(ts[0]), float(ts[-1])),
        algebraic_correction=False,
        samples_used=len(points),
        excluded_dips=0,
    )


def point_difference(
    domain: EllipseDomain,
    region: PolygonRegion | None,
    material: MaterialSpec,
    pair: PointPair,
    direction: Direction,
    tau: float,
    grid: int = 2048,
    target: float = 1e-6,
    max_resolution: int = 3,
) -> ScaledComplex:
    """Voltage difference between two electrodes under probe-derived current.

    Drives the conductor with the normal derivative of the exponential
    probe (which conserves charge automatically) and reads the voltage gap
    between the two boundary points.  When the probe direction is
    perpendicular to the electrode chord the gap oscillates through zeros,
    so tau must then sit on the discrete ladder pi/|P-Q| * (1/2 + 2l).
    """
    if tau < 0.0:
        raise ValueError(f"tau must be nonnegative, got {tau}")
    if tau == 0.0:
        return ScaledComplex.zero()
    p = np.array(pair.p)
    q = np.array(pair.q)
    chord = p - q
    if abs(float(chord @ direction.omega)) < 1e-8 * pair.separation:
        step = math.pi / pair.separation
        ell = round((tau / step - 0.5) / 2.0)
        nearest = step * (0.5 + 2.0 * max(ell, 0))
        if abs(tau - nearest) > 1e-6 * tau:
            raise UndefinedRegimeError(
                f"perpendicular probing is defined only on the discrete ladder; "
                f"tau {tau:.8g} is not within 1e-6 of {nearest:.8g}"
            )

    n = grid
    theta = np.linspace(0.0, 2.0 * math.pi, n, endpoint=False)
    a, b = domain.a, domain.b
    w = complex(direction.ox, direction.oy)
    support = domain.boundary_support(direction)
    zbar = a * np.cos(theta) - 1j * b * np.sin(theta)
    probe = np.exp(tau * zbar * w - tau * support)
    line = b * np.cos(theta) - 1j * a * np.sin(theta)
    speed = domain.speed(theta)
    flux = tau * w * line / speed * probe

    ds = speed * (2.0 * math.pi / n)
    total = abs(complex(np.sum(flux * ds)))
    mass = float(np.sum(np.abs(flux) * ds))
    if total > 1e-8 * max(mass, 1e-300):
        raise InternalConsistencyError(
            f"probe current failed charge conservation: {total:.3e} vs {mass:.3e}"
        )

    voltage = solve_neumann(
        domain, region, material, flux, target=target, max_resolution=max_resolution
    )
    spacing = 2.0 * math.pi / n
    gap = 0.0
    indices = []
    for pt in (pair.p, pair.q):
        ang = math.atan2(pt[1] / b, pt[0] / a) % (2.0 * math.pi)
        idx = int(round(ang / spacing)) % n
        gap = max(gap, abs(ang - spacing * round(ang / spacing)))
        indices.append(idx)
    if gap > spacing:
        raise GeometryError(
            f"electrode point snaps {gap:.3e} radians away, beyond the grid "
            f"spacing {spacing:.3e}; refine the grid"
        )
    return ScaledComplex.make(complex(voltage[indices[0]] - voltage[indices[1]]), tau * support)


def perpendicular_tau_sequence(pair: PointPair, count: int, l_min: int = 0) -> tuple[float, ...]:
    """Discrete growth rates for probes perpendicular to the electrode chord."""
    step = math.pi / pair.separation
    return tuple(step * (0.5 + 2.0 * l) for l in range(l_min, l_min + count))


def greens_identity_residual(
    solution: ConductorSolution,
    direction: Direction,
    tau: float,
    contour_nodes: int = 512,
    grid: int = 2048,
) -> float:
    """Relative defect of the boundary-interior energy identity.

    The current pairing must equal the conductivity-weighted voltage
    pairing minus a region term; the region term is transported to a
    smooth intermediate contour where the solved potential is evaluated
    without touching either layer.  The residual bundles collocation,
    quadrature, and interface-condition errors into one number.
    """
    meas = solution.measurement(grid)
    j_term = flux_moment(meas, direction, tau)
    m_term = solution.material.outer * trace_pairing(meas, direction, tau)
    if solution.region is None:
        g_term = ScaledComplex.zero()
    else:
        domain = solution.domain
        levels = [
            math.hypot(vx / domain.a, vy / domain.b) for vx, vy in solution.region.vertices
        ]
        t = 0.5 * (1.0 + max(levels))
        theta = np.linspace(0.0, 2.0 * math.pi, contour_nodes, endpoint=False)
        pts = t * domain.boundary_points(theta)
        speed = domain.speed(theta)
        normals = domain.outward_normal(theta)
        u_vals = solution.layer.evaluate(pts)
        grads = solution.layer.gradient(pts)
        du = np.einsum("ij,ij->i", grads, normals)
        w = complex(direction.ox, direction.oy)
        support = domain.boundary_support(direction)
        zbar = t * (domain.a * np.cos(theta) - 1j * domain.b * np.sin(theta))
        v_vals = np.exp(tau * zbar * w - tau * support)
        dv = tau * w * (normals[:, 0] - 1j * normals[:, 1]) * v_vals
        ds = t * speed * (2.0 * math.pi / contour_nodes)
        raw = complex(np.sum((u_vals * dv - v_vals * du) * ds))
        g_term = ScaledComplex.make(solution.material.outer * raw, tau * support)
    defect = j_term - m_term + g_term
    scale = max(j_term.log_abs, m_term.log_abs, g_term.log_abs)
    if defect.is_zero:
        return 0.0
    return math.exp(defect.log_abs - scale)
