"""Direction sweeps, support profiles, and convex-hull recovery.

A sweep probes the conductor along many directions and fits, per
direction, the growth rate of an indicator functional.  The fitted rates
sample the support function of the convex region that the boundary data
can actually pin down: the hidden region joined with the focal segment
of the domain.  Intersecting the corresponding half-planes turns the
sampled support function into a polygon, and a Hausdorff metric compares
that polygon against ground truth when the truth is known.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .boundary import infer_trace
from .errors import (
    CompatibilityError,
    ContractViolationError,
    InsufficientCoverageError,
    NotBandLimitedError,
    QuadratureError,
)
from .forward import BoundaryMeasurement
from .geometry import (
    Direction,
    EllipseDomain,
    PolygonRegion,
    convex_hull,
    focal_support,
    is_regular,
    support_function,
)
from .indicator import (
    CONDITION_THRESHOLD,
    VERTICAL_TOLERANCE,
    SlopeEstimate,
    probe_trace,
    refined_support,
    slope_fit,
    vertical_indicator,
)
from .moments import coefficients, condition_sum, condition_vertical

_FMT = "%.17g"

#: Default growth-rate schedule for generic directions.
DEFAULT_TAUS = tuple(np.geomspace(2.0, 20.0, 24))

#: Angular separation below which two half-plane normals count as parallel.
PARALLEL_TOLERANCE = 1e-9

#: Number of boundary samples per polygon in the Hausdorff comparison.
HAUSDORFF_SAMPLES = 1024


@dataclass(frozen=True)
class ConditionCheck:
    """Outcome of one degeneracy test for one driving voltage.

    ``magnitude`` is the absolute value of the tested functional and
    ``scale`` the size of the coefficients entering it; the test passes
    when the ratio clears the module-wide threshold.
    """

    trace_index: int
    name: str
    magnitude: float
    scale: float
    passed: bool


@dataclass(frozen=True)
class ProfileEntry:
    """One direction's slot in a support profile.

    ``estimate`` is the fitted growth rate and ``support`` the value the
    hull assembly uses: the fitted rate clamped from below by the focal
    support, which is the floor the data cannot see beneath.  Excluded
    directions carry a reason instead of numbers.
    """

    direction: Direction
    regime: str
    checks: tuple[ConditionCheck, ...]
    regular: bool
    estimate: SlopeEstimate | None = None
    support: float | None = None
    trace_index: int | None = None
    excluded_reason: str | None = None

    def __post_init__(self):
        if (self.excluded_reason is None) == (self.estimate is None):
            raise ValueError(
                "an entry carries either an estimate or an exclusion reason"
            )
        if self.estimate is not None and self.support is None:
            raise ValueError("estimated entries must carry a support value")

    @property
    def excluded(self) -> bool:
        return self.excluded_reason is not None

    @property
    def angle(self) -> float:
        return math.atan2(self.direction.oy, self.direction.ox) % (2.0 * math.pi)


@dataclass(frozen=True)
class SupportProfile:
    """Sampled support function of the recoverable convex set."""

    domain: EllipseDomain
    entries: tuple[ProfileEntry, ...]

    def __post_init__(self):
        object.__setattr__(self, "entries", tuple(self.entries))
        seen = set()
        for entry in self.entries:
            key = (entry.direction.ox, entry.direction.oy)
            if key in seen:
                raise ValueError(f"duplicate sweep direction {key}")
            seen.add(key)

    @property
    def usable(self) -> tuple[ProfileEntry, ...]:
        return tuple(e for e in self.entries if not e.excluded)

    @property
    def excluded(self) -> tuple[ProfileEntry, ...]:
        return tuple(e for e in self.entries if e.excluded)

    def format(self) -> str:
        """Delimited text form; the reason column is last and may hold spaces."""
        lines = [
            "# enclosure support profile",
            f"# domain {_FMT % self.domain.a} {_FMT % self.domain.b}",
            "# columns: omega_angle slope stderr regime excluded_reason",
        ]
        for e in self.entries:
            if e.estimate is None:
                slope, stderr = math.nan, math.nan
            else:
                slope, stderr = e.estimate.value, e.estimate.stderr
            reason = "-" if e.excluded_reason is None else e.excluded_reason
            lines.append(
                f"{_FMT % e.angle} {_FMT % slope} {_FMT % stderr} {e.regime} {reason}"
            )
        return "\n".join(lines) + "\n"

    def save(self, path) -> None:
        Path(path).write_text(self.format())


@dataclass(frozen=True)
class HullEstimate:
    """Convex polygon cut out by the profile's half-planes.

    ``slacks`` aligns with the profile entries that produced the hull:
    the gap between each direction's support value and the polygon's own
    support in that direction (zero for constraints that touch the
    polygon, None for excluded directions).
    """

    vertices: tuple[tuple[float, float], ...]
    slacks: tuple[float | None, ...]

    def __post_init__(self):
        verts = tuple((float(x), float(y)) for x, y in self.vertices)
        if len(verts) >= 3 and _polygon_area(verts) < 0.0:
            raise ValueError("hull vertices must wind counterclockwise")
        object.__setattr__(self, "vertices", verts)
        object.__setattr__(
            self,
            "slacks",
            tuple(None if s is None else float(s) for s in self.slacks),
        )

    def support(self, direction: Direction) -> float:
        return max(v[0] * direction.ox + v[1] * direction.oy for v in self.vertices)

    def format(self) -> str:
        lines = ["# enclosure hull estimate", "# columns: x y"]
        lines += [f"{_FMT % x} {_FMT % y}" for x, y in self.vertices]
        return "\n".join(lines) + "\n"

    def save(self, path) -> None:
        Path(path).write_text(self.format())


def _polygon_area(vertices) -> float:
    area = 0.0
    n = len(vertices)
    for i in range(n):
        x1, y1 = vertices[i]
        x2, y2 = vertices[(i + 1) % n]
        area += x1 * y2 - x2 * y1
    return 0.5 * area


def sweep_directions(count: int) -> tuple[Direction, ...]:
    """Uniform direction grid offset by half a step.

    The offset keeps the grid away from the axis directions and from any
    fixed finite set of special normals, so no direction needs a

    special-case exclusion.
    """
    if count < 1:
        raise ValueError(f"direction count must be positive, got {count}")
    return tuple(
        Direction.from_angle(2.0 * math.pi * (k + 0.5) / count) for k in range(count)
    )


def _condition_for(domain, trace, direction, vertical: bool):
    """Name, magnitude and scale of the applicable degeneracy test."""
    if vertical:
        sign = 1 if direction.oy >= 0.0 else -1
        value = condition_vertical(domain, trace, sign)
        return "vertical-functional", abs(value), coefficients(domain, trace).scale
    if domain.is_circle:
        n = trace.bandlimit
        magnitude = abs(trace.gamma(n)) if n >= 1 else 0.0
        scale = max((abs(trace.gamma(j)) for j in range(1, n + 1)), default=1.0)
        return "top-harmonic", magnitude, scale
    sign = 1 if direction.ox >= 0.0 else -1
    value = condition_sum(domain, trace, sign)
    return "weighted-sum", abs(value), coefficients(domain, trace).scale


def _sweep_one(domain, measurements, direction, taus, l_max) -> ProfileEntry:
    vertical = (not domain.is_circle) and abs(direction.ox) < VERTICAL_TOLERANCE
    regime = "discrete-vertical" if vertical else "generic"
    checks: list[ConditionCheck] = []
    chosen = None
    for idx, meas in enumerate(measurements):
        try:
            trace = infer_trace(meas.voltage)
            name, magnitude, scale = _condition_for(domain, trace, direction, vertical)
        except NotBandLimitedError:
            checks.append(ConditionCheck(idx, "band-limit", math.nan, math.nan, False))
            continue
        passed = magnitude > CONDITION_THRESHOLD * scale
        checks.append(ConditionCheck(idx, name, magnitude, scale, passed))
        if passed and chosen is None:
            chosen = idx
    if chosen is None:
        return ProfileEntry(
            direction,
            regime,
            tuple(checks),
            regular=True,
            excluded_reason="condition-vanishes: every supplied voltage fails "
            "the applicable degeneracy test",
        )
    meas = measurements[chosen]
    try:
        if vertical:
            sign = 1 if direction.oy >= 0.0 else -1
            estimate = slope_fit(vertical_indicator(meas, sign, l_max=l_max))
        elif meas.conductivity is not None:
            estimate = refined_support(meas, direction, taus)
        else:
            estimate = slope_fit(probe_trace(meas, direction, taus))
    except (QuadratureError, ValueError) as exc:
        return ProfileEntry(
            direction,
            regime,
            tuple(checks),
            regular=True,
            trace_index=chosen,
            excluded_reason=f"estimate-failed: {exc}",
        )
    support = max(estimate.value, focal_support(domain, direction))
    return ProfileEntry(
        direction,
        regime,
        tuple(checks),
        regular=True,
        estimate=estimate,
        support=support,
        trace_index=chosen,
    )


def sweep(
    domain: EllipseDomain,
    measurements,
    directions: int = 64,
    taus=None,
    l_max: int = 40,
    threads: int = 1,
) -> SupportProfile:
    """Fit a support value for each of ``directions`` uniform directions.

    ``measurements`` holds one boundary measurement per driving voltage;
    for every direction the first voltage passing the applicable
    degeneracy test is used, and a direction where every voltage fails is
    excluded with that reason rather than estimated anyway.  Vertical
    directions on a proper ellipse are probed on their discrete ladder;
    all others follow the generic route, which uses corner-mode recovery
    when the measurement discloses its conductivity and a plain
    log-magnitude fit when it does not.  The support value is the fitted
    rate clamped from below by the focal support, the floor under which
    the data carries no information.
    """
    measurements = tuple(measurements)
    if not measurements:
        raise ContractViolationError("sweep needs at least one measurement")
    for meas in measurements:
        if meas.domain != domain:
            raise CompatibilityError(
                "measurement domain does not match the sweep domain"
            )
    if taus is None:
        taus = DEFAULT_TAUS
    grid = sweep_directions(directions)

    def work(direction: Direction) -> ProfileEntry:
        return _sweep_one(domain, measurements, direction, taus, l_max)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            entries = tuple(pool.map(work, grid))
    else:
        entries = tuple(work(d) for d in grid)
    return SupportProfile(domain, entries)


def synthetic_profile(domain: EllipseDomain, supports) -> SupportProfile:
    """Profile built from externally supplied (direction, support) pairs.

    Useful for feeding exact support functions through the hull assembly
    and for tests of the intersection geometry in isolation.
    """
    entries = []
    for direction, value in supports:
        estimate = SlopeEstimate(
            value=float(value),
            stderr=0.0,
            window=(1.0, 1.0),
            algebraic_correction=False,
            samples_used=0,
            excluded_dips=0,
        )
        entries.append(
            ProfileEntry(
                direction,
                "generic",
                checks=(),
                regular=True,
                estimate=estimate,
                support=float(value),
                trace_index=0,
            )
        )
    return SupportProfile(domain, tuple(entries))


def annotate_regularity(profile: SupportProfile, region: PolygonRegion) -> SupportProfile:
    """Recompute regularity flags against a known region.

    A direction is regular when its supporting line touches the region in
    exactly one point; the sweep itself cannot know this, so it flags
    every direction regular and this helper refines the flags once the
    truth is available.
    """
    entries = tuple(
        replace(e, regular=is_regular(region, e.direction)) for e in profile.entries
    )
    return SupportProfile(profile.domain, entries)


def _clip_halfplane(poly, ox, oy, offset):
    """Keep the part of a convex polygon with x*ox + y*oy <= offset."""
    out = []
    n = len(poly)
    for i in range(n):
        px, py = poly[i]
        qx, qy = poly[(i + 1) % n]
        dp = px * ox + py * oy - offset
        dq = qx * ox + qy * oy - offset
        if dp <= 0.0:
            out.append((px, py))
        if (dp < 0.0) != (dq < 0.0):
            t = dp / (dp - dq)
            out.append((px + t * (qx - px), py + t * (qy - py)))
    return out


def intersect_halfplanes(profile: SupportProfile) -> HullEstimate:
    """Polygon cut out by the profile's per-direction support lines.

    Requires at least three usable directions whose normals do not fit in
    a closed half-circle; otherwise the intersection is a priori
    unbounded and no hull exists.  Near-parallel constraints keep the
    smaller offset, which is the binding one.
    """
    usable = [(e.angle, float(e.support)) for e in profile.usable]
    if len(usable) < 3:
        raise InsufficientCoverageError(
            f"need at least 3 usable directions, got {len(usable)}"
        )
    usable.sort()
    kept: list[tuple[float, float]] = []
    for angle, offset in usable:
        if kept and angle - kept[-1][0] < PARALLEL_TOLERANCE:
            kept[-1] = (kept[-1][0], min(kept[-1][1], offset))
        else:
            kept.append((angle, offset))
    if (
        len(kept) > 1
        and (kept[0][0] + 2.0 * math.pi) - kept[-1][0] < PARALLEL_TOLERANCE
    ):
        kept[0] = (kept[0][0], min(kept[0][1], kept.pop()[1]))
    angles = np.array([a for a, _ in kept])
    gaps = np.diff(np.concatenate([angles, [angles[0] + 2.0 * math.pi]]))
    widest = float(np.max(gaps))
    if widest >= math.pi:
        raise InsufficientCoverageError(
            "usable directions fit in a half-circle; the intersection is unbounded"
        )

    # Any feasible point projects within widest/2 of some constraint
    # normal, which bounds its norm by the offsets; a box at that radius
    # therefore cannot cut the true intersection.
    top = max(offset for _, offset in kept)
    radius = 1.0 + max(1.0, top) / math.cos(widest / 2.0)
    poly = [(-radius, -radius), (radius, -radius), (radius, radius), (-radius, radius)]
    # Inflate every constraint by a relative epsilon so that a degenerate
    # but consistent system (all lines through one point) survives the
    # rounding of successive clips instead of emptying out.
    slack_tol = 1e-12 * radius
    for angle, offset in kept:
        poly = _clip_halfplane(poly, math.cos(angle), math.sin(angle), offset + slack_tol)
        if not poly:
            raise InsufficientCoverageError(
                "support constraints have empty intersection"
            )
    if any(max(abs(x), abs(y)) >= radius - 1e-9 for x, y in poly):
        raise InsufficientCoverageError(
            "half-plane intersection is unbounded"
        )
    deduped: list[tuple[float, float]] = []
    tol = 1e-12 * radius
    for x, y in poly:
        if deduped and abs(x - deduped[-1][0]) <= tol and abs(y - deduped[-1][1]) <= tol:
            continue
        deduped.append((x, y))
    if (
        len(deduped) > 1
        and abs(deduped[0][0] - deduped[-1][0]) <= tol
        and abs(deduped[0][1] - deduped[-1][1]) <= tol
    ):
        deduped.pop()

    slacks: list[float | None] = []
    for e in profile.entries:
        if e.excluded:
            slacks.append(None)
            continue
        reach = max(x * e.direction.ox + y * e.direction.oy for x, y in deduped)
        slacks.append(float(e.support) - reach)
    return HullEstimate(tuple(deduped), tuple(slacks))


def recoverable_hull(domain: EllipseDomain, region: PolygonRegion | None) -> np.ndarray:
    """Vertices of the convex set the boundary data determines.

    The hidden region joined with the focal segment of the domain; on a
    circle the segment degenerates to the center point.
    """
    c = domain.focal_distance
    points = [(-c, 0.0), (c, 0.0)]
    if region is not None:
        points.extend(region.vertices)
    return convex_hull(points)


def _boundary_samples(vertices, count: int) -> np.ndarray:
    verts = np.asarray(vertices, dtype=float)
    if verts.ndim != 2 or verts.shape[1] != 2 or verts.shape[0] == 0:
        raise ValueError("vertices must be a nonempty list of planar points")
    if verts.shape[0] == 1:
        return np.repeat(verts, count, axis=0)
    closed = np.vstack([verts, verts[:1]])
    segments = np.diff(closed, axis=0)
    lengths = np.hypot(segments[:, 0], segments[:, 1])
    total = float(lengths.sum())
    if total == 0.0:
        return np.repeat(verts[:1], count, axis=0)
    cumulative = np.concatenate([[0.0], np.cumsum(lengths)])
    s = np.linspace(0.0, total, count, endpoint=False)
    idx = np.clip(np.searchsorted(cumulative, s, side="right") - 1, 0, len(verts) - 1)
    denom = np.where(lengths[idx] > 0.0, lengths[idx], 1.0)
    frac = (s - cumulative[idx]) / denom
    return verts[idx] + segments[idx] * frac[:, None]


def hull_error(estimate: HullEstimate, truth) -> float:
    """Symmetric Hausdorff distance between the estimate and a truth polygon.

    Both boundaries are sampled densely and the distance is the larger of
    the two one-sided sample distances; degenerate truths (a point or a
    segment) are handled by the same sampling.
    """
    ours = _boundary_samples(estimate.vertices, HAUSDORFF_SAMPLES)
    theirs = _boundary_samples(truth, HAUSDORFF_SAMPLES)
    cross = np.hypot(
        ours[:, 0:1] - theirs[None, :, 0],
        ours[:, 1:2] - theirs[None, :, 1],
    )
    return float(max(cross.min(axis=1).max(), cross.min(axis=0).max()))


def profile_supports(
    domain: EllipseDomain, region: PolygonRegion | None, directions
) -> np.ndarray:
    """Exact support values max(region support, focal support) per direction."""
    values = []
    for d in directions:
        h_region = support_function(region, d) if region is not None else -math.inf
        values.append(max(h_region, focal_support(domain, d)))
    return np.array(values)
