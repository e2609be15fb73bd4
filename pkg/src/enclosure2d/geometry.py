"""Elliptical domains, probing directions, polygonal regions, support data.

Geometry here is deliberately concrete: the outer conductor is always the
ellipse ``x = a cos(theta), y = b sin(theta)`` with ``a >= b > 0``, a hidden
region is a simple polygon strictly inside it, and every reconstruction
question reduces to support functions ``max(x . omega)`` of a handful of
point sets (polygon vertices, the focal segment of the ellipse, a pair of
boundary points).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import ContainmentError, GeometryError, InvalidRegionError

_CIRCLE_RTOL = 1e-12


@dataclass(frozen=True)
class EllipseDomain:
    """Ellipse ``(x/a)^2 + (y/b)^2 = 1`` with semi-axes ``a >= b > 0``.

    The degenerate-direction segment between the foci (empty for a circle)
    is what obstructs reconstruction along the long axis, so its half-length
    ``focal_distance`` shows up throughout the indicator machinery.
    """

    a: float
    b: float

    def __post_init__(self):
        if not (self.b > 0.0) or not math.isfinite(self.a) or not math.isfinite(self.b):
            raise GeometryError(f"semi-axes must be positive finite, got a={self.a}, b={self.b}")
        if self.a < self.b:
            raise GeometryError(
                f"expected a >= b (long axis horizontal), got a={self.a} < b={self.b}"
            )

    @property
    def is_circle(self) -> bool:
        return abs(self.a - self.b) <= _CIRCLE_RTOL * self.a

    @property
    def focal_distance(self) -> float:
        """Half-distance between foci; exactly 0.0 for a circle."""
        if self.is_circle:
            return 0.0
        return math.sqrt(self.a * self.a - self.b * self.b)

    @property
    def focal_points(self) -> tuple[tuple[float, float], tuple[float, float]]:
        c = self.focal_distance
        return ((-c, 0.0), (c, 0.0))

    @property
    def diameter(self) -> float:
        return 2.0 * self.a

    def boundary_points(self, thetas) -> np.ndarray:
        """Boundary samples, shape (n, 2), for parameter values ``thetas``."""
        t = np.asarray(thetas, dtype=float)
        return np.stack([self.a * np.cos(t), self.b * np.sin(t)], axis=-1)

    def speed(self, thetas) -> np.ndarray:
        """|d/dtheta of the boundary map| = sqrt(a^2 sin^2 + b^2 cos^2)."""
        t = np.asarray(thetas, dtype=float)
        return np.hypot(self.a * np.sin(t), self.b * np.cos(t))

    def outward_normal(self, thetas) -> np.ndarray:
        t = np.asarray(thetas, dtype=float)
        raw = np.stack([self.b * np.cos(t), self.a * np.sin(t)], axis=-1)
        return raw / np.linalg.norm(raw, axis=-1, keepdims=True)

    def curvature(self, thetas) -> np.ndarray:
        return self.a * self.b / self.speed(thetas) ** 3

    def boundary_support(self, direction: "Direction") -> float:
        """max over the boundary of x . omega, attained where the probe
        front last touches the ellipse."""
        return math.hypot(self.a * direction.ox, self.b * direction.oy)

    def contains(self, points, margin: float = 0.0) -> np.ndarray:
        """Strict interior test ``(x/a)^2 + (y/b)^2 < 1 - margin``."""
        p = np.atleast_2d(np.asarray(points, dtype=float))
        level = (p[:, 0] / self.a) ** 2 + (p[:, 1] / self.b) ** 2
        return level < 1.0 - margin

    def on_boundary(self, point, tol: float = 1e-12) -> bool:
        x, y = point
        level = (x / self.a) ** 2 + (y / self.b) ** 2
        return abs(level - 1.0) <= tol


@dataclass(frozen=True)
class Direction:
    """Unit probing direction ``omega``; the rotated mate ``omega_perp``
    drives the oscillatory part of the complex exponential probe."""

    ox: float
    oy: float

    def __post_init__(self):
        r = math.hypot(self.ox, self.oy)
        if abs(r - 1.0) > 1e-9:
            raise GeometryError(f"direction must be unit length, |omega| = {r}")
        if abs(r - 1.0) > 0.0:
            object.__setattr__(self, "ox", self.ox / r)
            object.__setattr__(self, "oy", self.oy / r)

    @staticmethod
    def from_angle(angle: float) -> "Direction":
        return Direction(math.cos(angle), math.sin(angle))

    @property
    def angle(self) -> float:
        return math.atan2(self.oy, self.ox)

    @property
    def omega(self) -> np.ndarray:
        return np.array([self.ox, self.oy])

    @property
    def perp(self) -> np.ndarray:
        """omega rotated by -90 degrees: (oy, -ox)."""
        return np.array([self.oy, -self.ox])

    def __neg__(self) -> "Direction":
        return Direction(-self.ox, -self.oy)


def _shoelace(vertices: np.ndarray) -> float:
    x, y = vertices[:, 0], vertices[:, 1]
    return 0.5 * float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))


def _segments_properly_intersect(p1, p2, q1, q2) -> bool:
    def orient(a, b, c):
        return (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])

    d1 = orient(q1, q2, p1)
    d2 = orient(q1, q2, p2)
    d3 = orient(p1, p2, q1)
    d4 = orient(p1, p2, q2)
    return ((d1 > 0) != (d2 > 0)) and ((d3 > 0) != (d4 > 0)) and d1 * d2 != 0 and d3 * d4 != 0


@dataclass(frozen=True)
class PolygonRegion:
    """Simple polygon given by its vertices, normalized counterclockwise.

    Raises InvalidRegionError for fewer than three vertices, collinear
    (zero-area) input, or a self-intersecting chain.
    """

    vertices: tuple[tuple[float, float], ...]

    def __post_init__(self):
        verts = tuple((float(x), float(y)) for x, y in self.vertices)
        if len(verts) < 3:
            raise InvalidRegionError(f"polygon needs >= 3 vertices, got {len(verts)}")
        arr = np.array(verts)
        scale = max(np.ptp(arr[:, 0]), np.ptp(arr[:, 1]), 1e-300)
        area = _shoelace(arr)
        if abs(area) <= 1e-14 * scale * scale:
            raise InvalidRegionError("polygon vertices are collinear (zero area)")
        if area < 0:
            verts = verts[::-1]
        n = len(verts)
        for i in range(n):
            for j in range(i + 1, n):
                if j == i or (j + 1) % n == i or (i + 1) % n == j:
                    continue
                if _segments_properly_intersect(
                    verts[i], verts[(i + 1) % n], verts[j], verts[(j + 1) % n]
                ):
                    raise InvalidRegionError("polygon chain self-intersects")
        object.__setattr__(self, "vertices", verts)

    @cached_property
    def vertex_array(self) -> np.ndarray:
        arr = np.array(self.vertices)
        arr.flags.writeable = False
        return arr

    @property
    def num_edges(self) -> int:
        return len(self.vertices)

    @cached_property
    def area(self) -> float:
        return _shoelace(self.vertex_array)

    @cached_property
    def diameter(self) -> float:
        v = self.vertex_array
        d2 = np.sum((v[:, None, :] - v[None, :, :]) ** 2, axis=-1)
        return math.sqrt(float(d2.max()))

    @cached_property
    def centroid(self) -> tuple[float, float]:
        v = self.vertex_array
        x, y = v[:, 0], v[:, 1]
        xn, yn = np.roll(x, -1), np.roll(y, -1)
        cross = x * yn - xn * y
        cx = float(np.sum((x + xn) * cross) / (6.0 * self.area))
        cy = float(np.sum((y + yn) * cross) / (6.0 * self.area))
        return (cx, cy)

    def edges(self):
        """Yield (start, end) vertex pairs in counterclockwise order."""
        v = self.vertices
        for i in range(len(v)):
            yield v[i], v[(i + 1) % len(v)]

    @cached_property
    def hull_vertices(self) -> np.ndarray:
        return convex_hull(self.vertex_array)

    def distance_to_point(self, point) -> float:
        """Distance from an exterior point to the polygon boundary."""
        return float(_point_segments_distance(np.asarray(point, float), self.vertex_array))


@dataclass(frozen=True)
class PointPair:
    """Two distinct electrode points on the outer boundary."""

    p: tuple[float, float]
    q: tuple[float, float]

    def __post_init__(self):
        p = (float(self.p[0]), float(self.p[1]))
        q = (float(self.q[0]), float(self.q[1]))
        if math.dist(p, q) == 0.0:
            raise GeometryError("point pair must be two distinct points")
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "q", q)

    @staticmethod
    def on_domain(domain: EllipseDomain, p, q, tol: float = 1e-12) -> "PointPair":
        for pt in (p, q):
            if not domain.on_boundary(pt, tol):
                raise GeometryError(f"point {tuple(pt)} is not on the boundary ellipse")
        return PointPair(tuple(p), tuple(q))

    @staticmethod
    def from_angles(domain: EllipseDomain, theta_p: float, theta_q: float) -> "PointPair":
        (px, py), (qx, qy) = domain.boundary_points([theta_p, theta_q])
        return PointPair((float(px), float(py)), (float(qx), float(qy)))

    @property
    def separation(self) -> float:
        return math.dist(self.p, self.q)


def convex_hull(points) -> np.ndarray:
    """Monotone-chain convex hull, counterclockwise, no repeated endpoint.

    Degenerate inputs collapse gracefully: collinear points give the two
    extremes, a single point gives itself.
    """
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    uniq = sorted(set(map(tuple, pts.tolist())))
    if len(uniq) <= 2:
        return np.array(uniq)

    def cross(o, a, b):
        return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])

    lower: list = []
    for p in uniq:
        while len(lower) >= 2 and cross(lower[-2], lower[-1], p) <= 0:
            lower.pop()
        lower.append(p)
    upper: list = []
    for p in reversed(uniq):
        while len(upper) >= 2 and cross(upper[-2], upper[-1], p) <= 0:
            upper.pop()
        upper.append(p)
    hull = lower[:-1] + upper[:-1]
    if len(hull) < 3:
        return np.array(uniq[:: len(uniq) - 1] if len(uniq) > 1 else uniq)
    return np.array(hull)


def support_function(region: PolygonRegion, direction: Direction) -> float:
    """h_D(omega) = max over the region of x . omega (attained at a vertex)."""
    v = region.vertex_array
    return float(np.max(v[:, 0] * direction.ox + v[:, 1] * direction.oy))


def focal_support(domain: EllipseDomain, direction: Direction) -> float:
    """Support function of the focal segment: sqrt(a^2-b^2) |omega_x|.

    This is the floor below which no cavity information survives in the
    generic-direction indicator; it vanishes for a circle.
    """
    return domain.focal_distance * abs(direction.ox)


def pair_support(pair: PointPair, direction: Direction) -> float:
    """Support function of the two-point electrode set."""
    return max(
        pair.p[0] * direction.ox + pair.p[1] * direction.oy,
        pair.q[0] * direction.ox + pair.q[1] * direction.oy,
    )


def is_regular(region: PolygonRegion, direction: Direction, tol: float = 1e-9) -> bool:
    """True unless the supporting line of ``direction`` contains a whole edge.

    Equivalently: the direction is not the outward normal of any edge of the
    region's convex hull, up to an angular tolerance.
    """
    hull = region.hull_vertices
    n = len(hull)
    if n < 2:
        return True
    ang = direction.angle
    for i in range(n):
        ex = hull[(i + 1) % n, 0] - hull[i, 0]
        ey = hull[(i + 1) % n, 1] - hull[i, 1]
        normal_angle = math.atan2(-ex, ey)  # edge direction rotated by -90
        diff = (ang - normal_angle + math.pi) % (2.0 * math.pi) - math.pi
        if abs(diff) < tol:
            return False
    return True


def _point_segments_distance(point: np.ndarray, vertices: np.ndarray) -> float:
    """Distance from one point to the closed polygonal chain ``vertices``."""
    a = vertices
    b = np.roll(vertices, -1, axis=0)
    ab = b - a
    ap = point[None, :] - a
    denom = np.sum(ab * ab, axis=1)
    t = np.clip(np.sum(ap * ab, axis=1) / denom, 0.0, 1.0)
    closest = a + t[:, None] * ab
    return float(np.min(np.linalg.norm(point[None, :] - closest, axis=1)))


def polygon_ellipse_distance(
    region: PolygonRegion, domain: EllipseDomain, rtol: float = 1e-9
) -> float:
    """Distance between the polygon and the outer boundary ellipse.

    A dense angular scan brackets the minimizing boundary parameter and a
    golden-section refinement tightens it; the distance function is smooth
    near the minimum so this converges geometrically.
    """
    thetas = np.linspace(0.0, 2.0 * math.pi, 4096, endpoint=False)
    pts = domain.boundary_points(thetas)
    verts = region.vertex_array
    dists = np.array([_point_segments_distance(p, verts) for p in pts])
    k = int(np.argmin(dists))
    span = 2.0 * math.pi / 4096

    def g(theta: float) -> float:
        p = np.array([domain.a * math.cos(theta), domain.b * math.sin(theta)])
        return _point_segments_distance(p, verts)

    lo, hi = thetas[k] - span, thetas[k] + span
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    x1 = hi - invphi * (hi - lo)
    x2 = lo + invphi * (hi - lo)
    f1, f2 = g(x1), g(x2)
    for _ in range(120):
        if hi - lo < rtol:
            break
        if f1 < f2:
            hi, x2, f2 = x2, x1, f1
            x1 = hi - invphi * (hi - lo)
            f1 = g(x1)
        else:
            lo, x1, f1 = x1, x2, f2
            x2 = lo + invphi * (hi - lo)
            f2 = g(x2)
    return min(f1, f2, float(dists[k]))


def admissibility(region: PolygonRegion, domain: EllipseDomain) -> bool:
    """Check the separation condition diam(D) < dist(D, boundary).

    The region must first lie strictly inside the domain; touching or
    crossing the boundary raises ContainmentError.  (The ellipse interior is
    convex, so vertex containment implies polygon containment.)
    """
    inside = domain.contains(region.vertex_array)
    if not bool(np.all(inside)):
        raise ContainmentError("region is not strictly inside the domain")
    return region.diameter < polygon_ellipse_distance(region, domain)
