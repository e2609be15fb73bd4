"""Geometry primitives: domains, directions, regions, support values."""

from __future__ import annotations

import math

import numpy as np
import pytest

from enclosure2d import (
    ContainmentError,
    Direction,
    EllipseDomain,
    GeometryError,
    InvalidRegionError,
    PointPair,
    PolygonRegion,
    admissibility,
    convex_hull,
    focal_support,
    pair_support,
    is_regular,
    polygon_ellipse_distance,
    recoverable_hull,
    support_function,
)

UNIT_SQUARE = PolygonRegion(((0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)))
DIAG = 1.0 / math.sqrt(2.0)


class TestDomainAndDirection:
    def test_ellipse_axes_order(self):
        with pytest.raises(GeometryError, match="a >= b"):
            EllipseDomain(1.0, 2.0)

    def test_ellipse_positive_axes(self):
        with pytest.raises(GeometryError):
            EllipseDomain(-1.0, 0.5)

    def test_direction_must_be_unit(self):
        with pytest.raises(GeometryError, match="unit length"):
            Direction(3.0, 4.0)
        with pytest.raises(GeometryError):
            Direction(0.0, 0.0)

    def test_direction_from_angle_is_unit(self):
        for ang in np.linspace(0.0, 2.0 * math.pi, 17):
            d = Direction.from_angle(float(ang))
            assert math.hypot(d.ox, d.oy) == pytest.approx(1.0, abs=1e-14)

    def test_point_pair_rejects_coincident_points(self):
        with pytest.raises(GeometryError, match="distinct"):
            PointPair((0.3, 0.4), (0.3, 0.4))


class TestPolygonValidation:
    def test_too_few_vertices(self):
        with pytest.raises(InvalidRegionError, match=">= 3 vertices"):
            PolygonRegion(((0.0, 0.0), (1.0, 0.0)))

    def test_collinear_vertices(self):
        with pytest.raises(InvalidRegionError, match="collinear"):
            PolygonRegion(((0.0, 0.0), (1.0, 0.0), (2.0, 0.0)))

    def test_self_intersecting_chain(self):
        with pytest.raises(InvalidRegionError, match="self-intersects"):
            PolygonRegion(((0.0, 0.0), (3.0, 1.0), (2.0, 0.0), (0.0, 2.0)))

    def test_clockwise_input_is_normalized(self):
        """Vertex order is canonicalized to counterclockwise."""
        cw = PolygonRegion(((0.0, 0.0), (0.0, 1.0), (1.0, 1.0), (1.0, 0.0)))
        xs = [v[0] for v in cw.vertices]
        ys = [v[1] for v in cw.vertices]
        area2 = sum(
            xs[i] * ys[(i + 1) % 4] - xs[(i + 1) % 4] * ys[i] for i in range(4)
        )
        assert area2 > 0.0


class TestSupportFunction:
    @pytest.mark.parametrize(
        "direction, expected",
        [
            (Direction(1.0, 0.0), 1.0),
            (Direction(DIAG, DIAG), math.sqrt(2.0)),
            (Direction(-1.0, 0.0), 0.0),
            (Direction(0.0, -1.0), 0.0),
        ],
    )
    def test_unit_square_values(self, direction, expected):
        assert support_function(UNIT_SQUARE, direction) == pytest.approx(
            expected, abs=1e-14
        )

    def test_matches_vertex_maximum(self):
        rng = np.random.default_rng(7)
        pts = tuple(map(tuple, rng.uniform(-1.0, 1.0, size=(8, 2))))
        region = PolygonRegion(tuple(map(tuple, convex_hull(pts))))
        for ang in rng.uniform(0.0, 2.0 * math.pi, size=32):
            d = Direction.from_angle(float(ang))
            brute = max(v[0] * d.ox + v[1] * d.oy for v in region.vertices)
            assert support_function(region, d) == pytest.approx(brute, abs=1e-13)

    def test_lipschitz_in_direction(self):
        """Support values vary continuously with the direction."""
        radius = max(math.hypot(*v) for v in UNIT_SQUARE.vertices)
        for ang in np.linspace(0.0, 2.0 * math.pi, 50):
            d1 = Direction.from_angle(float(ang))
            d2 = Direction.from_angle(float(ang) + 1e-6)
            gap = abs(support_function(UNIT_SQUARE, d1) - support_function(UNIT_SQUARE, d2))
            assert gap <= radius * 1.1e-6


class TestFocalAndPairSupport:
    def test_focal_segment_values(self):
        dom = EllipseDomain(2.0, 1.0)
        assert focal_support(dom, Direction(1.0, 0.0)) == pytest.approx(
            math.sqrt(3.0), abs=1e-14
        )
        assert focal_support(dom, Direction(0.0, 1.0)) == 0.0
        assert focal_support(dom, Direction(0.0, -1.0)) == 0.0

    def test_circle_has_no_focal_extent(self):
        disc = EllipseDomain(1.0, 1.0)
        for ang in np.linspace(0.0, 2.0 * math.pi, 9):
            assert focal_support(disc, Direction.from_angle(float(ang))) == 0.0

    def test_symmetric_and_bounded(self):
        dom = EllipseDomain(3.0, 1.5)
        for ang in np.linspace(0.0, math.pi, 19):
            d = Direction.from_angle(float(ang))
            flipped = Direction(-d.ox, -d.oy)
            assert focal_support(dom, d) == pytest.approx(
                focal_support(dom, flipped), abs=1e-14
            )
            assert 0.0 <= focal_support(dom, d) <= dom.a

    @pytest.mark.parametrize(
        "direction, expected",
        [
            (Direction(1.0, 0.0), 1.0),
            (Direction(0.0, 1.0), 0.0),
            (Direction(-1.0, 0.0), 1.0),
            (Direction(DIAG, DIAG), DIAG),
        ],
    )
    def test_pair_support_values(self, direction, expected):
        pair = PointPair((1.0, 0.0), (-1.0, 0.0))
        assert pair_support(pair, direction) == pytest.approx(expected, abs=1e-14)

    def test_pair_support_is_max_of_dots(self):
        pair = PointPair((1.0, 1.0), (0.0, 0.0))
        assert pair_support(pair, Direction(DIAG, DIAG)) == pytest.approx(
            math.sqrt(2.0), abs=1e-14
        )


class TestRegularDirections:
    def test_square_edge_normals_are_singular(self):
        for d in (Direction(1.0, 0.0), Direction(0.0, 1.0),
                  Direction(-1.0, 0.0), Direction(0.0, -1.0)):
            assert not is_regular(UNIT_SQUARE, d)

    def test_oblique_direction_is_regular(self):
        assert is_regular(UNIT_SQUARE, Direction.from_angle(0.3))

    def test_hexagon_normals(self):
        hexagon = PolygonRegion(
            tuple(
                (math.cos(k * math.pi / 3.0), math.sin(k * math.pi / 3.0))
                for k in range(6)
            )
        )
        assert not is_regular(hexagon, Direction.from_angle(math.pi / 6.0))
        assert is_regular(hexagon, Direction.from_angle(0.4))

    def test_random_directions_almost_surely_regular(self):
        rng = np.random.default_rng(42)
        hits = sum(
            is_regular(UNIT_SQUARE, Direction.from_angle(float(a)))
            for a in rng.uniform(0.0, 2.0 * math.pi, size=10_000)
        )
        assert hits == 10_000


class TestAdmissibility:
    def test_small_centered_square_is_admissible(self):
        disc = EllipseDomain(1.0, 1.0)
        small = PolygonRegion(((-0.1, -0.1), (0.1, -0.1), (0.1, 0.1), (-0.1, 0.1)))
        assert admissibility(small, disc)

    def test_contained_but_oversized_square_fails(self):
        """A region can sit strictly inside yet still be too large."""
        disc = EllipseDomain(1.0, 1.0)
        fat = PolygonRegion(((-0.4, -0.4), (0.4, -0.4), (0.4, 0.4), (-0.4, 0.4)))
        assert not admissibility(fat, disc)

    def test_near_boundary_vertex_fails(self):
        dom = EllipseDomain(2.0, 1.0)
        tri = PolygonRegion(((1.7, 0.0), (1.999, 0.0), (1.85, 0.1)))
        assert not admissibility(tri, dom)

    def test_region_crossing_boundary_raises(self):
        disc = EllipseDomain(1.0, 1.0)
        crossing = PolygonRegion(((0.0, 0.0), (1.5, 0.0), (0.5, 0.5)))
        with pytest.raises(ContainmentError):
            admissibility(crossing, disc)

    def test_distance_to_boundary(self):
        disc = EllipseDomain(1.0, 1.0)
        small = PolygonRegion(((-0.1, -0.1), (0.1, -0.1), (0.1, 0.1), (-0.1, 0.1)))
        expected = 1.0 - 0.1 * math.sqrt(2.0)
        assert polygon_ellipse_distance(small, disc) == pytest.approx(
            expected, abs=1e-9
        )


class TestHullHelpers:
    def test_convex_hull_drops_interior_points(self):
        pts = [(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0), (0.5, 0.5)]
        hull = convex_hull(pts)
        assert len(hull) == 4
        assert (0.5, 0.5) not in set(map(tuple, hull))

    def test_recoverable_hull_on_circle_includes_center(self):
        disc = EllipseDomain(1.0, 1.0)
        square = PolygonRegion(((0.1, -0.05), (0.4, -0.05), (0.4, 0.25), (0.1, 0.25)))
        hull = convex_hull(recoverable_hull(disc, square))
        xs, ys = hull[:, 0], hull[:, 1]
        # conv(region and center): origin must be a hull vertex here.
        assert min(math.hypot(x, y) for x, y in zip(xs, ys)) < 1e-12
        assert xs.max() == pytest.approx(0.4, abs=1e-12)

    def test_recoverable_hull_on_ellipse_includes_focal_segment(self):
        dom = EllipseDomain(2.0, 1.0)
        tri = PolygonRegion(((-0.15, 0.3), (0.15, 0.3), (0.0, 0.55)))
        hull = recoverable_hull(dom, tri)
        xs = hull[:, 0]
        assert xs.min() == pytest.approx(-math.sqrt(3.0), abs=1e-12)
        assert xs.max() == pytest.approx(math.sqrt(3.0), abs=1e-12)
