"""Shared fixtures for the test suite.

Forward solves dominate the runtime, so the two reference cavity
measurements (unit disc with an offset square, wide ellipse with a
small triangle) are solved once per session and reused everywhere.
"""

from __future__ import annotations

import pytest

from enclosure2d import (
    EllipseDomain,
    HarmonicTrace,
    PolygonRegion,
    solve_cavity,
)

UNIT_DISC = EllipseDomain(1.0, 1.0)
WIDE_ELLIPSE = EllipseDomain(2.0, 1.0)

# Square of side 0.3 centered at (0.25, 0.1), well inside the unit disc.
OFFSET_SQUARE = PolygonRegion(
    ((0.1, -0.05), (0.4, -0.05), (0.4, 0.25), (0.1, 0.25))
)

# Small triangle sitting above the focal segment of the 2:1 ellipse.
TOP_TRIANGLE = PolygonRegion(((-0.15, 0.3), (0.15, 0.3), (0.0, 0.55)))

COS_TRACE = HarmonicTrace.single(1)


@pytest.fixture(scope="session")
def disc_square_measurement():
    """Cavity data on the unit disc, resolved far below test tolerances."""
    return solve_cavity(
        UNIT_DISC, OFFSET_SQUARE, COS_TRACE, 1.0, grid=2048, target=1e-9
    )


@pytest.fixture(scope="session")
def ellipse_triangle_measurement():
    """Cavity data on the 2:1 ellipse with a triangle above the foci."""
    return solve_cavity(
        WIDE_ELLIPSE, TOP_TRIANGLE, COS_TRACE, 1.0, grid=2048, target=2e-8
    )
