"""Exception types raised across the toolkit.

Every failure mode that callers are expected to distinguish gets its own
class; everything derives from :class:`EnclosureError` so a driver can catch
the whole family at once.
"""


class EnclosureError(Exception):
    """Base class for all toolkit-specific errors."""


class InvalidRegionError(EnclosureError):
    """Polygon is degenerate: fewer than three vertices, self-intersecting,
    or all vertices collinear."""


class ContainmentError(EnclosureError):
    """A region that must lie strictly inside the domain touches or crosses
    the outer boundary."""


class NotBandLimitedError(EnclosureError):
    """Boundary samples carry spectral energy above the declared band limit."""


class BranchError(EnclosureError):
    """Special-function argument falls outside the supported sector."""


class CircleBranchError(EnclosureError):
    """An ellipse-only formula was invoked with a = b."""


class QuadratureError(EnclosureError):
    """Adaptive quadrature failed to reach its tolerance within the
    refinement budget."""


class InternalConsistencyError(EnclosureError):
    """Two independent evaluation routes that must agree disagreed."""


class SolverConvergenceError(EnclosureError):
    """Forward solver self-convergence stalled above the requested
    tolerance."""


class GeometryError(EnclosureError):
    """Geometric precondition violated (point off the boundary, coincident
    pair points, direction not unit length, ...)."""


class CompatibilityError(EnclosureError):
    """Neumann data violates the zero-total-flux compatibility condition."""


class ContractViolationError(EnclosureError):
    """Caller asked for a quantity the inputs do not carry (for example a
    conductivity-dependent indicator on data flagged conductivity-unknown)."""


class UndefinedRegimeError(EnclosureError):
    """A discrete-frequency construction was requested where it is not
    defined (for example the vertical sequence on a circle)."""


class InsufficientCoverageError(EnclosureError):
    """Too few usable directions to bound the reconstruction."""


class ConfigError(EnclosureError):
    """Experiment configuration file is malformed; message carries the
    offending line number."""
