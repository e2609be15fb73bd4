"""Locate hidden cavities and inclusions in a 2D elliptical conductor.

The toolkit turns boundary voltage/current pairs into convex bounds on
the hidden region.  Exponential probes concentrate near one edge of the
conductor; pairing them with the measured data yields an indicator whose
growth rate in the probe frequency is the support of the region in the
probe direction, floored by the focal segment the geometry hides.  A
direction sweep assembles those rates into a half-plane intersection.

Layers, bottom up: exact geometry (:mod:`.geometry`), band-limited
boundary data (:mod:`.boundary`), overflow-safe complex accumulation
(:mod:`.scaled`), Bessel machinery (:mod:`.specfun`), certified moment
evaluation (:mod:`.moments`), forward solvers (:mod:`.forward`),
indicator and slope recovery (:mod:`.indicator`), sweep and hull
assembly (:mod:`.reconstruct`), experiment configs (:mod:`.config`),
figures (:mod:`.report`), and self-check suites (:mod:`.verify`).
"""

from .boundary import HarmonicTrace, infer_trace, parse_trace
from .config import ExperimentConfig, load_config, parse_config
from .errors import (
    BranchError,
    CircleBranchError,
    CompatibilityError,
    ConfigError,
    ContainmentError,
    ContractViolationError,
    EnclosureError,
    GeometryError,
    InsufficientCoverageError,
    InternalConsistencyError,
    InvalidRegionError,
    NotBandLimitedError,
    QuadratureError,
    SolverConvergenceError,
    UndefinedRegimeError,
)
from .forward import (
    BoundaryMeasurement,
    ConductorSolution,
    DiscCavityModel,
    MaterialSpec,
    analytic_disc,
    forward_solution,
    solve_cavity,
    solve_inclusion,
    solve_neumann,
)
from .geometry import (
    Direction,
    EllipseDomain,
    PointPair,
    PolygonRegion,
    admissibility,
    convex_hull,
    focal_support,
    is_regular,
    pair_support,
    polygon_ellipse_distance,
    support_function,
)
from .indicator import (
    IndicatorTrace,
    SlopeEstimate,
    classical_indicator,
    discrete_tau_sequence,
    flux_moment,
    greens_identity_residual,
    perpendicular_tau_sequence,
    point_difference,
    probe_trace,
    refined_support,
    slope_fit,
    support_modes,
    trace_pairing,
    vertical_indicator,
)
from .moments import (
    MomentCoefficients,
    coefficients,
    condition_sum,
    condition_vertical,
    moment_quadrature,
    moment_series,
)
from .reconstruct import (
    HullEstimate,
    ProfileEntry,
    SupportProfile,
    annotate_regularity,
    hull_error,
    intersect_halfplanes,
    profile_supports,
    recoverable_hull,
    sweep,
    sweep_directions,
    synthetic_profile,
)
from .scaled import ScaledComplex
from .specfun import HankelCoefficients, bessel_j, bessel_j_scaled, hankel_terms
from .verify import run_suite

__version__ = "0.1.0"

__all__ = [
    "BoundaryMeasurement",
    "BranchError",
    "CircleBranchError",
    "CompatibilityError",
    "ConductorSolution",
    "ConfigError",
    "ContainmentError",
    "ContractViolationError",
    "Direction",
    "DiscCavityModel",
    "EllipseDomain",
    "EnclosureError",
    "ExperimentConfig",
    "GeometryError",
    "HankelCoefficients",
    "HarmonicTrace",
    "HullEstimate",
    "IndicatorTrace",
    "InsufficientCoverageError",
    "InternalConsistencyError",
    "InvalidRegionError",
    "MaterialSpec",
    "MomentCoefficients",
    "NotBandLimitedError",
    "PointPair",
    "PolygonRegion",
    "ProfileEntry",
    "QuadratureError",
    "ScaledComplex",
    "SlopeEstimate",
    "SolverConvergenceError",
    "SupportProfile",
    "UndefinedRegimeError",
    "admissibility",
    "analytic_disc",
    "annotate_regularity",
    "bessel_j",
    "bessel_j_scaled",
    "classical_indicator",
    "coefficients",
    "condition_sum",
    "condition_vertical",
    "convex_hull",
    "discrete_tau_sequence",
    "flux_moment",
    "focal_support",
    "forward_solution",
    "greens_identity_residual",
    "hankel_terms",
    "hull_error",
    "infer_trace",
    "intersect_halfplanes",
    "is_regular",
    "load_config",
    "moment_quadrature",
    "moment_series",
    "pair_support",
    "parse_config",
    "parse_trace",
    "perpendicular_tau_sequence",
    "point_difference",
    "polygon_ellipse_distance",
    "probe_trace",
    "profile_supports",
    "recoverable_hull",
    "refined_support",
    "run_suite",
    "slope_fit",
    "solve_cavity",
    "solve_inclusion",
    "solve_neumann",
    "support_function",
    "support_modes",
    "sweep",
    "sweep_directions",
    "synthetic_profile",
    "trace_pairing",
    "vertical_indicator",
    "__version__",
]
