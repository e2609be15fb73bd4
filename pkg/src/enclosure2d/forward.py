"""Forward conduction solves on an elliptical conductor.

Given band-limited boundary voltage on the ellipse and an optional polygonal
cavity (insulating) or inclusion (different conductivity), compute the
current density the boundary would show.  The discretization is an indirect
single-layer formulation: one density on the ellipse, one on the polygon,
plus a free additive constant, closed by a zero-total-charge gauge.  Every
solve is repeated at a doubled resolution and accepted only when the output
flux stops moving, so the returned data carries its own error control.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import _bie
from .errors import CompatibilityError, ContainmentError, InternalConsistencyError
from .boundary import HarmonicTrace
from .geometry import EllipseDomain, PolygonRegion

_FMT = "%.17g"
DEFAULT_GRID = 2048
CONTRAST_RANGE = (1e-3, 1e3)


@dataclass(frozen=True)
class MaterialSpec:
    """Conductivity of the background and, optionally, of an inclusion.

    ``inner=None`` marks an insulating region (a cavity).
    """

    outer: float
    inner: float | None = None

    def __post_init__(self):
        if not (math.isfinite(self.outer) and self.outer > 0.0):
            raise ValueError(f"outer conductivity must be positive, got {self.outer}")
        if self.inner is not None:
            inner = float(self.inner)
            if not (math.isfinite(inner) and inner > 0.0):
                raise ValueError(f"inner conductivity must be positive, got {inner}")
            object.__setattr__(self, "inner", inner)
        object.__setattr__(self, "outer", float(self.outer))

    @property
    def is_cavity(self) -> bool:
        return self.inner is None

    @property
    def contrast(self) -> float:
        """(outer - inner) / (outer + inner); 1.0 in the cavity limit."""
        if self.inner is None:
            return 1.0
        return (self.outer - self.inner) / (self.outer + self.inner)


@dataclass(frozen=True)
class BoundaryMeasurement:
    """One voltage/current pair sampled on a uniform boundary grid.

    ``conductivity`` is the background value when the experiment discloses
    it and ``None`` when the inversion must work without it.  The current
    samples of any physical measurement integrate to zero over the
    boundary; construction warns when that fails grossly, and the forward
    solvers enforce it tightly on their own output.

    ``accuracy`` bounds the relative error of the stored samples when that
    bound is known (solver self-convergence, or an applied noise level).
    Indicator evaluations use it to refuse pairings that have cancelled
    down to the data error, which no quadrature certificate can detect.
    """

    a: float
    b: float
    voltage: np.ndarray
    flux: np.ndarray
    conductivity: float | None = None
    accuracy: float | None = None

    def __post_init__(self):
        voltage = np.asarray(self.voltage, dtype=float).copy()
        flux = np.asarray(self.flux, dtype=float).copy()
        if voltage.ndim != 1 or voltage.shape != flux.shape:
            raise ValueError("voltage and flux must be 1-d arrays on a common grid")
        if voltage.size < 16:
            raise ValueError("need at least 16 boundary samples")
        if not (np.all(np.isfinite(voltage)) and np.all(np.isfinite(flux))):
            raise ValueError("boundary samples must be finite")
        voltage.flags.writeable = False
        flux.flags.writeable = False
        object.__setattr__(self, "voltage", voltage)
        object.__setattr__(self, "flux", flux)
        object.__setattr__(self, "a", float(self.a))
        object.__setattr__(self, "b", float(self.b))
        if self.conductivity is not None:
            object.__setattr__(self, "conductivity", float(self.conductivity))
        if self.accuracy is not None:
            acc = float(self.accuracy)
            if not (acc > 0.0 and math.isfinite(acc)):
                raise ValueError(f"accuracy must be a positive finite bound, got {acc}")
            object.__setattr__(self, "accuracy", acc)
        drift = self.conservation_defect()
        if drift > 1e-3:
            warnings.warn(
                f"boundary current violates charge conservation by {drift:.2e} relative",
                RuntimeWarning,
                stacklevel=2,
            )

    @property
    def domain(self) -> EllipseDomain:
        return EllipseDomain(self.a, self.b)

    @property
    def grid_size(self) -> int:
        return self.voltage.size

    @property
    def theta(self) -> np.ndarray:
        return np.linspace(0.0, 2.0 * math.pi, self.grid_size, endpoint=False)

    def conservation_defect(self) -> float:
        """|integral of flux ds| relative to the integral of |flux| ds."""
        ds = self.domain.speed(self.theta)
        total = float(np.sum(self.flux * ds))
        scale = float(np.sum(np.abs(self.flux) * ds))
        return abs(total) / max(scale, 1e-300)

    def without_conductivity(self) -> "BoundaryMeasurement":
        """Copy with the background conductivity withheld from inversion."""
        return BoundaryMeasurement(self.a, self.b, self.voltage, self.flux, None, self.accuracy)

    def save(self, path) -> None:
        lines = [
            "# enclosure boundary measurement",
            f"# ellipse {_FMT % self.a} {_FMT % self.b}",
            "# conductivity "
            + ("unknown" if self.conductivity is None else _FMT % self.conductivity),
        ]
        if self.accuracy is not None:
            lines.append(f"# accuracy {_FMT % self.accuracy}")
        lines += [
            "# columns: theta voltage flux",
        ]
        for t, f, g in zip(self.theta, self.voltage, self.flux):
            lines.append(f"{_FMT % t} {_FMT % f} {_FMT % g}")
        Path(path).write_text("\n".join(lines) + "\n")

    @staticmethod
    def load(path) -> "BoundaryMeasurement":
        a = b = None
        conductivity: float | None = None
        accuracy: float | None = None
        rows = []
        for raw in Path(path).read_text().splitlines():
            line = raw.strip()
            if not line:
                continue
            if line.startswith("#"):
                body = line[1:].strip()
                if body.startswith("ellipse"):
                    _, sa, sb = body.split()
                    a, b = float(sa), float(sb)
                elif body.startswith("conductivity"):
                    token = body.split()[1]
                    conductivity = None if token == "unknown" else float(token)
                elif body.startswith("accuracy"):
                    accuracy = float(body.split()[1])
                continue
            parts = line.split()
            if len(parts) != 3:
                raise ValueError(f"malformed measurement row: {line!r}")
            rows.append((float(parts[0]), float(parts[1]), float(parts[2])))
        if a is None:
            raise ValueError("measurement file lacks the ellipse header")
        data = np.array(rows)
        n = data.shape[0]
        expected = 2.0 * math.pi * np.arange(n) / n
        if not np.allclose(data[:, 0], expected, atol=1e-9, rtol=0.0):
            raise ValueError("measurement grid is not the uniform boundary grid")
        return BoundaryMeasurement(a, b, data[:, 1], data[:, 2], conductivity, accuracy)


@dataclass(frozen=True)
class ConductorSolution:
    """Converged forward solve with access to the interior potential."""

    domain: EllipseDomain
    region: PolygonRegion | None
    material: MaterialSpec
    layer: _bie.LayerSolution
    resolution: int
    converged: float

    def boundary_flux(self, grid: int = DEFAULT_GRID) -> np.ndarray:
        nodes = self.material.outer * self.layer.flux_at_nodes()
        return _bie.resample_periodic(nodes, grid)

    def boundary_voltage(self, grid: int = DEFAULT_GRID) -> np.ndarray:
        return _bie.resample_periodic(self.layer.trace_at_nodes(), grid)

    def potential(self, points) -> np.ndarray:
        """Potential at interior points of the conductor (off both curves)."""
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        if not np.all(self.domain.contains(pts)):
            raise ContainmentError("potential evaluation points must lie inside the conductor")
        return self.layer.evaluate(pts)

    def gradient(self, points) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        if not np.all(self.domain.contains(pts)):
            raise ContainmentError("gradient evaluation points must lie inside the conductor")
        return self.layer.gradient(pts)

    def measurement(self, grid: int = DEFAULT_GRID, declare_conductivity: bool = True) -> BoundaryMeasurement:
        meas = BoundaryMeasurement(
            self.domain.a,
            self.domain.b,
            self.boundary_voltage(grid),
            self.boundary_flux(grid),
            self.material.outer if declare_conductivity else None,
            max(self.converged, 1e-13),
        )
        drift = meas.conservation_defect()
        if drift > 1e-8:
            raise InternalConsistencyError(
                f"solver flux violates charge conservation by {drift:.2e} relative"
            )
        return meas


def _check_contrast(material: MaterialSpec) -> None:
    if material.inner is None:
        return
    ratio = material.inner / material.outer
    if not (CONTRAST_RANGE[0] <= ratio <= CONTRAST_RANGE[1]):
        warnings.warn(
            f"conductivity contrast {ratio:.3e} is outside {CONTRAST_RANGE}; "
            "expect ill-conditioning",
            RuntimeWarning,
            stacklevel=3,
        )


def _check_region(domain: EllipseDomain, region: PolygonRegion | None) -> None:
    if region is not None and not bool(np.all(domain.contains(region.vertex_array))):
        raise ContainmentError("region is not strictly inside the conductor")


def forward_solution(
    domain: EllipseDomain,
    region: PolygonRegion | None,
    trace: HarmonicTrace,
    material: MaterialSpec,
    *,
    grid: int = DEFAULT_GRID,
    target: float = 1e-6,
    max_resolution: int = 3,
) -> ConductorSolution:
    """Solve the voltage-driven problem and certify flux self-convergence."""
    _check_region(domain, region)
    _check_contrast(material)
    kind = "cavity" if material.is_cavity else "inclusion"
    rho = material.contrast

    def solve_at(res: int) -> _bie.LayerSolution:
        n = _bie.BASE_ELLIPSE_NODES << res
        theta = np.linspace(0.0, 2.0 * math.pi, n, endpoint=False)
        return _bie.solve_dirichlet_layout(domain, region, kind, rho, res, trace.evaluate(theta))

    def flux_of(layer: _bie.LayerSolution, m: int) -> np.ndarray:
        return _bie.resample_periodic(layer.flux_at_nodes(), m)

    layer, _, achieved, res = _bie.refine_to_convergence(solve_at, flux_of, target, max_resolution, grid)
    return ConductorSolution(domain, region, material, layer, res, achieved)


def solve_cavity(
    domain: EllipseDomain,
    cavity: PolygonRegion | None,
    trace: HarmonicTrace,
    conductivity: float = 1.0,
    *,
    grid: int = DEFAULT_GRID,
    target: float = 1e-6,
    max_resolution: int = 3,
) -> BoundaryMeasurement:
    """Boundary current for an insulating polygonal region (or none)."""
    sol = forward_solution(
        domain,
        cavity,
        trace,
        MaterialSpec(conductivity),
        grid=grid,
        target=target,
        max_resolution=max_resolution,
    )
    return sol.measurement(grid)


def solve_inclusion(
    domain: EllipseDomain,
    inclusion: PolygonRegion,
    trace: HarmonicTrace,
    material: MaterialSpec,
    *,
    grid: int = DEFAULT_GRID,
    target: float = 1e-6,
    max_resolution: int = 3,
) -> BoundaryMeasurement:
    """Boundary current when the region conducts at a different level."""
    if material.is_cavity:
        raise ValueError("inclusion solves need an inner conductivity; use solve_cavity otherwise")
    sol = forward_solution(
        domain, inclusion, trace, material, grid=grid, target=target, max_resolution=max_resolution
    )
    return sol.measurement(grid)


def solve_neumann(
    domain: EllipseDomain,
    region: PolygonRegion | None,
    material: MaterialSpec,
    flux_samples,
    *,
    target: float = 1e-6,
    max_resolution: int = 3,
) -> np.ndarray:
    """Boundary voltage produced by a prescribed boundary current.

    ``flux_samples`` live on the uniform grid their length defines and may
    be complex; the returned voltage uses the same grid and is normalized
    to zero weighted mean.  The data must satisfy charge conservation up
    front, to one part in 1e10 of its absolute integral.
    """
    _check_region(domain, region)
    _check_contrast(material)
    g = np.asarray(flux_samples)
    if g.ndim != 1 or g.size < 16:
        raise ValueError("flux samples must form a 1-d array of at least 16 values")
    m_out = g.size
    theta_out = np.linspace(0.0, 2.0 * math.pi, m_out, endpoint=False)
    ds = domain.speed(theta_out) * (2.0 * math.pi / m_out)
    total = complex(np.sum(g * ds))
    scale = float(np.sum(np.abs(g) * ds))
    if abs(total) > 1e-10 * max(scale, 1e-300):
        raise CompatibilityError(
            f"prescribed current does not conserve charge: defect {abs(total):.3e} "
            f"against scale {scale:.3e}"
        )

    kind = "cavity" if material.is_cavity else "inclusion"
    rho = material.contrast
    parts = [np.real(g) / material.outer]
    if np.iscomplexobj(g):
        parts.append(np.imag(g) / material.outer)

    def solve_at(res: int):
        n = _bie.BASE_ELLIPSE_NODES << res
        layers = [
            _bie.solve_neumann_layout(domain, region, kind, rho, res, _bie.resample_periodic(p, n))
            for p in parts
        ]
        return layers

    def voltage_of(layers, m: int) -> np.ndarray:
        cols = []
        for layer in layers:
            vals = layer.trace_at_nodes()
            w = layer.ops.grid.weights
            vals = vals - np.sum(vals * w) / np.sum(w)
            cols.append(_bie.resample_periodic(vals, m))
        return cols[0] if len(cols) == 1 else np.column_stack(cols)

    layers, voltage, _, _ = _bie.refine_to_convergence(solve_at, voltage_of, target, max_resolution, m_out)
    if voltage.ndim == 2:
        return voltage[:, 0] + 1j * voltage[:, 1]
    return voltage


@dataclass(frozen=True)
class DiscCavityModel:
    """Closed-form cavity response of the unit disc.

    A concentric disc of the given radius is removed; driving the boundary
    with a pure harmonic keeps the problem separable, so voltage, current
    and interior potential are all explicit.  The attenuation of the
    current relative to the intact disc identifies the cavity size, and
    rescaling the background conductivity by the attenuation produces a
    cavity-free conductor with the exact same boundary data,
    which is the classical one-measurement non-uniqueness example.
    """

    radius: float
    harmonic: int

    def __post_init__(self):
        if not (0.0 < self.radius < 1.0):
            raise ValueError(f"cavity radius must lie in (0, 1), got {self.radius}")
        if self.harmonic < 1:
            raise ValueError(f"harmonic index must be >= 1, got {self.harmonic}")
        object.__setattr__(self, "radius", float(self.radius))
        object.__setattr__(self, "harmonic", int(self.harmonic))

    @property
    def _ratio(self) -> float:
        return self.radius ** (2 * self.harmonic)

    @property
    def flux_factor(self) -> float:
        """Boundary current amplitude per unit voltage amplitude."""
        m, r = self.harmonic, self._ratio
        return m * (1.0 - r) / (1.0 + r)

    def matched_conductivity(self, scale: float = 1.0) -> float:
        """Background conductivity whose intact disc mimics this cavity.

        The current of the intact disc at conductivity c(1-R^{2m})/(1+R^{2m})
        equals the current of the cavity at conductivity c, pointwise.
        """
        m, r = self.harmonic, self._ratio
        return scale * (1.0 - r) / (1.0 + r)

    def measurement(
        self,
        conductivity: float = 1.0,
        grid: int = DEFAULT_GRID,
        declare_conductivity: bool = True,
    ) -> BoundaryMeasurement:
        theta = np.linspace(0.0, 2.0 * math.pi, grid, endpoint=False)
        voltage = np.cos(self.harmonic * theta)
        flux = conductivity * self.flux_factor * np.cos(self.harmonic * theta)
        return BoundaryMeasurement(
            1.0, 1.0, voltage, flux, conductivity if declare_conductivity else None
        )

    def potential(self, points) -> np.ndarray:
        """Exact potential at points of the annulus between cavity and rim."""
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        r = np.hypot(pts[:, 0], pts[:, 1])
        if np.any(r < self.radius - 1e-12) or np.any(r > 1.0 + 1e-12):
            raise ContainmentError("points must lie between the cavity and the boundary")
        ang = np.arctan2(pts[:, 1], pts[:, 0])
        m, rr = self.harmonic, self._ratio
        radial = (r**m + rr * np.clip(r, self.radius, None) ** (-m)) / (1.0 + rr)
        return radial * np.cos(m * ang)


def analytic_disc(radius: float, harmonic: int) -> DiscCavityModel:
    """Reference disc-with-concentric-cavity model; see DiscCavityModel."""
    return DiscCavityModel(radius, harmonic)
