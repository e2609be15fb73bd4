"""Dense Nystrom discretization of the Laplace layer operators backing the
forward solvers.

Conventions: the fundamental solution is -(1/2pi) ln|x-y|.  Single layers
are continuous across their carrying curve; their normal derivative from
the side the normal points away from is +density/2 plus the principal
value, and -density/2 from the other side.  The weakly singular
self-interaction on the ellipse splits the periodic log kernel into
ln(4 sin^2((t-s)/2)) plus a smooth remainder and integrates the first part
with the classical product-trapezoid weights, which keeps the scheme
spectrally accurate.  On polygons the normal-derivative kernel vanishes
identically between points of one straight edge, and panels are graded
toward every corner with a cubic breakpoint law so corner-singular
densities are resolved.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.linalg import lu_factor, lu_solve

from .errors import SolverConvergenceError
from .geometry import EllipseDomain, PolygonRegion

BASE_ELLIPSE_NODES = 256
BASE_PANELS_PER_HALF_EDGE = 4
GRADING_EXPONENT = 5
PANEL_GAUSS_ORDER = 10
MAX_UNKNOWNS = 12000


@lru_cache(maxsize=8)
def _gauss(order: int) -> tuple[np.ndarray, np.ndarray]:
    nodes, weights = np.polynomial.legendre.leggauss(order)
    return nodes, weights


@dataclass(frozen=True)
class EllipseGrid:
    domain: EllipseDomain
    theta: np.ndarray
    points: np.ndarray
    speed: np.ndarray
    normals: np.ndarray
    curvature: np.ndarray
    weights: np.ndarray

    @property
    def size(self) -> int:
        return self.theta.size


@dataclass(frozen=True)
class PanelMesh:
    region: PolygonRegion
    points: np.ndarray
    normals: np.ndarray
    weights: np.ndarray
    edge_ids: np.ndarray

    @property
    def size(self) -> int:
        return self.weights.size


@lru_cache(maxsize=32)
def ellipse_grid(domain: EllipseDomain, n: int) -> EllipseGrid:
    theta = np.linspace(0.0, 2.0 * math.pi, n, endpoint=False)
    points = domain.boundary_points(theta)
    speed = domain.speed(theta)
    normals = domain.outward_normal(theta)
    curvature = domain.curvature(theta)
    weights = speed * (2.0 * math.pi / n)
    for arr in (theta, points, speed, normals, curvature, weights):
        arr.flags.writeable = False
    return EllipseGrid(domain, theta, points, speed, normals, curvature, weights)


def panel_order(region: PolygonRegion) -> int:
    return PANEL_GAUSS_ORDER


@lru_cache(maxsize=32)
def panel_mesh(region: PolygonRegion, panels_per_half: int, order: int) -> PanelMesh:
    ref_nodes, ref_weights = _gauss(order)
    pts: list[np.ndarray] = []
    nrm: list[np.ndarray] = []
    wts: list[np.ndarray] = []
    ids: list[np.ndarray] = []
    for edge_id, (v0, v1) in enumerate(region.edges()):
        v0 = np.asarray(v0)
        v1 = np.asarray(v1)
        length = float(np.hypot(*(v1 - v0)))
        tangent = (v1 - v0) / length
        normal = np.array([tangent[1], -tangent[0]])
        half = 0.5 * length
        graded = half * (np.arange(panels_per_half + 1) / panels_per_half) ** GRADING_EXPONENT
        breaks = np.concatenate([graded, length - graded[-2::-1]])
        for left, right in zip(breaks[:-1], breaks[1:]):
            mid = 0.5 * (left + right)
            rad = 0.5 * (right - left)
            s = mid + rad * ref_nodes
            pts.append(v0[None, :] + s[:, None] * tangent[None, :])
            nrm.append(np.broadcast_to(normal, (order, 2)).copy())
            wts.append(rad * ref_weights)
            ids.append(np.full(order, edge_id))
    points = np.vstack(pts)
    normals = np.vstack(nrm)
    weights = np.concatenate(wts)
    edge_ids = np.concatenate(ids)
    for arr in (points, normals, weights, edge_ids):
        arr.flags.writeable = False
    return PanelMesh(region, points, normals, weights, edge_ids)


@lru_cache(maxsize=16)
def _log_sin_weights(n: int) -> np.ndarray:
    """Product-trapezoid weights R_k for the kernel ln(4 sin^2((t-s)/2))."""
    k = np.arange(n)
    m = np.arange(1, n // 2)
    cosines = np.cos(2.0 * math.pi * np.outer(k, m) / n)
    r = -(4.0 * math.pi / n) * cosines @ (1.0 / m) - (4.0 * math.pi / n**2) * (-1.0) ** k
    r.flags.writeable = False
    return r


def self_single_layer(grid: EllipseGrid) -> np.ndarray:
    """Matrix of the single layer on the ellipse acting on its own nodes."""
    n = grid.size
    t = grid.theta
    r = _log_sin_weights(n)
    idx = (np.arange(n)[:, None] - np.arange(n)[None, :]) % n
    log_part = r[idx] * grid.speed[None, :]

    diff = grid.points[:, None, :] - grid.points[None, :, :]
    dist2 = np.einsum("ijk,ijk->ij", diff, diff)
    sin2 = 4.0 * np.sin(0.5 * (t[:, None] - t[None, :])) ** 2
    np.fill_diagonal(dist2, 1.0)
    np.fill_diagonal(sin2, 1.0)
    smooth = np.log(dist2 / sin2)
    np.fill_diagonal(smooth, 2.0 * np.log(grid.speed))
    smooth_part = smooth * grid.weights[None, :]

    return -(log_part + smooth_part) / (4.0 * math.pi)


def cross_single_layer(targets: np.ndarray, sources: np.ndarray, weights: np.ndarray) -> np.ndarray:
    diff = targets[:, None, :] - sources[None, :, :]
    dist2 = np.einsum("ijk,ijk->ij", diff, diff)
    return -np.log(dist2) / (4.0 * math.pi) * weights[None, :]


def normal_derivative(
    targets: np.ndarray,
    target_normals: np.ndarray,
    sources: np.ndarray,
    weights: np.ndarray,
) -> np.ndarray:
    """Matrix of d/dnu_x of the single layer, targets off the source curve."""
    diff = targets[:, None, :] - sources[None, :, :]
    dist2 = np.einsum("ijk,ijk->ij", diff, diff)
    num = np.einsum("ijk,ik->ij", diff, target_normals)
    return -num / (2.0 * math.pi * dist2) * weights[None, :]


def self_normal_derivative(grid: EllipseGrid) -> np.ndarray:
    """Principal-value normal-derivative operator on the ellipse nodes."""
    diff = grid.points[:, None, :] - grid.points[None, :, :]
    dist2 = np.einsum("ijk,ijk->ij", diff, diff)
    np.fill_diagonal(dist2, 1.0)
    num = np.einsum("ijk,ik->ij", diff, grid.normals)
    mat = -num / (2.0 * math.pi * dist2) * grid.weights[None, :]
    np.fill_diagonal(mat, -grid.curvature / (4.0 * math.pi) * grid.weights)
    return mat


def polygon_normal_derivative(mesh: PanelMesh, chunk: int = 1024) -> np.ndarray:
    """Same operator on polygon nodes; vanishes between same-edge points.

    Assembled in row chunks: meshes reach ten thousand nodes and the naive
    vectorization would hold three full matrices of temporaries at once.
    """
    npts = mesh.size
    x, y = mesh.points[:, 0], mesh.points[:, 1]
    scale = mesh.weights / (-2.0 * math.pi)
    out = np.empty((npts, npts))
    for lo in range(0, npts, chunk):
        hi = min(lo + chunk, npts)
        dx = x[lo:hi, None] - x[None, :]
        dy = y[lo:hi, None] - y[None, :]
        num = dx * mesh.normals[lo:hi, 0:1]
        num += dy * mesh.normals[lo:hi, 1:2]
        dx *= dx
        dy *= dy
        dx += dy
        same = mesh.edge_ids[lo:hi, None] == mesh.edge_ids[None, :]
        np.putmask(dx, same, 1.0)
        num /= dx
        num *= scale[None, :]
        num[same] = 0.0
        out[lo:hi] = num
    return out


@dataclass(frozen=True)
class Operators:
    """Assembled blocks and factorization for one problem layout."""

    kind: str
    grid: EllipseGrid
    mesh: PanelMesh | None
    lu: tuple
    flux_self: np.ndarray
    flux_cross: np.ndarray | None
    trace_self: np.ndarray
    trace_cross: np.ndarray | None


def _resolution_sizes(region: PolygonRegion | None, res: int) -> tuple[int, int, int]:
    n = BASE_ELLIPSE_NODES << res
    panels = BASE_PANELS_PER_HALF_EDGE << res
    order = panel_order(region) if region is not None else 0
    return n, panels, order


def _region_rows(mat: np.ndarray, n: int, m: int, kind: str, rho: float, b_cross, kp_region) -> None:
    """Fill the rows enforcing the condition on the region boundary.

    Cavity: the conductor-side normal derivative vanishes.  Inclusion: the
    normal current is continuous across the interface, reduced to a
    second-kind equation in the contrast rho.  The cavity rows are exactly
    the rho -> 1 limit of the inclusion rows.
    """
    if kind == "cavity":
        mat[n : n + m, :n] = b_cross
        mat[n : n + m, n : n + m] = kp_region
        mat[range(n, n + m), range(n, n + m)] -= 0.5
    else:
        mat[n : n + m, :n] = b_cross
        mat[n : n + m, :n] *= -2.0 * rho
        mat[n : n + m, n : n + m] = kp_region
        mat[n : n + m, n : n + m] *= -2.0 * rho
        mat[range(n, n + m), range(n, n + m)] += 1.0


def _assemble(
    domain: EllipseDomain,
    region: PolygonRegion | None,
    kind: str,
    rho: float,
    res: int,
    neumann: bool,
) -> Operators:
    n, panels, order = _resolution_sizes(region, res)
    grid = ellipse_grid(domain, n)
    s_self = self_single_layer(grid)
    kp_self = self_normal_derivative(grid)
    outer_block = s_self if not neumann else 0.5 * np.eye(n) + kp_self
    label = ("neumann-" if neumann else "dirichlet-") + kind
    if region is None:
        mat = np.zeros((n + 1, n + 1), order="F")
        mat[:n, :n] = outer_block
        mat[:n, n] = 1.0
        mat[n, :n] = grid.weights
        lu = lu_factor(mat, overwrite_a=True, check_finite=False)
        return Operators(label, grid, None, lu, kp_self, None, s_self, None)

    mesh = panel_mesh(region, panels, order)
    m = mesh.size
    if n + m + 1 > MAX_UNKNOWNS:
        raise SolverConvergenceError(
            f"resolution ladder reached {n + m + 1} unknowns without flux "
            f"self-convergence; memory budget caps systems at {MAX_UNKNOWNS}"
        )
    s_cross = cross_single_layer(grid.points, mesh.points, mesh.weights)
    b_cross = normal_derivative(mesh.points, mesh.normals, grid.points, grid.weights)
    flux_cross = normal_derivative(grid.points, grid.normals, mesh.points, mesh.weights)
    kp_region = polygon_normal_derivative(mesh)

    mat = np.zeros((n + m + 1, n + m + 1), order="F")
    mat[:n, :n] = outer_block
    mat[:n, n : n + m] = s_cross if not neumann else flux_cross
    mat[:n, n + m] = 1.0
    _region_rows(mat, n, m, kind, rho, b_cross, kp_region)
    del kp_region, b_cross
    mat[n + m, :n] = grid.weights
    lu = lu_factor(mat, overwrite_a=True, check_finite=False)
    return Operators(label, grid, mesh, lu, kp_self, flux_cross, s_self, s_cross)


@lru_cache(maxsize=2)
def dirichlet_operators(
    domain: EllipseDomain,
    region: PolygonRegion | None,
    kind: str,
    rho: float,
    res: int,
) -> Operators:
    """System for prescribed boundary voltage.

    Unknowns: outer density, region density (if any), and the additive
    constant of the potential.  A zero-total-charge gauge row keeps the
    first-kind block invertible at every ellipse size, including the
    logarithmic-capacity-one case.
    """
    return _assemble(domain, region, kind, rho, res, neumann=False)


@lru_cache(maxsize=2)
def neumann_operators(
    domain: EllipseDomain,
    region: PolygonRegion | None,
    kind: str,
    rho: float,
    res: int,
) -> Operators:
    """System for prescribed boundary current (conductivity scaled out).

    The flux condition is stated for conductivity one; callers divide the
    data by the true outer conductivity.  A free constant column absorbs
    numerically incompatible data and the gauge row fixes the total charge.
    """
    return _assemble(domain, region, kind, rho, res, neumann=True)


@dataclass(frozen=True)
class LayerSolution:
    """Solved densities plus everything needed to evaluate the potential."""

    ops: Operators
    outer_density: np.ndarray
    region_density: np.ndarray | None
    constant: float

    def flux_at_nodes(self) -> np.ndarray:
        """Normal derivative of the potential on the outer nodes, from inside."""
        out = 0.5 * self.outer_density + self.ops.flux_self @ self.outer_density
        if self.region_density is not None:
            out = out + self.ops.flux_cross @ self.region_density
        return out

    def trace_at_nodes(self) -> np.ndarray:
        grid_vals = self.ops.trace_self @ self.outer_density
        if self.region_density is not None:
            grid_vals = grid_vals + self.ops.trace_cross @ self.region_density
        return grid_vals + self.constant

    def evaluate(self, points: np.ndarray) -> np.ndarray:
        """Potential at points away from both curves."""
        grid = self.ops.grid
        vals = cross_single_layer(points, grid.points, grid.weights) @ self.outer_density
        if self.region_density is not None:
            mesh = self.ops.mesh
            vals = vals + cross_single_layer(points, mesh.points, mesh.weights) @ self.region_density
        return vals + self.constant

    def gradient(self, points: np.ndarray) -> np.ndarray:
        grid = self.ops.grid
        grads = _gradient_kernel(points, grid.points, grid.weights, self.outer_density)
        if self.region_density is not None:
            mesh = self.ops.mesh
            grads = grads + _gradient_kernel(points, mesh.points, mesh.weights, self.region_density)
        return grads


def _gradient_kernel(
    points: np.ndarray, sources: np.ndarray, weights: np.ndarray, density: np.ndarray
) -> np.ndarray:
    diff = points[:, None, :] - sources[None, :, :]
    dist2 = np.einsum("ijk,ijk->ij", diff, diff)
    factor = -(weights * density)[None, :] / (2.0 * math.pi * dist2)
    return np.einsum("ij,ijk->ik", factor, diff)


def solve_dirichlet_layout(
    domain: EllipseDomain,
    region: PolygonRegion | None,
    kind: str,
    rho: float,
    res: int,
    boundary_values: np.ndarray,
) -> LayerSolution:
    ops = dirichlet_operators(domain, region, kind, rho, res)
    n = ops.grid.size
    m = ops.mesh.size if ops.mesh is not None else 0
    rhs = np.zeros(n + m + 1)
    rhs[:n] = boundary_values
    sol = lu_solve(ops.lu, rhs)
    region_density = sol[n : n + m] if m else None
    return LayerSolution(ops, sol[:n], region_density, float(sol[n + m]))


def solve_neumann_layout(
    domain: EllipseDomain,
    region: PolygonRegion | None,
    kind: str,
    rho: float,
    res: int,
    boundary_flux: np.ndarray,
) -> LayerSolution:
    ops = neumann_operators(domain, region, kind, rho, res)
    n = ops.grid.size
    m = ops.mesh.size if ops.mesh is not None else 0
    rhs = np.zeros(n + m + 1)
    rhs[:n] = boundary_flux
    sol = lu_solve(ops.lu, rhs)
    region_density = sol[n : n + m] if m else None
    return LayerSolution(ops, sol[:n], region_density, 0.0)


def resample_periodic(values: np.ndarray, m: int) -> np.ndarray:
    """Trigonometric resampling of real samples on a uniform periodic grid."""
    n = values.size
    if m == n:
        return values.copy()
    spectrum = np.fft.rfft(values)
    out = np.zeros(m // 2 + 1, dtype=complex)
    keep = min(n // 2, m // 2)
    out[: keep + 1] = spectrum[: keep + 1]
    return np.fft.irfft(out, m) * (m / n)


def refine_to_convergence(
    solve_at: "callable",
    flux_of: "callable",
    target: float,
    max_res: int,
    grid_size: int,
) -> tuple:
    """Run solve_at(res) for res = 0, 1, ... until the output flux (compared
    on a common grid of grid_size samples) moves by less than target in the
    relative sup norm; returns (solution, flux, achieved, res)."""
    prev_sol = solve_at(0)
    prev_flux = flux_of(prev_sol, grid_size)
    achieved = math.inf
    for res in range(1, max_res + 1):
        sol = solve_at(res)
        flux = flux_of(sol, grid_size)
        scale = float(np.max(np.abs(flux)))
        achieved = float(np.max(np.abs(flux - prev_flux))) / max(scale, 1e-300)
        if achieved < target:
            return sol, flux, achieved, res
        prev_sol, prev_flux = sol, flux
    raise SolverConvergenceError(
        f"boundary flux still moving by {achieved:.3e} relative after "
        f"resolution level {max_res}; target {target:.1e}"
    )
