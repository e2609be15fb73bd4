"""Figure rendering for sweep results.

Renders three views of a run to image files next to the delimited text
artifacts: the raw indicator traces, the per-direction support profile,
and the recovered hull over the conductor outline.  The backend is
forced to Agg so rendering works headless and produces identical bytes
for identical inputs.
"""

from __future__ import annotations

import math
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .geometry import PolygonRegion
from .reconstruct import HullEstimate, SupportProfile, profile_supports

_DPI = 150
_META = {"Software": None}


def _save(fig, path: Path) -> Path:
    fig.savefig(path, dpi=_DPI, metadata=_META)
    plt.close(fig)
    return path


def trace_figure(traces, path) -> Path:
    """Log-magnitude of the indicator against tau, one line per direction."""
    fig, ax = plt.subplots(figsize=(7.0, 4.5))
    shown = list(traces)
    step = max(1, len(shown) // 8)
    for trace in shown[::step]:
        taus = trace.taus
        if taus.size == 0:
            continue
        angle = math.atan2(trace.direction.oy, trace.direction.ox) % (2.0 * math.pi)
        style = "o-" if trace.regime == "discrete-vertical" else "-"
        ax.plot(taus, trace.log_magnitudes, style, lw=1.0, ms=2.5,
                label=f"angle {angle:.2f}")
    ax.set_xlabel(r"$\tau$")
    ax.set_ylabel("log magnitude")
    ax.set_title("indicator traces")
    ax.legend(fontsize=7, ncol=2, loc="best")
    fig.tight_layout()
    return _save(fig, Path(path))


def profile_figure(
    profile: SupportProfile, path, truth: PolygonRegion | None = None
) -> Path:
    """Fitted support values per direction angle, with the truth overlay."""
    fig, ax = plt.subplots(figsize=(7.0, 4.5))
    usable = profile.usable
    angles = [e.angle for e in usable]
    values = [e.support for e in usable]
    errors = [e.estimate.stderr for e in usable]
    ax.errorbar(angles, values, yerr=errors, fmt="o", ms=3.0, lw=0.8,
                capsize=2.0, label="estimated support")
    excluded = profile.excluded
    if excluded:
        floor = min(values) if values else 0.0
        ax.plot([e.angle for e in excluded], [floor] * len(excluded), "rx",
                ms=5.0, label="excluded")
    if truth is not None or profile.domain.focal_distance > 0.0:
        grid = np.linspace(0.0, 2.0 * math.pi, 512)
        from .geometry import Direction

        dirs = [Direction.from_angle(t) for t in grid]
        exact = profile_supports(profile.domain, truth, dirs)
        ax.plot(grid, exact, "k-", lw=1.0, label="recoverable support")
    ax.set_xlabel("direction angle")
    ax.set_ylabel("support value")
    ax.set_title("support profile")
    ax.legend(fontsize=8)
    fig.tight_layout()
    return _save(fig, Path(path))


def hull_figure(
    profile: SupportProfile,
    hull: HullEstimate | None,
    path,
    truth: PolygonRegion | None = None,
) -> Path:
    """Recovered hull inside the conductor outline."""
    fig, ax = plt.subplots(figsize=(5.5, 5.5))
    domain = profile.domain
    grid = np.linspace(0.0, 2.0 * math.pi, 512)
    ax.plot(domain.a * np.cos(grid), domain.b * np.sin(grid), "k-", lw=1.2,
            label="conductor")
    c = domain.focal_distance
    if c > 0.0:
        ax.plot([-c, c], [0.0, 0.0], "k--", lw=1.0, label="focal segment")
    else:
        ax.plot([0.0], [0.0], "k+", ms=8.0, label="center")
    if truth is not None:
        closed = list(truth.vertices) + [truth.vertices[0]]
        xs, ys = zip(*closed)
        ax.plot(xs, ys, "g-", lw=1.2, label="true region")
    if hull is not None and hull.vertices:
        closed = list(hull.vertices) + [hull.vertices[0]]
        xs, ys = zip(*closed)
        ax.fill(xs, ys, alpha=0.25, color="tab:blue")
        ax.plot(xs, ys, "-", color="tab:blue", lw=1.2, label="recovered hull")
    ax.set_aspect("equal")
    ax.set_title("hull recovery")
    ax.legend(fontsize=8, loc="upper right")
    fig.tight_layout()
    return _save(fig, Path(path))


def render_figures(
    outdir,
    profile: SupportProfile,
    hull: HullEstimate | None = None,
    truth: PolygonRegion | None = None,
    traces=(),
) -> tuple[Path, ...]:
    """Render every applicable figure into ``outdir``; returns the paths."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    written = []
    if traces:
        written.append(trace_figure(traces, outdir / "traces.png"))
    written.append(profile_figure(profile, outdir / "profile.png", truth))
    written.append(hull_figure(profile, hull, outdir / "hull.png", truth))
    return tuple(written)
