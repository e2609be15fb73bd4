"""Command-line experiment driver.

``run`` takes a configuration file, generates the forward data (with
optional seeded noise on the current samples), sweeps the directions,
and writes every artifact of the run into the output directory:
measurement files, per-direction indicator traces, the support profile,
the hull vertex list, rendered figures, and a text summary.  ``verify``
executes one of the named self-check suites.

Exit status: 0 for a fully usable run, 2 when some directions had to be
excluded (the artifacts are still written), 1 for fatal errors.
"""

from __future__ import annotations

import argparse
import dataclasses
import sys
import time
from pathlib import Path

import numpy as np

from .config import ExperimentConfig, load_config
from .errors import EnclosureError, InsufficientCoverageError
from .forward import BoundaryMeasurement, solve_cavity, solve_inclusion
from .indicator import IndicatorTrace, point_difference, probe_trace, slope_fit, vertical_indicator
from .reconstruct import (
    HullEstimate,
    ProfileEntry,
    SupportProfile,
    hull_error,
    intersect_halfplanes,
    recoverable_hull,
    sweep,
    sweep_directions,
)
from .verify import run_suite

_FMT = "%.17g"


def _apply_noise(meas: BoundaryMeasurement, noise: float, rng) -> BoundaryMeasurement:
    """Relative multiplicative Gaussian noise on the current samples.

    A zero level bypasses the generator entirely so that noiseless runs
    are bitwise independent of the seed.  The measurement's accuracy
    stamp absorbs the noise level, keeping the cancellation refusals
    honest about what the data can support.
    """
    if noise == 0.0:
        return meas
    flux = meas.flux * (1.0 + noise * rng.standard_normal(meas.flux.shape))
    accuracy = max(meas.accuracy or 0.0, noise)
    return dataclasses.replace(meas, flux=flux, accuracy=accuracy)


def _forward_measurements(config: ExperimentConfig) -> list[BoundaryMeasurement]:
    out = []
    for trace in config.traces:
        if config.kind == "inclusion":
            meas = solve_inclusion(
                config.domain,
                config.region,
                trace,
                config.material,
                grid=config.grid,
                target=config.target,
                max_resolution=config.max_resolution,
            )
        else:
            meas = solve_cavity(
                config.domain,
                config.region,
                trace,
                config.material.outer,
                grid=config.grid,
                target=config.target,
                max_resolution=config.max_resolution,
            )
        out.append(meas)
    return out


def _export_traces(config, measurements, profile, outdir: Path) -> list[IndicatorTrace]:
    """Re-evaluate and save the indicator trace behind each estimated entry."""
    traces = []
    for k, entry in enumerate(profile.entries):
        if entry.trace_index is None:
            continue
        meas = measurements[entry.trace_index]
        if entry.regime == "discrete-vertical":
            sign = 1 if entry.direction.oy >= 0.0 else -1
            trace = vertical_indicator(meas, sign, l_max=config.ladder_max)
        else:
            trace = probe_trace(
                meas,
                entry.direction,
                config.taus,
                subtract_background=meas.conductivity is not None,
            )
        trace.save(outdir / f"trace_{k:03d}.txt")
        traces.append(trace)
    return traces


def _pair_profile(config: ExperimentConfig) -> tuple[SupportProfile, list[IndicatorTrace]]:
    """Voltage-difference sweep between two electrodes.

    Each direction solves the probe-driven current problem over the tau
    window and fits the decay of the electrode voltage gap, whose rate is
    the support of the electrode pair.
    """
    entries = []
    traces = []
    for direction in sweep_directions(config.directions):
        rows = []
        warnings = []
        for tau in config.taus:
            value = point_difference(
                config.domain,
                config.region,
                config.material,
                config.pair,
                direction,
                tau,
                grid=config.grid,
                target=config.target,
                max_resolution=config.max_resolution,
            )
            if value.is_zero:
                warnings.append(f"tau {tau:.6g}: gap vanished, sample dropped")
                continue
            rows.append((float(tau), value.log_abs, value.phase))
        trace = IndicatorTrace(direction, "point-difference", tuple(rows), tuple(warnings))
        traces.append(trace)
        try:
            estimate = slope_fit(trace)
        except ValueError as exc:
            entries.append(
                ProfileEntry(
                    direction,
                    "point-difference",
                    checks=(),
                    regular=True,
                    excluded_reason=f"estimate-failed: {exc}",
                )
            )
            continue
        entries.append(
            ProfileEntry(
                direction,
                "point-difference",
                checks=(),
                regular=True,
                estimate=estimate,
                support=estimate.value,
            )
        )
    return SupportProfile(config.domain, tuple(entries)), traces


def _truth_vertices(config: ExperimentConfig):
    if config.kind == "point-difference":
        return np.array([config.pair.p, config.pair.q])
    if config.region is None:
        return None
    return recoverable_hull(config.domain, config.region)


def _summary(config, profile, hull, err) -> str:
    lines = [
        "# enclosure run summary",
        f"kind {config.kind}",
        f"domain {_FMT % config.domain.a} {_FMT % config.domain.b}",
        f"directions {config.directions}",
        f"noise {_FMT % config.noise}",
        f"seed {config.seed}",
        f"usable {len(profile.usable)}",
        f"excluded {len(profile.excluded)}",
    ]
    for entry in profile.excluded:
        lines.append(f"excluded_direction {_FMT % entry.angle} {entry.excluded_reason}")
    if hull is not None:
        lines.append(f"hull_vertices {len(hull.vertices)}")
    else:
        lines.append("hull_vertices 0")
    if err is not None:
        lines.append(f"hull_error {_FMT % err}")
    return "\n".join(lines) + "\n"


def run_experiment(config: ExperimentConfig, outdir: Path, threads: int = 1) -> int:
    """Execute one configured experiment; returns the process exit code."""
    from .report import render_figures

    start = time.perf_counter()
    outdir.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(config.seed)

    if config.kind == "point-difference":
        profile, traces = _pair_profile(config)
        for k, trace in enumerate(traces):
            trace.save(outdir / f"trace_{k:03d}.txt")
    else:
        measurements = _forward_measurements(config)
        measurements = [_apply_noise(m, config.noise, rng) for m in measurements]
        if not config.conductivity_known:
            measurements = [m.without_conductivity() for m in measurements]
        for k, meas in enumerate(measurements):
            meas.save(outdir / f"measurement_{k}.txt")
        profile = sweep(
            config.domain,
            measurements,
            directions=config.directions,
            taus=config.taus,
            l_max=config.ladder_max,
            threads=threads,
        )
        traces = _export_traces(config, measurements, profile, outdir)

    profile.save(outdir / "profile.txt")
    hull: HullEstimate | None = None
    err = None
    try:
        hull = intersect_halfplanes(profile)
        hull.save(outdir / "hull.txt")
        truth_vertices = _truth_vertices(config)
        if truth_vertices is not None:
            err = hull_error(hull, truth_vertices)
    except InsufficientCoverageError as exc:
        print(f"hull skipped: {exc}", file=sys.stderr)

    truth = config.region if config.kind != "point-difference" else None
    render_figures(outdir, profile, hull, truth, traces)
    summary = _summary(config, profile, hull, err)
    (outdir / "summary.txt").write_text(summary)
    print(summary, end="")
    print(f"elapsed {time.perf_counter() - start:.2f}s", file=sys.stderr)
    return 0 if not profile.excluded else 2


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="enclosure2d",
        description="Locate a hidden region in an elliptical conductor "
        "from boundary voltage/current data.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    runp = sub.add_parser("run", help="run an experiment from a config file")
    runp.add_argument("config", type=Path, help="path to the experiment config")
    runp.add_argument("--out", type=Path, default=None, help="output directory")
    runp.add_argument("--threads", type=int, default=1, help="sweep worker threads")
    runp.add_argument("--seed", type=int, default=None, help="override the config seed")

    verp = sub.add_parser("verify", help="run a named self-check suite")
    verp.add_argument("suite", help="suite name or 'all'")

    args = parser.parse_args(argv)
    if args.command == "verify":
        try:
            ok, lines = run_suite(args.suite)
        except KeyError as exc:
            print(exc.args[0], file=sys.stderr)
            return 1
        print("\n".join(lines))
        return 0 if ok else 1

    try:
        config = load_config(args.config)
    except OSError as exc:
        print(f"cannot read config: {exc}", file=sys.stderr)
        return 1
    except EnclosureError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    if args.seed is not None:
        config = dataclasses.replace(config, seed=args.seed)
    outdir = args.out or config.out or Path("enclosure-run")
    try:
        return run_experiment(config, outdir, threads=max(1, args.threads))
    except EnclosureError as exc:
        print(f"run failed: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
