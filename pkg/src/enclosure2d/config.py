"""Experiment configuration: flat key-value text with trace blocks.

A configuration file drives one end-to-end experiment: forward data
generation, optional synthetic noise, a direction sweep, and artifact
emission.  The format is line-oriented.  Ordinary lines hold ``key
value...`` pairs; a ``trace`` line opens a block of ``harmonic m alpha
beta`` lines closed by ``end``, one block per driving voltage.  ``#``
starts a comment and blank lines are ignored.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

from .boundary import HarmonicTrace
from .errors import ConfigError, EnclosureError
from .forward import MaterialSpec
from .geometry import EllipseDomain, PointPair, PolygonRegion

KINDS = ("cavity", "inclusion", "point-difference")

_SCALAR_KEYS = {
    "domain": 2,
    "kind": 1,
    "region": None,
    "conductivity": 1,
    "inclusion_conductivity": 1,
    "conductivity_known": 1,
    "points": 4,
    "directions": 1,
    "tau_min": 1,
    "tau_max": 1,
    "tau_count": 1,
    "ladder_max": 1,
    "noise": 1,
    "seed": 1,
    "grid": 1,
    "target": 1,
    "max_resolution": 1,
    "out": 1,
}


@dataclass(frozen=True)
class ExperimentConfig:
    """Validated description of one experiment run.

    Geometry, materials and voltages are held as their domain types, so a
    parsed configuration cannot describe an invalid experiment.  ``seed``
    fixes the noise draw bit-for-bit; ``noise`` is the relative standard
    deviation applied to flux samples.
    """

    domain: EllipseDomain
    kind: str
    traces: tuple[HarmonicTrace, ...]
    region: PolygonRegion | None = None
    material: MaterialSpec = field(default_factory=lambda: MaterialSpec(1.0))
    conductivity_known: bool = True
    pair: PointPair | None = None
    directions: int = 64
    tau_min: float = 2.0
    tau_max: float = 20.0
    tau_count: int = 24
    ladder_max: int = 40
    noise: float = 0.0
    seed: int = 0
    grid: int = 2048
    target: float = 1e-6
    max_resolution: int = 3
    out: Path | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"kind must be one of {KINDS}, got {self.kind!r}")
        if self.kind == "point-difference":
            if self.pair is None:
                raise ValueError("point-difference experiments need a points line")
        elif not self.traces:
            raise ValueError(f"{self.kind} experiments need at least one trace block")
        if self.kind == "inclusion" and self.material.is_cavity:
            raise ValueError("inclusion experiments need inclusion_conductivity")
        if self.kind == "inclusion" and self.region is None:
            raise ValueError("inclusion experiments need a region")
        if self.directions < 1:
            raise ValueError(f"directions must be positive, got {self.directions}")
        if not (0.0 < self.tau_min < self.tau_max) or not math.isfinite(self.tau_max):
            raise ValueError(
                f"tau window must satisfy 0 < tau_min < tau_max, got "
                f"[{self.tau_min}, {self.tau_max}]"
            )
        if self.tau_count < 2:
            raise ValueError(f"tau_count must be at least 2, got {self.tau_count}")
        if self.ladder_max < 1:
            raise ValueError(f"ladder_max must be positive, got {self.ladder_max}")
        if not (0.0 <= self.noise < 1.0):
            raise ValueError(f"noise must lie in [0, 1), got {self.noise}")
        if self.seed < 0:
            raise ValueError(f"seed must be nonnegative, got {self.seed}")

    @property
    def taus(self) -> tuple[float, ...]:
        ratio = self.tau_max / self.tau_min
        return tuple(
            self.tau_min * ratio ** (k / (self.tau_count - 1))
            for k in range(self.tau_count)
        )


def _fail(lineno: int, message: str) -> ConfigError:
    return ConfigError(f"line {lineno}: {message}")


def _parse_float(lineno: int, token: str, key: str) -> float:
    try:
        value = float(token)
    except ValueError:
        raise _fail(lineno, f"{key} expects a number, got {token!r}") from None
    if not math.isfinite(value):
        raise _fail(lineno, f"{key} must be finite, got {token!r}")
    return value


def _parse_int(lineno: int, token: str, key: str) -> int:
    try:
        return int(token)
    except ValueError:
        raise _fail(lineno, f"{key} expects an integer, got {token!r}") from None


def _parse_bool(lineno: int, token: str, key: str) -> bool:
    lowered = token.lower()
    if lowered in ("true", "yes", "1"):
        return True
    if lowered in ("false", "no", "0"):
        return False
    raise _fail(lineno, f"{key} expects true or false, got {token!r}")


def parse_config(text: str) -> ExperimentConfig:
    """Parse configuration text; every diagnostic names its line."""
    values: dict[str, tuple[int, list[str]]] = {}
    traces: list[HarmonicTrace] = []
    block: dict[int, tuple[float, float]] | None = None
    block_line = 0
    lineno = 0
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tokens = line.split()
        key = tokens[0]
        if block is not None:
            if key == "end":
                if len(tokens) != 1:
                    raise _fail(lineno, "end takes no arguments")
                if not block:
                    raise _fail(lineno, "trace block has no harmonic lines")
                top = max(block)
                alpha = [0.0] * (top + 1)
                beta = [0.0] * (top + 1)
                for m, (am, bm) in block.items():
                    alpha[m], beta[m] = am, bm
                try:
                    traces.append(HarmonicTrace(top, tuple(alpha), tuple(beta)))
                except (ValueError, EnclosureError) as exc:
                    raise _fail(lineno, f"invalid trace block: {exc}") from None
                block = None
            elif key == "harmonic":
                if len(tokens) != 4:
                    raise _fail(lineno, "harmonic expects: harmonic m alpha beta")
                m = _parse_int(lineno, tokens[1], "harmonic order")
                if m < 0:
                    raise _fail(lineno, f"harmonic order must be nonnegative, got {m}")
                if m in block:
                    raise _fail(lineno, f"harmonic {m} repeated in one trace block")
                block[m] = (
                    _parse_float(lineno, tokens[2], "alpha"),
                    _parse_float(lineno, tokens[3], "beta"),
                )
            else:
                raise _fail(lineno, f"unexpected {key!r} inside a trace block")
            continue
        if key == "trace":
            if len(tokens) != 1:
                raise _fail(lineno, "trace opens a block and takes no arguments")
            block = {}
            block_line = lineno
            continue
        if key == "end":
            raise _fail(lineno, "end without an open trace block")
        if key not in _SCALAR_KEYS:
            raise _fail(lineno, f"unknown key {key!r}")
        if key in values:
            raise _fail(lineno, f"duplicate key {key!r} (first on line {values[key][0]})")
        arity = _SCALAR_KEYS[key]
        if arity is not None and len(tokens) - 1 != arity:
            raise _fail(lineno, f"{key} expects {arity} value(s), got {len(tokens) - 1}")
        values[key] = (lineno, tokens[1:])
    if block is not None:
        raise _fail(block_line, "trace block never closed with end")

    def take(key: str):
        return values.pop(key, None)

    item = take("domain")
    if item is None:
        raise _fail(max(lineno, 1), "missing required key 'domain'")
    dline, dtok = item
    try:
        domain = EllipseDomain(
            _parse_float(dline, dtok[0], "domain"), _parse_float(dline, dtok[1], "domain")
        )
    except (ValueError, EnclosureError) as exc:
        raise _fail(dline, f"invalid domain: {exc}") from None

    item = take("kind")
    if item is None:
        raise _fail(max(lineno, 1), "missing required key 'kind'")
    kline, ktok = item
    kind = ktok[0]
    if kind not in KINDS:
        raise _fail(kline, f"kind must be one of {KINDS}, got {kind!r}")

    region = None
    item = take("region")
    if item is not None:
        rline, rtok = item
        if len(rtok) < 6 or len(rtok) % 2:
            raise _fail(rline, "region expects at least three x y pairs")
        coords = [_parse_float(rline, t, "region") for t in rtok]
        try:
            region = PolygonRegion(tuple(zip(coords[0::2], coords[1::2])))
        except (ValueError, EnclosureError) as exc:
            raise _fail(rline, f"invalid region: {exc}") from None

    outer, inner = 1.0, None
    item = take("conductivity")
    if item is not None:
        outer = _parse_float(item[0], item[1][0], "conductivity")
    item = take("inclusion_conductivity")
    mline = item[0] if item is not None else 0
    if item is not None:
        inner = _parse_float(item[0], item[1][0], "inclusion_conductivity")
    try:
        material = MaterialSpec(outer, inner)
    except ValueError as exc:
        raise _fail(mline or (values.get("conductivity", (1, []))[0]), str(exc)) from None

    pair = None
    item = take("points")
    if item is not None:
        pline, ptok = item
        coords = [_parse_float(pline, t, "points") for t in ptok]
        try:
            pair = PointPair((coords[0], coords[1]), (coords[2], coords[3]))
        except (ValueError, EnclosureError) as exc:
            raise _fail(pline, f"invalid points: {exc}") from None

    simple = {}
    for key, parser in (
        ("conductivity_known", _parse_bool),
        ("directions", _parse_int),
        ("tau_min", _parse_float),
        ("tau_max", _parse_float),
        ("tau_count", _parse_int),
        ("ladder_max", _parse_int),
        ("noise", _parse_float),
        ("seed", _parse_int),
        ("grid", _parse_int),
        ("max_resolution", _parse_int),
        ("target", _parse_float),
    ):
        item = take(key)
        if item is not None:
            simple[key] = parser(item[0], item[1][0], key)

    out = None
    item = take("out")
    if item is not None:
        out = Path(item[1][0])

    try:
        return ExperimentConfig(
            domain=domain,
            kind=kind,
            traces=tuple(traces),
            region=region,
            material=material,
            pair=pair,
            out=out,
            **simple,
        )
    except ValueError as exc:
        raise ConfigError(f"line {kline}: {exc}") from None


def load_config(path) -> ExperimentConfig:
    return parse_config(Path(path).read_text())
