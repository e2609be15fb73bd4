"""Band-limited Dirichlet boundary data on the ellipse parameter circle.

A trace is a finite Fourier series in the boundary parameter theta,

    f(theta) = alpha_0 / 2 + sum_{m=1}^{N} alpha_m cos(m theta) + beta_m sin(m theta),

stored by its real coefficient table.  The complex coefficients
``gamma_m = (alpha_m - i beta_m) / 2`` (with ``gamma_{-m}`` their conjugates)
are what the moment calculus consumes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import NotBandLimitedError

_FMT = "%.17g"


@dataclass(frozen=True)
class HarmonicTrace:
    """Finite Fourier series with band limit ``bandlimit``.

    ``alpha`` and ``beta`` both have length ``bandlimit + 1``; ``beta[0]`` is
    forced to zero.  Real-valuedness is structural, so conjugate symmetry of
    the complex coefficients holds by construction.
    """

    bandlimit: int
    alpha: tuple[float, ...]
    beta: tuple[float, ...]

    def __post_init__(self):
        n = int(self.bandlimit)
        if n < 0:
            raise ValueError(f"band limit must be >= 0, got {n}")
        alpha = tuple(float(v) for v in self.alpha)
        beta = tuple(float(v) for v in self.beta)
        if len(alpha) != n + 1 or len(beta) != n + 1:
            raise ValueError("coefficient tables must have length bandlimit + 1")
        if not all(math.isfinite(v) for v in alpha + beta):
            raise ValueError("coefficients must be finite")
        beta = (0.0,) + beta[1:]
        object.__setattr__(self, "bandlimit", n)
        object.__setattr__(self, "alpha", alpha)
        object.__setattr__(self, "beta", beta)

    @staticmethod
    def single(m: int, alpha: float = 1.0, beta: float = 0.0) -> "HarmonicTrace":
        """Trace with a single harmonic, e.g. single(1) is cos(theta)."""
        a = [0.0] * (m + 1)
        b = [0.0] * (m + 1)
        a[m], b[m] = alpha, beta
        return HarmonicTrace(m, tuple(a), tuple(b))

    def gamma(self, m: int) -> complex:
        """Complex Fourier coefficient of exp(i m theta), any integer m."""
        k = abs(m)
        if k > self.bandlimit:
            return 0j
        if k == 0:
            return complex(self.alpha[0] / 2.0)
        g = (self.alpha[k] - 1j * self.beta[k]) / 2.0
        return g if m > 0 else g.conjugate()

    @property
    def top_gamma(self) -> complex:
        return self.gamma(self.bandlimit)

    def evaluate(self, thetas) -> np.ndarray:
        t = np.asarray(thetas, dtype=float)
        out = np.full_like(t, self.alpha[0] / 2.0)
        for m in range(1, self.bandlimit + 1):
            out += self.alpha[m] * np.cos(m * t) + self.beta[m] * np.sin(m * t)
        return out

    def reflect(self) -> "HarmonicTrace":
        """Antipodal pullback f*(theta) = f(theta + pi); flips odd harmonics."""
        a = tuple(v * (-1.0) ** m for m, v in enumerate(self.alpha))
        b = tuple(v * (-1.0) ** m for m, v in enumerate(self.beta))
        return HarmonicTrace(self.bandlimit, a, b)

    def energy(self) -> float:
        """(1/pi) * integral of f^2 over one period, by Parseval."""
        return self.alpha[0] ** 2 / 2.0 + sum(
            a * a + b * b for a, b in zip(self.alpha[1:], self.beta[1:])
        )

    @staticmethod
    def from_samples(samples, bandlimit: int, rtol: float = 1e-10) -> "HarmonicTrace":
        """Recover coefficients from samples on a uniform theta grid.

        Parameters
        ----------
        samples : array
            Values on ``theta_j = 2 pi j / n``, ``n >= 4 * bandlimit + 4``.
        bandlimit : int
            Declared band limit N.
        rtol : float
            Spectral energy above N, relative to the largest coefficient,
            beyond which the samples are rejected as not band-limited.
        """
        y = np.asarray(samples, dtype=float)
        n = y.size
        if n < 4 * bandlimit + 4:
            raise ValueError(
                f"need at least {4 * bandlimit + 4} samples for band limit {bandlimit}, got {n}"
            )
        spec = np.fft.rfft(y)
        alpha_all = 2.0 * spec.real / n
        beta_all = -2.0 * spec.imag / n
        scale = max(float(np.max(np.abs(spec))) * 2.0 / n, 1e-300)
        tail = np.abs(spec[bandlimit + 1 :]) * 2.0 / n
        if tail.size and float(np.max(tail)) > rtol * scale:
            raise NotBandLimitedError(
                f"spectral energy {float(np.max(tail)):.3e} above band limit "
                f"{bandlimit} exceeds {rtol:.1e} x {scale:.3e}"
            )
        alpha = tuple(alpha_all[: bandlimit + 1])
        beta = (0.0,) + tuple(beta_all[1 : bandlimit + 1])
        return HarmonicTrace(bandlimit, alpha, beta)

    def save(self, path) -> None:
        lines = [f"bandlimit {self.bandlimit}"]
        for m in range(self.bandlimit + 1):
            lines.append(f"{m} {_FMT % self.alpha[m]} {_FMT % self.beta[m]}")
        Path(path).write_text("\n".join(lines) + "\n")

    @staticmethod
    def load(path) -> "HarmonicTrace":
        return parse_trace(Path(path).read_text())


def infer_trace(samples, rtol: float = 1e-8) -> HarmonicTrace:
    """Recover a trace from uniform samples without a declared band limit.

    Picks the smallest band limit whose spectral tail falls below ``rtol``
    relative to the largest coefficient.  Data whose spectrum never decays
    that far (noisy measurements, say) is rejected as not band-limited.
    """
    y = np.asarray(samples, dtype=float)
    spec = np.abs(np.fft.rfft(y)) * 2.0 / y.size
    scale = max(float(np.max(spec)), 1e-300)
    above = np.nonzero(spec > rtol * scale)[0]
    bandlimit = int(above[-1]) if above.size else 0
    if bandlimit > (y.size - 4) // 4:
        raise NotBandLimitedError(
            f"spectral content persists up to harmonic {bandlimit}, too close "
            f"to the grid limit for {y.size} samples"
        )
    return HarmonicTrace.from_samples(y, bandlimit, rtol)


def parse_trace(text: str) -> HarmonicTrace:
    """Parse the plain-text trace format (header ``bandlimit N`` then one
    ``m alpha_m beta_m`` line per harmonic)."""
    lines = [ln.strip() for ln in text.splitlines() if ln.strip() and not ln.startswith("#")]
    if not lines or not lines[0].startswith("bandlimit"):
        raise ValueError("trace file must start with a 'bandlimit N' header")
    n = int(lines[0].split()[1])
    alpha = [0.0] * (n + 1)
    beta = [0.0] * (n + 1)
    seen = set()
    for ln in lines[1:]:
        parts = ln.split()
        if len(parts) != 3:
            raise ValueError(f"malformed trace line: {ln!r}")
        m = int(parts[0])
        if m < 0 or m > n:
            raise ValueError(f"harmonic index {m} outside band limit {n}")
        if m in seen:
            raise ValueError(f"duplicate harmonic index {m}")
        seen.add(m)
        alpha[m] = float(parts[1])
        beta[m] = float(parts[2])
    return HarmonicTrace(n, tuple(alpha), tuple(beta))
