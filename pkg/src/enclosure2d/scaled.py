"""Overflow-safe complex numbers stored as ``mantissa * exp(log_scale)``.

Indicator functionals grow like ``exp(tau * h)`` and must stay usable for
``tau`` far beyond the range of IEEE doubles, so every quantity that can be
exponentially large or small is carried in split form: a complex mantissa of
moderate magnitude plus a real natural-log scale.  Arithmetic rescales to a
common exponent before combining mantissas, which keeps relative accuracy
even when the operands differ by hundreds of orders of magnitude.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

_MANTISSA_LO = 1e-4
_MANTISSA_HI = 1e4


@dataclass(frozen=True)
class ScaledComplex:
    """Complex value ``mantissa * exp(log_scale)``.

    The exact zero is represented as ``(0+0j, 0.0)``.  Construct through
    :meth:`make` (or the arithmetic operators), which normalizes the mantissa
    magnitude into ``[1e-4, 1e4]``.
    """

    mantissa: complex
    log_scale: float

    @staticmethod
    def make(mantissa: complex, log_scale: float = 0.0) -> "ScaledComplex":
        return ScaledComplex(complex(mantissa), float(log_scale)).normalized()

    @staticmethod
    def zero() -> "ScaledComplex":
        return ScaledComplex(0j, 0.0)

    @staticmethod
    def from_complex(value: complex) -> "ScaledComplex":
        return ScaledComplex.make(value, 0.0)

    def normalized(self) -> "ScaledComplex":
        m = self.mantissa
        if m == 0:
            return ScaledComplex(0j, 0.0)
        r = abs(m)
        if _MANTISSA_LO <= r <= _MANTISSA_HI and math.isfinite(self.log_scale):
            return self
        shift = math.log(r)
        return ScaledComplex(m / r, self.log_scale + shift)

    @property
    def is_zero(self) -> bool:
        return self.mantissa == 0

    @property
    def log_abs(self) -> float:
        """Natural log of the magnitude; ``-inf`` for zero."""
        if self.mantissa == 0:
            return -math.inf
        return math.log(abs(self.mantissa)) + self.log_scale

    @property
    def phase(self) -> float:
        return cmath.phase(self.mantissa)

    def to_complex(self) -> complex:
        """Collapse to an ordinary complex; raises OverflowError if the
        value exceeds double range."""
        if self.mantissa == 0:
            return 0j
        return self.mantissa * math.exp(self.log_scale)

    def conjugate(self) -> "ScaledComplex":
        return ScaledComplex(self.mantissa.conjugate(), self.log_scale)

    def __neg__(self) -> "ScaledComplex":
        return ScaledComplex(-self.mantissa, self.log_scale)

    def __add__(self, other: "ScaledComplex") -> "ScaledComplex":
        if not isinstance(other, ScaledComplex):
            return NotImplemented
        if self.mantissa == 0:
            return other.normalized()
        if other.mantissa == 0:
            return self.normalized()
        # Rescale the smaller operand; exp() of a large negative gap
        # underflows to zero, which is the correct limit.
        if self.log_scale >= other.log_scale:
            hi, lo = self, other
        else:
            hi, lo = other, self
        gap = lo.log_scale - hi.log_scale
        bump = math.exp(gap) if gap > -745.0 else 0.0
        return ScaledComplex.make(hi.mantissa + lo.mantissa * bump, hi.log_scale)

    def __sub__(self, other: "ScaledComplex") -> "ScaledComplex":
        return self.__add__(-other)

    def __mul__(self, other):
        if isinstance(other, ScaledComplex):
            if self.mantissa == 0 or other.mantissa == 0:
                return ScaledComplex.zero()
            return ScaledComplex.make(
                self.mantissa * other.mantissa, self.log_scale + other.log_scale
            )
        if isinstance(other, (int, float, complex)):
            if other == 0 or self.mantissa == 0:
                return ScaledComplex.zero()
            return ScaledComplex.make(self.mantissa * other, self.log_scale)
        return NotImplemented

    __rmul__ = __mul__

    def scaled_by_log(self, log_factor: float) -> "ScaledComplex":
        """Multiply by ``exp(log_factor)`` exactly (no mantissa roundoff)."""
        if self.mantissa == 0:
            return ScaledComplex.zero()
        return ScaledComplex(self.mantissa, self.log_scale + log_factor)

    def ratio_log(self, other: "ScaledComplex") -> float:
        """``log(|self| / |other|)`` without leaving split form."""
        return self.log_abs - other.log_abs

    def almost_equal(self, other: "ScaledComplex", rtol: float = 1e-12) -> bool:
        """Relative comparison performed at a shared exponent."""
        diff = self - other
        if diff.is_zero:
            return True
        ref = max(self.log_abs, other.log_abs)
        if ref == -math.inf:
            return False
        return diff.log_abs - ref <= math.log(rtol)
