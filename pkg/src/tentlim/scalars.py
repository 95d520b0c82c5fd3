"""Dual-mode arithmetic: exact rationals or floats with tracked error bounds.

Every quantity in the library is either a ``fractions.Fraction`` (exact mode,
available whenever the slope and all inputs are rational) or an ``ErrFloat``,
a float paired with an accumulated absolute error bound.  Comparisons that
decide set membership or deduplication consult the bound; plain value
comparisons are used only where both branches of a decision agree at the
boundary (the tent map is continuous at the critical point).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Union

#: padding applied per floating operation, about 4 double ulps at scale 1
EPS = 2.0 ** -50


def _pad(v: float) -> float:
    return EPS * max(1.0, abs(v))


@dataclass(frozen=True)
class ErrFloat:
    """A float ``val`` known to lie within ``err`` of the intended real."""

    val: float
    err: float = 0.0

    def __post_init__(self):
        if not math.isfinite(self.val) or not math.isfinite(self.err):
            raise ValueError(f"non-finite ErrFloat ({self.val}, {self.err})")
        if self.err < 0.0:
            raise ValueError("negative error bound")

    @staticmethod
    def of(x) -> "ErrFloat":
        if isinstance(x, ErrFloat):
            return x
        if isinstance(x, int):
            return ErrFloat(float(x), 0.0)
        if isinstance(x, Fraction):
            v = float(x)
            return ErrFloat(v, _pad(v))
        if isinstance(x, float):
            return ErrFloat(x, 0.0)
        raise TypeError(f"cannot coerce {type(x).__name__} to ErrFloat")

    # arithmetic -----------------------------------------------------------

    def __add__(self, other):
        o = ErrFloat.of(other)
        v = self.val + o.val
        return ErrFloat(v, self.err + o.err + _pad(v))

    __radd__ = __add__

    def __sub__(self, other):
        o = ErrFloat.of(other)
        v = self.val - o.val
        return ErrFloat(v, self.err + o.err + _pad(v))

    def __rsub__(self, other):
        return ErrFloat.of(other) - self

    def __mul__(self, other):
        o = ErrFloat.of(other)
        v = self.val * o.val
        e = abs(self.val) * o.err + abs(o.val) * self.err + self.err * o.err
        return ErrFloat(v, e + _pad(v))

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = ErrFloat.of(other)
        if abs(o.val) <= o.err:
            raise ZeroDivisionError("division by a value not bounded away from zero")
        v = self.val / o.val
        e = (self.err + abs(v) * o.err) / (abs(o.val) - o.err)
        return ErrFloat(v, e + _pad(v))

    def __rtruediv__(self, other):
        return ErrFloat.of(other) / self

    def __neg__(self):
        return ErrFloat(-self.val, self.err)

    def __abs__(self):
        return ErrFloat(abs(self.val), self.err)

    def __pow__(self, n: int):
        if not isinstance(n, int) or n < 0:
            raise TypeError("ErrFloat powers are nonnegative integers")
        out = ErrFloat(1.0, 0.0)
        base = self
        k = n
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def __float__(self):
        return self.val

    def __repr__(self):
        return f"ErrFloat({self.val!r}, err={self.err:.3g})"


#: a library scalar: exact rational or error-bounded float
Real = Union[Fraction, ErrFloat]


def value(x) -> float:
    """Midpoint value of a scalar as a plain float."""
    if isinstance(x, ErrFloat):
        return x.val
    return float(x)


def err_bound(x) -> float:
    """Accumulated absolute error bound (0 for exact scalars)."""
    return x.err if isinstance(x, ErrFloat) else 0.0


def is_exact(x) -> bool:
    return isinstance(x, (int, Fraction))


def possibly_equal(a, b, tol: float = 0.0) -> bool:
    """True when the two scalars could denote the same real within tol."""
    if is_exact(a) and is_exact(b) and tol == 0.0:
        return a == b
    return abs(value(a) - value(b)) <= err_bound(a) + err_bound(b) + tol

def certainly_le(a, b, tol: float = 0.0) -> bool:
    """True when a <= b is guaranteed given both error bounds (plus tol slack)."""
    if is_exact(a) and is_exact(b):
        return a <= b
    return value(a) + err_bound(a) <= value(b) - err_bound(b) + tol


def midpoint_le(a, b) -> bool:
    """Compare midpoint values only; exact comparison for rationals."""
    if is_exact(a) and is_exact(b):
        return a <= b
    return value(a) <= value(b)


def midpoint_lt(a, b) -> bool:
    if is_exact(a) and is_exact(b):
        return a < b
    return value(a) < value(b)


def parse_scalar(text: str) -> Real:
    """Parse a CLI/config scalar.

    Rational strings (``"2"``, ``"3/2"``) give exact Fractions; anything with
    a decimal point or exponent gives a float with a one-ulp error bound.
    ``sqrt2`` and ``phi`` are accepted for the common irrational fixtures.
    """
    t = text.strip()
    if t == "sqrt2":
        return ErrFloat(math.sqrt(2.0), _pad(math.sqrt(2.0)))
    if t == "phi":
        v = (1.0 + math.sqrt(5.0)) / 2.0
        return ErrFloat(v, 2 * _pad(v))
    try:
        return Fraction(t)  # handles "2" and "3/2"
    except ValueError:
        pass
    v = float(t)
    return ErrFloat(v, _pad(v))


def format_scalar(x) -> str:
    """Inverse of parse_scalar for report output, round-trip safe per mode."""
    if isinstance(x, Fraction):
        return str(x)
    return repr(value(x))
