"""Configurable-precision real numbers.

``Real`` is the numeric substrate of the whole package: an arbitrary-precision
floating-point value tagged with the precision (in bits) it was computed at.
Arithmetic between two ``Real`` values is carried out at the larger of the two
precisions, with a few guard bits internally, and the result is rounded back
to that precision.

The default precision is 256 bits and can be overridden with the
``AIRYSUMS_PRECISION_BITS`` environment variable.
"""

from __future__ import annotations

import os
from fractions import Fraction
from typing import Union

from mpmath import fneg, mp, mpf, workprec

MIN_PRECISION_BITS = 64
GUARD_BITS = 32

Scalar = Union["Real", int, float, Fraction, str]


def default_precision_bits() -> int:
    """Package-wide default precision, overridable via the environment."""
    raw = os.environ.get("AIRYSUMS_PRECISION_BITS")
    if raw is None:
        return 256
    bits = int(raw)
    if bits < MIN_PRECISION_BITS:
        raise ValueError(
            f"AIRYSUMS_PRECISION_BITS must be >= {MIN_PRECISION_BITS}, got {bits}"
        )
    return bits


class PrecisionError(ArithmeticError):
    """Requested precision cannot be achieved by the evaluation scheme."""


def _to_mpf(x, prec: int) -> mpf:
    """Convert a scalar to mpf, rounding at `prec` bits."""
    with workprec(prec):
        if isinstance(x, Real):
            return +x.value
        if isinstance(x, Fraction):
            return mpf(x.numerator) / mpf(x.denominator)
        return mpf(x)


class Real:
    """An arbitrary-precision real with an explicit precision tag.

    Instances are immutable.  Mixed arithmetic with int, float, Fraction and
    decimal strings is supported; the plain operand is converted at the
    precision of the ``Real`` operand.
    """

    __slots__ = ("value", "precision_bits")

    def __init__(self, value, precision_bits: int | None = None):
        bits = default_precision_bits() if precision_bits is None else int(precision_bits)
        if bits < MIN_PRECISION_BITS:
            raise ValueError(f"precision_bits must be >= {MIN_PRECISION_BITS}, got {bits}")
        object.__setattr__(self, "precision_bits", bits)
        object.__setattr__(self, "value", _to_mpf(value, bits))

    def __setattr__(self, name, value):
        raise AttributeError("Real is immutable")

    # -- arithmetic ---------------------------------------------------------

    def _coerce(self, other) -> tuple[mpf, int]:
        if isinstance(other, Real):
            return other.value, other.precision_bits
        if isinstance(other, (int, float, Fraction, str)):
            return other, self.precision_bits
        return NotImplemented, 0

    def _binop(self, other, op):
        oval, obits = self._coerce(other)
        if oval is NotImplemented:
            return NotImplemented
        bits = max(self.precision_bits, obits)
        with workprec(bits + GUARD_BITS):
            if isinstance(oval, Fraction):
                oval = mpf(oval.numerator) / mpf(oval.denominator)
            raw = op(self.value, mpf(oval) if not isinstance(oval, mpf) else oval)
        return Real(raw, bits)

    def __add__(self, other):
        return self._binop(other, lambda a, b: a + b)

    __radd__ = __add__

    def __sub__(self, other):
        return self._binop(other, lambda a, b: a - b)

    def __rsub__(self, other):
        return self._binop(other, lambda a, b: b - a)

    def __mul__(self, other):
        return self._binop(other, lambda a, b: a * b)

    __rmul__ = __mul__

    def __truediv__(self, other):
        return self._binop(other, lambda a, b: a / b)

    def __rtruediv__(self, other):
        return self._binop(other, lambda a, b: b / a)

    def __pow__(self, other):
        return self._binop(other, lambda a, b: a ** b)

    def __neg__(self):
        # fneg(exact=True) sidesteps rounding at the ambient context precision
        return Real(fneg(self.value, exact=True), self.precision_bits)

    def __abs__(self):
        if self.value < 0:
            return -self
        return self

    # -- comparisons (on the underlying values) -----------------------------

    def _cmp_value(self, other):
        if isinstance(other, Real):
            return other.value
        if isinstance(other, (int, float, Fraction)):
            return _to_mpf(other, self.precision_bits)
        return NotImplemented

    def __eq__(self, other):
        v = self._cmp_value(other)
        return NotImplemented if v is NotImplemented else self.value == v

    def __lt__(self, other):
        v = self._cmp_value(other)
        return NotImplemented if v is NotImplemented else self.value < v

    def __le__(self, other):
        v = self._cmp_value(other)
        return NotImplemented if v is NotImplemented else self.value <= v

    def __gt__(self, other):
        v = self._cmp_value(other)
        return NotImplemented if v is NotImplemented else self.value > v

    def __ge__(self, other):
        v = self._cmp_value(other)
        return NotImplemented if v is NotImplemented else self.value >= v

    def __hash__(self):
        return hash(self.value)

    def __float__(self):
        return float(self.value)

    def __repr__(self):
        return f"Real({mp.nstr(self.value, 20)}, bits={self.precision_bits})"

    # -- serialization ------------------------------------------------------

    def decimal_digits(self) -> int:
        """Decimal digits that faithfully represent this precision."""
        return int(self.precision_bits * 0.30103) + 3

    def to_decimal_string(self) -> str:
        return mp.nstr(self.value, self.decimal_digits(), strip_zeros=False)

    @classmethod
    def from_decimal_string(cls, s: str, precision_bits: int) -> "Real":
        return cls(s, precision_bits)
