"""Exact symbolic substrate: polynomials in zeta_n and Laurent polynomials
in the zero difference Delta = zeta_k - zeta_n.

Everything here is exact rational arithmetic (``fractions.Fraction``); no
floating point enters until a value is explicitly evaluated at numeric zeros.
Two layers:

* ``ZetaPoly`` - a sparse polynomial in zeta_n with rational coefficients.
  The closed forms of all spectral sums live here (for example zeta_n/3 or
  2*zeta_n**3/945 + 1/112).
* ``DeltaLaurent`` - a sparse Laurent polynomial in Delta whose coefficients
  are ZetaPoly values, plus a parity flag for the alternating sign
  sigma = (-1)^(n-k+1) carried by off-diagonal matrix elements.  sigma
  squares to one, so the flag combines by XOR under multiplication.

zeta_k itself is never stored: it is eliminated at construction time as
zeta_n + Delta, which is what turns "sum over k" into a pure operation on
Delta powers.
"""

from __future__ import annotations

from fractions import Fraction
from math import comb
from typing import Mapping, Union

from mpmath import mpf, workprec

from .precision import GUARD_BITS, Real

Rational = Fraction
CoeffLike = Union[int, Fraction]


def _as_fraction(c: CoeffLike) -> Fraction:
    if isinstance(c, Fraction):
        return c
    if isinstance(c, int):
        return Fraction(c)
    raise TypeError(f"exact coefficient required, got {type(c).__name__}")


class ZetaPoly:
    """Sparse polynomial in zeta_n over the rationals.  Immutable."""

    __slots__ = ("_coeffs",)

    def __init__(self, coeffs: Mapping[int, CoeffLike] | None = None):
        clean: dict[int, Fraction] = {}
        if coeffs:
            for power, c in coeffs.items():
                if power < 0:
                    raise ValueError(f"zeta power must be >= 0, got {power}")
                f = _as_fraction(c)
                if f != 0:
                    clean[int(power)] = f
        object.__setattr__(self, "_coeffs", clean)

    def __setattr__(self, name, value):
        raise AttributeError("ZetaPoly is immutable")

    # -- construction helpers ------------------------------------------------

    @classmethod
    def constant(cls, c: CoeffLike) -> "ZetaPoly":
        return cls({0: c})

    @classmethod
    def zeta(cls, power: int = 1) -> "ZetaPoly":
        return cls({power: 1})

    # -- ring operations ------------------------------------------------------

    def __add__(self, other):
        other = _coerce_zp(other)
        if other is NotImplemented:
            return NotImplemented
        r = dict(self._coeffs)
        for k, v in other._coeffs.items():
            r[k] = r.get(k, Fraction(0)) + v
        return ZetaPoly(r)

    __radd__ = __add__

    def __neg__(self):
        return ZetaPoly({k: -v for k, v in self._coeffs.items()})

    def __sub__(self, other):
        other = _coerce_zp(other)
        if other is NotImplemented:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return _coerce_zp(other) - self

    def __mul__(self, other):
        other = _coerce_zp(other)
        if other is NotImplemented:
            return NotImplemented
        r: dict[int, Fraction] = {}
        for i, u in self._coeffs.items():
            for j, v in other._coeffs.items():
                r[i + j] = r.get(i + j, Fraction(0)) + u * v
        return ZetaPoly(r)

    __rmul__ = __mul__

    def __truediv__(self, c: CoeffLike):
        f = _as_fraction(c)
        if f == 0:
            raise ZeroDivisionError("division of ZetaPoly by zero")
        return ZetaPoly({k: v / f for k, v in self._coeffs.items()})

    def __eq__(self, other):
        other = _coerce_zp(other)
        if other is NotImplemented:
            return NotImplemented
        return self._coeffs == other._coeffs

    def __hash__(self):
        return hash(frozenset(self._coeffs.items()))

    def __bool__(self):
        return bool(self._coeffs)

    # -- inspection ------------------------------------------------------------

    def coefficient(self, power: int) -> Fraction:
        return self._coeffs.get(power, Fraction(0))

    def powers(self) -> list[int]:
        return sorted(self._coeffs)

    def items(self):
        return sorted(self._coeffs.items())

    def is_constant(self) -> bool:
        return set(self._coeffs) <= {0}

    def __repr__(self):
        if not self._coeffs:
            return "ZetaPoly(0)"
        parts = []
        for k, v in sorted(self._coeffs.items(), reverse=True):
            if k == 0:
                parts.append(f"{v}")
            elif k == 1:
                parts.append(f"({v})*zeta")
            else:
                parts.append(f"({v})*zeta^{k}")
        return " + ".join(parts)

    # -- evaluation and serialization -------------------------------------------

    def evaluate(self, zeta_n: Real) -> Real:
        """Evaluation at a numeric zeta_n, exact to its precision."""
        bits = zeta_n.precision_bits
        with workprec(bits + GUARD_BITS):
            z = zeta_n.value
            acc = mpf(0)
            for power, c in self._coeffs.items():
                acc += mpf(c.numerator) / mpf(c.denominator) * z ** power
        return Real(acc, bits)

    def to_records(self, power_key: str = "power") -> list[dict]:
        """[{power, numerator, denominator}] with big integers as strings."""
        return [
            {power_key: k, "numerator": str(v.numerator), "denominator": str(v.denominator)}
            for k, v in self.items()
        ]

    @classmethod
    def from_records(cls, records, power_key: str = "power") -> "ZetaPoly":
        return cls(
            {
                int(r[power_key]): Fraction(int(r["numerator"]), int(r["denominator"]))
                for r in records
            }
        )


def _coerce_zp(x) -> "ZetaPoly":
    if isinstance(x, ZetaPoly):
        return x
    if isinstance(x, (int, Fraction)):
        return ZetaPoly.constant(x)
    return NotImplemented


ZP_ZERO = ZetaPoly()
ZP_ONE = ZetaPoly.constant(1)


class DeltaLaurent:
    """Sparse Laurent polynomial in Delta = zeta_k - zeta_n over ZetaPoly,
    with a sign-parity flag for the overall factor sigma = (-1)^(n-k+1).

    Multiplication XORs the parity flags (sigma^2 = 1), which is why every
    bilinear product of two off-diagonal matrix elements is sign-free and in
    turn why all the spectral sums are sign-free.
    """

    __slots__ = ("_terms", "sigma_parity")

    def __init__(self, terms: Mapping[int, ZetaPoly | CoeffLike] | None = None,
                 sigma_parity: bool = False):
        clean: dict[int, ZetaPoly] = {}
        if terms:
            for dpow, zp in terms.items():
                if not isinstance(zp, ZetaPoly):
                    zp = _coerce_zp(zp)
                if zp:
                    clean[int(dpow)] = zp
        object.__setattr__(self, "_terms", clean)
        object.__setattr__(self, "sigma_parity", bool(sigma_parity))

    def __setattr__(self, name, value):
        raise AttributeError("DeltaLaurent is immutable")

    # -- construction helpers ----------------------------------------------

    @classmethod
    def monomial(cls, dpow: int, coeff: ZetaPoly | CoeffLike, sigma_parity: bool = False):
        return cls({dpow: coeff}, sigma_parity)

    @classmethod
    def zero(cls) -> "DeltaLaurent":
        return cls()

    # -- ring operations ------------------------------------------------------

    def _check_parity(self, other: "DeltaLaurent"):
        if self._terms and other._terms and self.sigma_parity != other.sigma_parity:
            raise ValueError("cannot add terms of different sigma parity")

    def __add__(self, other):
        if not isinstance(other, DeltaLaurent):
            return NotImplemented
        self._check_parity(other)
        r = dict(self._terms)
        for k, v in other._terms.items():
            s = r.get(k, ZP_ZERO) + v
            if s:
                r[k] = s
            elif k in r:
                del r[k]
        parity = self.sigma_parity if self._terms else other.sigma_parity
        return DeltaLaurent(r, parity)

    def __neg__(self):
        return DeltaLaurent({k: -v for k, v in self._terms.items()}, self.sigma_parity)

    def __sub__(self, other):
        if not isinstance(other, DeltaLaurent):
            return NotImplemented
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, (int, Fraction, ZetaPoly)):
            return self.scale(other)
        if not isinstance(other, DeltaLaurent):
            return NotImplemented
        r: dict[int, ZetaPoly] = {}
        for i, u in self._terms.items():
            for j, v in other._terms.items():
                s = r.get(i + j, ZP_ZERO) + u * v
                if s:
                    r[i + j] = s
                elif i + j in r:
                    del r[i + j]
        return DeltaLaurent(r, self.sigma_parity ^ other.sigma_parity)

    def __rmul__(self, other):
        if isinstance(other, (int, Fraction, ZetaPoly)):
            return self.scale(other)
        return NotImplemented

    def scale(self, c: ZetaPoly | CoeffLike) -> "DeltaLaurent":
        zp = c if isinstance(c, ZetaPoly) else _coerce_zp(c)
        return DeltaLaurent({k: v * zp for k, v in self._terms.items()}, self.sigma_parity)

    def shift(self, dpow: int) -> "DeltaLaurent":
        """Multiply by Delta^dpow."""
        return DeltaLaurent({k + dpow: v for k, v in self._terms.items()}, self.sigma_parity)

    def __eq__(self, other):
        if not isinstance(other, DeltaLaurent):
            return NotImplemented
        if not self._terms and not other._terms:
            return True
        return self._terms == other._terms and self.sigma_parity == other.sigma_parity

    def __hash__(self):
        return hash((frozenset(self._terms.items()), self.sigma_parity if self._terms else False))

    def __bool__(self):
        return bool(self._terms)

    # -- inspection ----------------------------------------------------------

    def delta_powers(self) -> list[int]:
        return sorted(self._terms)

    def coefficient(self, dpow: int) -> ZetaPoly:
        return self._terms.get(dpow, ZP_ZERO)

    def items(self):
        return sorted(self._terms.items())

    def min_delta_power(self) -> int | None:
        return min(self._terms) if self._terms else None

    def max_delta_power(self) -> int | None:
        return max(self._terms) if self._terms else None

    def __repr__(self):
        if not self._terms:
            return "DeltaLaurent(0)"
        head = "sigma * " if self.sigma_parity else ""
        body = "  +  ".join(
            f"[{v!r}] * Delta^{k}" for k, v in sorted(self._terms.items())
        )
        return head + body

    # -- substitutions --------------------------------------------------------

    def swap_indices(self) -> "DeltaLaurent":
        """The same expression rebuilt around the other index.

        Exchanging n and k maps Delta -> -Delta and zeta_n -> zeta_n + Delta,
        while sigma only depends on |n - k| parity and is unchanged.  A matrix
        element that is symmetric in its indices is a fixed point of this map.
        """
        result = DeltaLaurent({}, self.sigma_parity)
        for dpow, zp in self._terms.items():
            for zpow, c in zp.items():
                # (zeta_n + Delta)^zpow expanded binomially
                expanded = {}
                for j in range(zpow + 1):
                    coeff = c * _binom_int(zpow, j)
                    expanded[j] = expanded.get(j, Fraction(0)) + coeff
                # Delta^dpow -> (-Delta)^dpow
                sign = -1 if dpow % 2 else 1
                for j, cj in expanded.items():
                    term = DeltaLaurent(
                        {dpow + j: ZetaPoly({zpow - j: sign * cj})}, self.sigma_parity
                    )
                    result = result + term
        return result

    # -- evaluation -----------------------------------------------------------

    def evaluate(self, zeta_n, delta, sigma: int = 1):
        """Evaluate at numbers (Real, Fraction or int).  sigma must be +-1."""
        if sigma not in (1, -1):
            raise ValueError("sigma must be +1 or -1")
        if isinstance(zeta_n, Real) or isinstance(delta, Real):
            bits = max(
                getattr(zeta_n, "precision_bits", 0), getattr(delta, "precision_bits", 0)
            )
            zr = zeta_n if isinstance(zeta_n, Real) else Real(zeta_n, bits)
            dr = delta if isinstance(delta, Real) else Real(delta, bits)
            total = Real(0, bits)
            for dpow, zp in self.items():
                total = total + zp.evaluate(zr) * dr ** dpow
            return total * sigma if self.sigma_parity else total
        # exact path
        total = Fraction(0)
        for dpow, zp in self.items():
            zval = sum((c * zeta_n ** k for k, c in zp.items()), Fraction(0))
            total += zval * Fraction(delta) ** dpow
        return total * sigma if self.sigma_parity else total


def _binom_int(n: int, k: int) -> int:
    return comb(n, k)


def divide_exact(a: ZetaPoly, b: ZetaPoly) -> ZetaPoly:
    """Exact polynomial division a / b; raises if b does not divide a."""
    if not b:
        raise ZeroDivisionError("division of ZetaPoly by zero")
    rem = {k: v for k, v in a.items()}
    out: dict[int, Fraction] = {}
    b_items = b.items()
    b_lead_pow, b_lead_c = b_items[-1]
    while rem:
        r_lead_pow = max(rem)
        if r_lead_pow < b_lead_pow:
            raise ArithmeticError(f"{b!r} does not divide {a!r} exactly")
        q_pow = r_lead_pow - b_lead_pow
        q_c = rem[r_lead_pow] / b_lead_c
        out[q_pow] = q_c
        for pw, c in b_items:
            npw = pw + q_pow
            nv = rem.get(npw, Fraction(0)) - c * q_c
            if nv == 0:
                rem.pop(npw, None)
            else:
                rem[npw] = nv
    return ZetaPoly(out)


DL_ZERO = DeltaLaurent()


def coefficient_of_delta_power(p: DeltaLaurent, m: int) -> ZetaPoly:
    """The ZetaPoly multiplying Delta^m (zero polynomial if absent).

    The sigma flag is not folded in; read it from ``p.sigma_parity``.
    """
    return p.coefficient(m)


def zeta_ave_factor() -> DeltaLaurent:
    """(zeta_n + zeta_k)/2 rewritten as zeta_n + Delta/2."""
    return DeltaLaurent({0: ZetaPoly.zeta(), 1: ZetaPoly.constant(Fraction(1, 2))})


def substitute_zeta_ave(expr: Mapping[int, DeltaLaurent]) -> DeltaLaurent:
    """Eliminate symbolic powers of zeta_ave = (zeta_n + zeta_k)/2.

    ``expr`` maps each zeta_ave power to its DeltaLaurent cofactor; every
    marker is replaced by (zeta_n + Delta/2)^power and the result collected.
    """
    total = DL_ZERO
    ave = zeta_ave_factor()
    for ave_pow, part in expr.items():
        if ave_pow < 0:
            raise ValueError("zeta_ave power must be >= 0")
        factor = DeltaLaurent({0: ZP_ONE})
        for _ in range(ave_pow):
            factor = factor * ave
        total = total + factor * part
    return total
