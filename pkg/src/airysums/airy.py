"""Arbitrary-precision Airy function Ai, its derivative, and its zeros.

The bound states of a particle bouncing on a hard floor under a constant
force are shifted Airy functions, and the scaled energy levels are the
magnitudes zeta_n of the zeros of Ai: Ai(-zeta_n) = 0 with
0 < zeta_1 < zeta_2 < ...  Everything downstream (matrix elements, spectral
sums) is built on top of the two evaluators and the zero finder in this
module.

Evaluation strategy
-------------------
* Moderate arguments: the Maclaurin series of the two power-series solutions
  of y'' = x*y, combined with the exact prefactors
  Ai(0) = 3^(-2/3)/Gamma(2/3) and Ai'(0) = -3^(-1/3)/Gamma(1/3).
  The series suffers cancellation that grows like exp((4/3)|x|^(3/2)) for
  x > 0 and exp((2/3)|x|^(3/2)) for x < 0, so the working precision is
  raised accordingly before summing.
* Large |x|: the standard asymptotic expansions (exponential for x > 0,
  oscillatory for x < 0), truncated at the smallest term.  The crossover is
  precision dependent: the asymptotic branch is only used where its optimal
  truncation error, roughly exp(-(4/3)|x|^(3/2)), meets the requested
  precision.  At the 256-bit default this puts the switch near |x| = 29.

Zeros are found by Newton iteration on Ai with derivative Ai', seeded by the
large-index closed-form estimate zeta_n ~ [3*pi/2 (n - 1/4)]^(2/3) and
bracket-checked against the estimates for the neighbouring indices.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterator

from mpmath import fneg, mp, mpf, workprec
from mpmath import cos as mp_cos, exp as mp_exp, gamma as mp_gamma
from mpmath import pi as mp_pi, sin as mp_sin, sqrt as mp_sqrt

from .precision import GUARD_BITS, PrecisionError, Real, default_precision_bits

LOG2_E = 1.4426950408889634
MIN_SEED_BITS = 64
_MAX_GUARD_BITS = 1 << 20
_MAX_SERIES_TERMS = 200_000
_NEWTON_MAX_ITERATIONS = 100


class ConvergenceError(ArithmeticError):
    """An iteration failed to converge within its budget."""


class BracketError(ArithmeticError):
    """A refined zero left the bracket of its index (wrong basin)."""


# ---------------------------------------------------------------------------
# evaluation
# ---------------------------------------------------------------------------

@lru_cache(maxsize=64)
def _ai_origin_constants(wp: int):
    """(Ai(0), Ai'(0)) at working precision wp."""
    with workprec(wp):
        c1 = mpf(3) ** (mpf(-2) / 3) / mp_gamma(mpf(2) / 3)
        c2 = -(mpf(3) ** (mpf(-1) / 3)) / mp_gamma(mpf(1) / 3)
        return c1, c2


def _xi_of(x_abs: float) -> float:
    return (2.0 / 3.0) * x_abs ** 1.5


def _series_guard_bits(x: mpf) -> int:
    # Cancellation loss: ~2*xi*log2(e) bits for x > 0, ~xi*log2(e) for x < 0.
    xi = _xi_of(abs(float(x)))
    factor = 2.0 if x > 0 else 1.0
    return int(factor * xi * LOG2_E) + 16


def _ai_pair_series(x: mpf, prec: int) -> tuple[mpf, mpf]:
    """(Ai(x), Ai'(x)) via the Maclaurin series, any finite x."""
    cancel = _series_guard_bits(x)
    if cancel > _MAX_GUARD_BITS:
        raise PrecisionError(
            f"series cancellation guard of {cancel} bits exceeds budget at x={float(x)}"
        )
    wp = prec + GUARD_BITS + cancel
    with workprec(wp):
        xw = +x
        c1, c2 = _ai_origin_constants(wp)
        if xw == 0:
            return c1, c2
        x3 = xw * xw * xw
        # f = sum A_k x^{3k},     A_0 = 1, A_k = A_{k-1}/((3k-1)(3k))
        # g = sum B_k x^{3k+1},   B_0 = 1, B_k = B_{k-1}/((3k)(3k+1))
        # fp, gp are the termwise derivatives accumulated in the same loop.
        tf = mpf(1)
        tg = xw
        f = tf
        g = tg
        fp = mpf(0)
        gp = mpf(1)
        eps = mpf(2) ** (-(wp - 8))
        need_terms = abs(float(x)) ** 1.5  # terms until |x|^3/(3k)^2 < 1
        k = 1
        while True:
            tf = tf * x3 / ((3 * k - 1) * (3 * k))
            tg = tg * x3 / ((3 * k) * (3 * k + 1))
            f += tf
            g += tg
            fp += tf * (3 * k) / xw
            gp += tg * (3 * k + 1) / xw
            if 3 * k > need_terms and abs(tf) < eps * abs(f) + eps and abs(tg) < eps * abs(g) + eps:
                break
            k += 1
            if k > _MAX_SERIES_TERMS:
                raise ConvergenceError(f"Maclaurin series stalled at x={float(x)}")
        ai = c1 * f + c2 * g
        aip = c1 * fp + c2 * gp
    with workprec(prec):
        return +ai, +aip


def _asymptotic_u_v(k: int, u_prev: mpf) -> tuple[mpf, mpf]:
    """k-th coefficients of the Ai / Ai' asymptotic series from u_{k-1}."""
    u = u_prev * (6 * k - 5) * (6 * k - 1) / (72 * k)
    v = u * (6 * k + 1) / (1 - 6 * k)
    return u, v


def _ai_pair_asymptotic_pos(x: mpf, prec: int) -> tuple[mpf, mpf]:
    """(Ai(x), Ai'(x)) for large positive x: exponentially small regime."""
    wp = prec + GUARD_BITS
    with workprec(wp + 16):
        xw = +x
        xi = mpf(2) / 3 * xw ** mpf("1.5")
        s_ai = mpf(1)
        s_aip = mpf(1)
        u = mpf(1)
        xin = mpf(1)
        eps = mpf(2) ** (-(prec + 24))
        last = mpf(1)
        k = 1
        while True:
            u, v = _asymptotic_u_v(k, u)
            xin /= xi
            sgn = -1 if k % 2 else 1
            t = u * xin
            s_ai += sgn * t
            s_aip += sgn * v * xin
            if abs(t) < eps:
                break
            if abs(t) > last:
                raise PrecisionError(
                    f"asymptotic expansion bottoms out above target precision at x={float(x)}"
                )
            last = abs(t)
            k += 1
        root_pi = mp_sqrt(mp_pi)
        x4 = xw ** mpf("0.25")
        damp = mp_exp(-xi)
        ai = damp * s_ai / (2 * root_pi * x4)
        aip = -x4 * damp * s_aip / (2 * root_pi)
    with workprec(prec):
        return +ai, +aip


def _ai_pair_asymptotic_neg(x: mpf, prec: int) -> tuple[mpf, mpf]:
    """(Ai(x), Ai'(x)) for large negative x: oscillatory regime."""
    z_f = -float(x)
    xi_f = _xi_of(z_f)
    # The phase xi enters cos/sin, so its absolute error must stay below the
    # target: add bits for the magnitude of xi.
    wp = prec + GUARD_BITS + max(0, int(math.log2(xi_f)) + 4)
    with workprec(wp + 16):
        z = -(+x)
        xi = mpf(2) / 3 * z ** mpf("1.5")
        # Even / odd splits of the u- and v-series, w = xi - pi/4:
        #   Ai(-z)  = ( cos(w) P + sin(w) Q ) / (sqrt(pi) z^{1/4})
        #   Ai'(-z) = ( sin(w) R - cos(w) S ) * z^{1/4} / sqrt(pi)
        #   P = sum (-1)^m u_{2m} xi^{-2m},  Q = sum (-1)^m u_{2m+1} xi^{-2m-1}
        #   R = sum (-1)^m v_{2m} xi^{-2m},  S = sum (-1)^m v_{2m+1} xi^{-2m-1}
        # truncated at the smallest term.
        P = mpf(1)
        Q = mpf(0)
        R = mpf(1)
        S = mpf(0)
        u = mpf(1)
        xin = mpf(1)
        eps = mpf(2) ** (-(prec + 24))
        last = mpf(1)
        k = 1
        while True:
            u, v = _asymptotic_u_v(k, u)
            xin /= xi
            t = u * xin
            tv = v * xin
            if k % 2 == 0:
                sgn = -1 if (k // 2) % 2 else 1
                P += sgn * t
                R += sgn * tv
            else:
                sgn = -1 if ((k - 1) // 2) % 2 else 1
                Q += sgn * t
                S += sgn * tv
            if abs(t) < eps and abs(tv) < eps:
                break
            if abs(t) > last:
                raise PrecisionError(
                    f"asymptotic expansion bottoms out above target precision at x={float(x)}"
                )
            last = abs(t)
            k += 1
        w = xi - mp_pi / 4
        cw = mp_cos(w)
        sw = mp_sin(w)
        root_pi = mp_sqrt(mp_pi)
        z4 = z ** mpf("0.25")
        ai = (cw * P + sw * Q) / (root_pi * z4)
        aip = (sw * R - cw * S) * z4 / root_pi
    with workprec(prec):
        return +ai, +aip


def _asymptotic_switch(prec: int) -> float:
    """|x| above which the asymptotic branch certifiably meets `prec` bits."""
    xi_min = (prec + GUARD_BITS + 24) / (2.0 * LOG2_E)
    return (1.5 * xi_min) ** (2.0 / 3.0)


def _ai_pair(x: mpf, prec: int) -> tuple[mpf, mpf]:
    ax = abs(float(x))
    if ax >= _asymptotic_switch(prec):
        if x > 0:
            return _ai_pair_asymptotic_pos(x, prec)
        return _ai_pair_asymptotic_neg(x, prec)
    return _ai_pair_series(x, prec)


def eval_ai(x: Real) -> Real:
    """Ai(x) to the precision carried by x."""
    ai, _ = _ai_pair(x.value, x.precision_bits)
    return Real(ai, x.precision_bits)


def eval_ai_prime(x: Real) -> Real:
    """Ai'(x) to the precision carried by x."""
    _, aip = _ai_pair(x.value, x.precision_bits)
    return Real(aip, x.precision_bits)


# ---------------------------------------------------------------------------
# zeros
# ---------------------------------------------------------------------------

def asymptotic_zero(n: int, precision_bits: int | None = None) -> Real:
    """Large-index estimate zeta_n ~ [3*pi/2 (n - 1/4)]^(2/3), exactly as written."""
    if n < 1:
        raise ValueError(f"zero index must be >= 1, got {n}")
    bits = default_precision_bits() if precision_bits is None else precision_bits
    with workprec(bits + GUARD_BITS):
        est = (mpf(3) * mp_pi / 2 * (mpf(n) - mpf(1) / 4)) ** (mpf(2) / 3)
    return Real(est, bits)


def _zero_bracket(n: int) -> tuple[float, float]:
    """Open interval that must contain zeta_n, from the index estimates.

    The estimate is within 1% of the true zero for every n while consecutive
    zeros are separated by more than 25%, so midpoints of consecutive
    estimates bracket each basin.
    """
    est = lambda m: (1.5 * math.pi * (m - 0.25)) ** (2.0 / 3.0)
    lo = 0.0 if n == 1 else 0.5 * (est(n - 1) + est(n))
    hi = 0.5 * (est(n) + est(n + 1))
    return lo, hi


def zero(n: int, precision_bits: int | None = None) -> Real:
    """The n-th zero magnitude zeta_n, so that Ai(-zeta_n) = 0.

    Newton iteration on t -> t + Ai(-t)/Ai'(-t), seeded by
    ``asymptotic_zero(n)``.  Early iterations run at reduced precision
    (doubled every step); the iteration stops once the step falls below
    2^-precision relative to the zero.
    """
    bits = default_precision_bits() if precision_bits is None else precision_bits
    target = bits + 16
    t = asymptotic_zero(n, MIN_SEED_BITS).value
    p = MIN_SEED_BITS
    for _ in range(_NEWTON_MAX_ITERATIONS):
        wp = min(p, target)
        ai, aip = _ai_pair(fneg(t, exact=True), wp)
        with workprec(wp + 8):
            step = ai / aip
            t = t + step
        if p >= target and abs(step) <= mpf(2) ** (-bits) * t:
            break
        p = min(2 * p, target)
    else:
        raise ConvergenceError(
            f"Newton refinement of zero {n} did not converge in "
            f"{_NEWTON_MAX_ITERATIONS} iterations (precision misconfiguration?)"
        )
    lo, hi = _zero_bracket(n)
    if not (lo < float(t) < hi):
        raise BracketError(
            f"refined zero {float(t)} for index {n} escaped bracket ({lo}, {hi})"
        )
    with workprec(bits):
        return Real(+t, bits)


# ---------------------------------------------------------------------------
# tables and units
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ZeroTable:
    """Contiguous, residual-verified table of zeros zeta_1 .. zeta_n_max."""

    zeros: tuple[Real, ...]
    precision_bits: int
    tolerance: Real

    def __post_init__(self):
        for i in range(1, len(self.zeros)):
            if not self.zeros[i - 1] < self.zeros[i]:
                raise ValueError(f"zeros not strictly increasing at index {i + 1}")

    def __len__(self) -> int:
        return len(self.zeros)

    def zeta(self, n: int) -> Real:
        if not 1 <= n <= len(self.zeros):
            raise IndexError(f"zero index {n} outside table 1..{len(self.zeros)}")
        return self.zeros[n - 1]

    def __iter__(self) -> Iterator[tuple[int, Real]]:
        return ((i + 1, z) for i, z in enumerate(self.zeros))

    def residuals_ok(self, precision_bits: int | None = None) -> bool:
        """Re-assert |Ai(-zeta_n)| < tolerance for every entry."""
        bits = self.precision_bits if precision_bits is None else precision_bits
        if bits < self.precision_bits:
            raise ValueError("re-check precision must be >= build precision")
        for _, z in self:
            ai, _ = _ai_pair(fneg(z.value, exact=True), bits)
            if not abs(ai) < self.tolerance.value:
                return False
        return True

    def to_records(self) -> list[dict]:
        return [{"n": n, "zeta": z.to_decimal_string()} for n, z in self]


def default_tolerance(precision_bits: int) -> Real:
    """Residual tolerance leaving ~56 bits of headroom below the precision."""
    return Real(mpf(2) ** (-(precision_bits - 56)), precision_bits)


def build_zero_table(
    n_max: int,
    precision_bits: int | None = None,
    tolerance: Real | None = None,
) -> ZeroTable:
    """Zeros 1..n_max with residuals verified against the tolerance."""
    if n_max < 1:
        raise ValueError(f"n_max must be >= 1, got {n_max}")
    bits = default_precision_bits() if precision_bits is None else precision_bits
    tol = default_tolerance(bits) if tolerance is None else tolerance
    zeros = []
    for n in range(1, n_max + 1):
        try:
            z = zero(n, bits)
            ai, _ = _ai_pair(fneg(z.value, exact=True), bits)
            if not abs(ai) < tol.value:
                raise ConvergenceError(
                    f"residual |Ai(-zeta)| = {mp.nstr(abs(ai), 5)} exceeds tolerance"
                )
        except (ConvergenceError, BracketError, PrecisionError) as exc:
            raise type(exc)(f"zero index {n}: {exc}") from exc
        zeros.append(z)
    return ZeroTable(zeros=tuple(zeros), precision_bits=bits, tolerance=tol)


@dataclass(frozen=True)
class ScaledUnits:
    """Length / energy / force scales relating scaled results to physical ones.

    All internal computations use rho = E0 = F = 1; energies re-dimensionalize
    as E_n = zeta_n * E0.
    """

    rho: Real = field(default_factory=lambda: Real(1))
    E0: Real = field(default_factory=lambda: Real(1))
    F: Real = field(default_factory=lambda: Real(1))

    def __post_init__(self):
        for name in ("rho", "E0", "F"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")

    def energy(self, zeta_n: Real) -> Real:
        return zeta_n * self.E0
