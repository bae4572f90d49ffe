"""Position and momentum matrix elements of the bouncer eigenstates.

The normalized eigenfunctions in the scaled coordinate are
psi_n(zeta) = Ai(zeta - zeta_n) / |Ai'(-zeta_n)| (times rho^-1/2 for the
physical normalization).  A four-term recursion connects the matrix elements
of successive powers of the coordinate:

    2*delta_{1,p}*sigma = p(p-1)(p-2)(p-3) <n|zeta^{p-4}|k>
                        + 4p(p-1) zeta_ave <n|zeta^{p-2}|k>
                        - 2p(2p-1) <n|zeta^{p-1}|k>
                        + (zeta_n - zeta_k)^2 <n|zeta^p|k>

with sigma = (-1)^(n-k+1) and zeta_ave = (zeta_n + zeta_k)/2, and with the
convention that expectation values of negative powers are dropped.  Solved
off-diagonally for <n|zeta^p|k> it generates exact DeltaLaurent expressions;
on the diagonal the Delta^2 term vanishes and it is solved for
<n|zeta^{p-1}|n> instead, generating exact ZetaPoly expressions.

Derived values that disagree with commonly printed tabulations (both
confirmed here by the recursion and by direct quadrature):

* the leading coefficient of <n|zeta^4|k> is 40320 = 8!, continuing the
  2!, 4!, 6! pattern of the lower orders; a printed value of 40340 fails
  both checks;
* <n|zeta^5|n> = 256 zeta^5/693 + 1808 zeta^2/693; a printed constant
  denominator of 3003 fails both checks.

Momentum elements follow from p_hat^2 = H - zeta in scaled units
(hbar = rho = 1, which forces 2m*E0 = 1).  With that single consistent
scaling the off-diagonal <n|p_hat^2|k> is -2*sigma/Delta^2.  Tabulations
that print a coefficient -4*E0 set m = 1 instead; the -2 value is the one
consistent with <n|p_hat^2|n> = zeta_n/3 and is confirmed by quadrature.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np
from scipy.integrate import IntegrationWarning, quad
from scipy.special import airy

from .airy import ZeroTable, eval_ai_prime
from .algebra import DL_ZERO, DeltaLaurent, ZetaPoly, zeta_ave_factor
from .precision import Real


@dataclass(frozen=True)
class DiagonalElement:
    """<n|zeta^q|n> as an exact polynomial in zeta_n."""

    q: int
    value: ZetaPoly


@dataclass(frozen=True)
class OffDiagonalElement:
    """<n|zeta^q|k> (k != n) as an exact Laurent polynomial in Delta."""

    q: int
    value: DeltaLaurent


@lru_cache(maxsize=None)
def diagonal(q: int) -> DiagonalElement:
    """Exact <n|zeta^q|n> from the recursion, for any q >= 0."""
    if q < 0:
        raise ValueError(f"power must be >= 0, got {q}")
    if q == 0:
        return DiagonalElement(0, ZetaPoly.constant(1))
    # Solve the recursion at level p = q + 1 on the diagonal, where the
    # Delta^2 term drops and zeta_ave = zeta_n:
    #   2p(2p-1) <zeta^{p-1}> = p(p-1)(p-2)(p-3) <zeta^{p-4}>
    #                         + 4p(p-1) zeta_n <zeta^{p-2}>
    # Negative-power expectation values are dropped.
    p = q + 1
    acc = ZetaPoly()
    if p - 4 >= 0:
        acc = acc + Fraction(p * (p - 1) * (p - 2) * (p - 3)) * diagonal(p - 4).value
    if p - 2 >= 0:
        acc = acc + Fraction(4 * p * (p - 1)) * (ZetaPoly.zeta() * diagonal(p - 2).value)
    return DiagonalElement(q, acc / Fraction(2 * p * (2 * p - 1)))


@lru_cache(maxsize=None)
def off_diagonal(q: int) -> OffDiagonalElement:
    """Exact <n|zeta^q|k> for k != n, carrying the sigma parity flag."""
    if q < 0:
        raise ValueError(f"power must be >= 0, got {q}")
    if q == 0:
        # orthogonality
        return OffDiagonalElement(0, DL_ZERO)
    p = q
    acc = DL_ZERO
    if p == 1:
        acc = acc + DeltaLaurent({0: ZetaPoly.constant(2)}, sigma_parity=True)
    if p - 4 >= 0:
        acc = acc - Fraction(p * (p - 1) * (p - 2) * (p - 3)) * off_diagonal(p - 4).value
    if p - 2 >= 0:
        acc = acc - Fraction(4 * p * (p - 1)) * (zeta_ave_factor() * off_diagonal(p - 2).value)
    acc = acc + Fraction(2 * p * (2 * p - 1)) * off_diagonal(p - 1).value
    return OffDiagonalElement(q, acc.shift(-2))


def momentum_off_diagonal() -> OffDiagonalElement:
    """Magnitude of <n|p_hat|k> in units hbar = rho = 1.

    The stored value is sigma/Delta; the phase convention is
    <n|p_hat|k> = -i * sigma/Delta and <k|p_hat|n> = +i * sigma/Delta,
    consistent with <n|p_hat|k>* = <k|p_hat|n>.  Only phase-free bilinears
    are ever summed downstream.
    """
    return OffDiagonalElement(1, DeltaLaurent({-1: ZetaPoly.constant(1)}, sigma_parity=True))


def momentum_bilinear() -> DeltaLaurent:
    """<n|p_hat|k><k|p_hat|n> = 1/Delta^2: sign-free, real, positive."""
    return DeltaLaurent({-2: ZetaPoly.constant(1)}, sigma_parity=False)


def momentum_diagonal_powers() -> tuple[ZetaPoly, ZetaPoly]:
    """Scaled <n|p_hat^2|n> = zeta_n/3 and <n|p_hat^4|n> = zeta_n^2/5.

    Units 2m*E0 = 1.  Both follow from p_hat^2 = H - zeta:
    <p^2> = zeta_n - <zeta> and <p^4> = <(zeta - zeta_n)^2>.
    """
    p2 = ZetaPoly({1: Fraction(1, 3)})
    p4 = ZetaPoly({2: Fraction(1, 5)})
    return p2, p4


def momentum_p2_off_diagonal() -> OffDiagonalElement:
    """Scaled <n|p_hat^2|k> = -2*sigma/Delta^2 for k != n (units 2m*E0 = 1).

    Equal to -<n|zeta|k> since <n|H|k> vanishes off the diagonal.  See the
    module docstring for the factor-of-(2m) convention mismatch in some
    printed tabulations.
    """
    return OffDiagonalElement(1, DeltaLaurent({-2: ZetaPoly.constant(-2)}, sigma_parity=True))


def sigma_sign(n: int, k: int) -> int:
    """(-1)^(n-k+1)."""
    return -1 if (n - k) % 2 == 0 else 1


def element_value(q: int, n: int, k: int, table: ZeroTable) -> Real:
    """Numeric <n|zeta^q|k> from the exact expressions and tabulated zeros."""
    zn = table.zeta(n)
    if n == k:
        return diagonal(q).value.evaluate(zn)
    delta = table.zeta(k) - zn
    return off_diagonal(q).value.evaluate(zn, delta, sigma=sigma_sign(n, k))


# ---------------------------------------------------------------------------
# quadrature oracle
# ---------------------------------------------------------------------------

TAIL_PADDING = 15.0


@dataclass(frozen=True)
class Eigenstate:
    """Normalized bouncer eigenstate (scaled coordinate, rho = 1)."""

    n: int
    zeta_n: Real
    norm: Real

    @classmethod
    def from_table(cls, n: int, table: ZeroTable) -> "Eigenstate":
        zn = table.zeta(n)
        aip = eval_ai_prime(-zn)
        return cls(n=n, zeta_n=zn, norm=1 / abs(aip))


def quadrature_element(n: int, k: int, q: int, table: ZeroTable) -> tuple[float, float]:
    """Independent oracle: numerically integrate psi_n(zeta) zeta^q psi_k(zeta).

    Uses a float-precision Airy implementation and adaptive panels on
    [0, zeta_max + padding]; past the classical turning point the integrand
    decays faster than exponentially and the discarded tail is bounded by the
    asymptotic envelope of Ai^2.  Returns (value, error_estimate).
    """
    if q < 0:
        raise ValueError(f"power must be >= 0, got {q}")
    if not (1 <= n <= len(table) and 1 <= k <= len(table)):
        raise IndexError("state index outside zero table")
    zn = float(table.zeta(n))
    zk = float(table.zeta(k))
    ain = abs(float(airy(-zn)[1]))
    aik = abs(float(airy(-zk)[1]))

    def integrand(x: float) -> float:
        return airy(x - zn)[0] * x ** q * airy(x - zk)[0] / (ain * aik)

    cutoff = max(zn, zk) + TAIL_PADDING
    # break integration at the turning points where the integrand changes character;
    # the tolerance request sits at the float64 floor, so the roundoff warning
    # is expected and the returned error estimate is checked instead
    points = sorted({zn, zk})
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", IntegrationWarning)
        value, abserr = quad(
            integrand, 0.0, cutoff, points=points, limit=500, epsabs=1e-13, epsrel=1e-13
        )
    tail = _tail_bound(q, zn, zk, ain * aik, cutoff)
    err = abserr + tail
    if err > 1e-8 * max(1.0, abs(value)):
        raise ArithmeticError(
            f"quadrature error estimate {err:.2e} exceeds target for (n={n}, k={k}, q={q})"
        )
    return value, err


def _tail_bound(q: int, zn: float, zk: float, norm: float, cutoff: float) -> float:
    """Bound on the discarded integral past the cutoff.

    For t > 0, Ai(t) <= exp(-(2/3) t^(3/2)) / (2 sqrt(pi) t^(1/4)); the
    product of the two shifted envelopes decays faster than exp(-c*t), so the
    tail is bounded by value-at-cutoff times the inverse decay rate.
    """
    tn = cutoff - zn
    tk = cutoff - zk
    env = math.exp(-(2.0 / 3.0) * (tn ** 1.5 + tk ** 1.5)) / (
        4.0 * math.pi * (tn * tk) ** 0.25 * norm
    )
    rate = math.sqrt(tn) + math.sqrt(tk)  # local exponential decay rate
    growth = (2.0 * cutoff) ** q  # crude polynomial majorant near the cutoff
    return env * growth / rate


def orthonormality_defect(n: int, k: int, table: ZeroTable) -> float:
    """|<n|k> - delta_nk| from quadrature."""
    value, _ = quadrature_element(n, k, 0, table)
    return abs(value - (1.0 if n == k else 0.0))


def closure_saturation(n: int, table: ZeroTable, k_max: int) -> list[float]:
    """Partial sums of sum_k <n|zeta|k><k|zeta|n> up to each K <= k_max.

    All terms are squares, so the sequence increases monotonically towards
    <n|zeta^2|n>.
    """
    zn = table.zeta(n)
    diag1 = diagonal(1).value.evaluate(zn)
    partials = []
    acc = Real(0, table.precision_bits)
    for k in range(1, k_max + 1):
        if k == n:
            acc = acc + diag1 * diag1
        else:
            v = element_value(1, n, k, table)
            acc = acc + v * v
        partials.append(float(acc))
    return partials
