"""Double-index spectral sums and the uniform-field (Stark) energy shifts.

Adding a uniform external field Fbar*x to the bouncer potential only rescales
the force, so the shifted levels are exact:

    E~_n = E_n (1 + Fbar/F)^(2/3),

and the binomial expansion of the bracket supplies the perturbation orders
2/3, -1/9, 4/81, ... exactly.  Matching those orders against the standard
perturbation series turns the second order into a single sum (proportional
to S_5) and the third order into the double sum

    T_{a,b,c}(n) = sum_{k != j != n} 1/((zeta_k-zeta_n)^a
                                       (zeta_k-zeta_j)^b
                                       (zeta_j-zeta_n)^c)

with (a,b,c) = (3,2,3).  A triple position closure produces T_{2,2,2} the
same way.  Both closed forms are derived here symbolically from the ledger
and confirmed numerically.

Numeric double sums run over the zero table up to K, are extended with
closed-form estimated zeros up to an internal horizon, and finish with an
analytic remainder for the dominant near-diagonal pairs: for even b the
inner sum over a band j ~ k approaches 2 zeta_R(b) / spacing^b, which
integrates in closed form against the zero density.  Signed terms (indices
below n) are kept exact; summation order is fixed for reproducibility.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from scipy.integrate import quad

from .airy import ScaledUnits, ZeroTable
from .algebra import ZetaPoly
from .derive import DerivationLedger, DerivationError
from .elements import diagonal, off_diagonal
from .precision import Real
from .sums import sum_S_numeric

A_DENSITY = (1.5 * math.pi) ** (2.0 / 3.0)
EXTENSION_HORIZON = 3000


@dataclass(frozen=True)
class MultiSumIdentity:
    """Closed form for a double-index sum T_{a,b,c}(n)."""

    exponents: tuple[int, int, int]
    closed_form: ZetaPoly

    def evaluate(self, zeta_n: Real) -> Real:
        return self.closed_form.evaluate(zeta_n)


@dataclass(frozen=True)
class StarkConfig:
    """Base force F and external field Fbar, plus the unit scales."""

    F: Real
    F_bar: Real
    units: ScaledUnits = field(default_factory=ScaledUnits)

    def __post_init__(self):
        if not self.F > 0:
            raise ValueError("base force must be positive")
        if not abs(self.F_bar) < self.F:
            raise ValueError("|F_bar/F| must be < 1 for the expansion to converge")

    @property
    def ratio(self) -> Real:
        return self.F_bar / self.F


# ---------------------------------------------------------------------------
# Stark shifts
# ---------------------------------------------------------------------------

def stark_exact(n: int, cfg: StarkConfig, table: ZeroTable) -> Real:
    """Exact shifted level E~_n = E_n (1 + Fbar/F)^(2/3)."""
    E_n = cfg.units.energy(table.zeta(n))
    return E_n * (1 + cfg.ratio) ** Fraction(2, 3)


def stark_expansion_coefficient(order: int) -> Fraction:
    """Exact binomial coefficient of (Fbar/F)^order in (1 + Fbar/F)^(2/3)."""
    if order < 0:
        raise ValueError("order must be >= 0")
    c = Fraction(1)
    for j in range(order):
        c *= (Fraction(2, 3) - j) / (j + 1)
    return c


def stark_order_symbolic(order: int, ledger: DerivationLedger) -> ZetaPoly:
    """Perturbation order `order` divided by E0 (Fbar/F)^order, as a ZetaPoly.

    Order 1 is the diagonal dipole element; order 2 rearranges into -4 S_5;
    order 3 combines the distinct double sum with the paired and diagonal
    pieces.  Each must reproduce the matching binomial coefficient times
    zeta_n.
    """
    if order == 1:
        return diagonal(1).value
    if order == 2:
        return Fraction(-4) * ledger.get(5).closed_form
    if order == 3:
        t323 = derive_T_from_identities("stark3", ledger).closed_form
        s5 = ledger.get(5).closed_form
        s6 = ledger.get(6).closed_form
        zeta = ZetaPoly.zeta()
        paired = Fraction(8, 3) * (s5 + zeta * s6)
        diag_sub = Fraction(-8, 3) * (zeta * s6)
        return Fraction(-8) * t323 + paired + diag_sub
    raise ValueError(f"perturbative orders 1..3 are supported, got {order}")


def stark_perturbative(
    n: int,
    cfg: StarkConfig,
    order: int,
    table: ZeroTable,
    K: int | None = None,
) -> Real:
    """Numeric perturbation order for the uniform-field shift.

    Order 1 is exact (diagonal dipole).  Order 2 is the direct energy-
    weighted sum over k <= K with the standard tail.  Order 3 evaluates the
    double sum with the j = k != n pairs and the diagonal subtraction kept
    separate, exactly mirroring the derivation.
    """
    kmax = len(table) if K is None else K
    x = cfg.ratio
    E0 = cfg.units.E0
    zn = table.zeta(n)
    if order == 1:
        return Fraction(2, 3) * x * E0 * zn
    if order == 2:
        # sum_k |<n|x|k>|^2/(E_n - E_k) = -4 S_5 in scaled units
        s5 = sum_S_numeric(5, n, table, K=kmax, tail="euler_maclaurin")
        return Fraction(-4) * x * x * E0 * s5.value
    if order == 3:
        t323, _ = t_sum_numeric(3, 2, 3, n, table, K=min(kmax, 400))
        s5 = sum_S_numeric(5, n, table, K=kmax).value
        s6 = sum_S_numeric(6, n, table, K=kmax).value
        distinct = Fraction(-8) * t323
        paired = Fraction(8, 3) * (s5 + zn * s6)
        diag_sub = Fraction(-8, 3) * (zn * s6)
        return x ** 3 * E0 * (distinct + paired + diag_sub)
    raise ValueError(f"perturbative orders 1..3 are supported, got {order}")


# ---------------------------------------------------------------------------
# numeric double sums
# ---------------------------------------------------------------------------

def _estimated_zeros(k_from: int, k_to: int) -> np.ndarray:
    k = np.arange(k_from, k_to + 1, dtype=float)
    return (1.5 * math.pi * (k - 0.25)) ** (2.0 / 3.0)


def _density(w: float) -> float:
    """dk/dzeta of the estimated zeros."""
    return 1.5 / A_DENSITY ** 1.5 * math.sqrt(w)


def t_sum_numeric(
    a: int,
    b: int,
    c: int,
    n: int,
    table: ZeroTable,
    K: int = 300,
    extension_horizon: int = EXTENSION_HORIZON,
) -> tuple[Real, Real]:
    """(value, error_estimate) for T_{a,b,c}(n).

    Terms with j, k <= K use the verified zero table; indices up to the
    extension horizon use the closed-form zero estimates (their absolute
    error is far below the local zero spacing there); beyond the horizon the
    near-diagonal remainder is added in closed form for even b.  All terms
    are formed in float precision, which is far below the certified error of
    the truncation model itself.
    """
    if a + c < 4 or b < 2:
        raise ValueError(
            "double sum requires a + c >= 4 and b >= 2 (empirical convergence guard)"
        )
    if K > len(table):
        raise ValueError(f"K={K} exceeds table size {len(table)}")
    if n > K:
        raise ValueError(f"n={n} must be <= K={K}")
    horizon = max(extension_horizon, 2 * K)
    zs = np.concatenate(
        [
            np.array([float(table.zeta(k)) for k in range(1, K + 1)]),
            _estimated_zeros(K + 1, horizon),
        ]
    )
    zn = zs[n - 1]
    keep = np.ones(len(zs), dtype=bool)
    keep[n - 1] = False
    z = zs[keep]
    dk = z - zn
    # full double sum over the kept indices, j != k, in fixed order
    # (integer exponents keep signed bases exact for indices below n)
    inv_a = 1.0 / dk ** a
    inv_c = 1.0 / dk ** c
    direct = 0.0
    for i in range(len(z)):
        gaps = z[i] - z
        gaps[i] = 1.0
        row = inv_a[i] * inv_c / gaps ** b
        row[i] = 0.0
        direct += float(row.sum())

    band = _corner_band_remainder(a, b, c, zn, horizon)
    one_index = _one_index_remainder(a, b, c, zn, z, horizon)
    value = direct + band + one_index
    # The band model reproduces the true remainder to ~10%; the one-index
    # remainders and float rounding are far smaller.  A conservative budget:
    err = 0.3 * abs(band) + abs(one_index) + 1e-14 * abs(direct) * math.sqrt(len(z))
    bits = table.precision_bits
    return Real(value, bits), Real(err, bits)


def _corner_band_remainder(a: int, b: int, c: int, zn: float, horizon: int) -> float:
    """Closed-form remainder for near-diagonal pairs beyond the horizon.

    For j ~ k ~ large, the inner sum over the band approaches
    2 zeta_R(b) / spacing(k)^b for even b (odd b cancels pairwise to leading
    order), and 1/spacing(k)^2 = (9/4) zeta_k / A^3.  Integrated against the
    zero density this captures the slowest-decaying part of the corner.
    """
    if b % 2 == 1:
        return 0.0
    zeta_R = {2: math.pi ** 2 / 6, 4: math.pi ** 4 / 90, 6: math.pi ** 6 / 945}.get(
        b, sum(m ** (-b) for m in range(1, 200))
    )
    Z = A_DENSITY * (horizon + 0.25) ** (2.0 / 3.0)  # zeta at horizon + 1/2

    def integrand(w: float) -> float:
        inv_spacing_b = ((9.0 / 4.0) * w / A_DENSITY ** 3) ** (b / 2.0)
        return _density(w) * 2.0 * zeta_R * inv_spacing_b / (w - zn) ** (a + c)

    val, _ = quad(integrand, Z, np.inf, limit=200)
    return val


def _one_index_remainder(
    a: int, b: int, c: int, zn: float, z_kept: np.ndarray, horizon: int
) -> float:
    """Remainder with one index beyond the horizon and one inside.

    Approximates sum_{k > horizon} with the density integral; the inner sums
    over the kept indices are evaluated exactly at each quadrature node.
    Subdominant to the band term (it decays one power of zeta faster).
    """
    Z = A_DENSITY * (horizon + 0.25) ** (2.0 / 3.0)
    nodes, weights = np.polynomial.legendre.leggauss(48)
    # map u in (0,1) -> w = Z/u, covering [Z, inf); GL interval scale is 0.5
    u = 0.5 * (nodes + 1.0)
    w = Z / u
    jac = 0.5 * Z / u ** 2
    dj = z_kept - zn
    total = 0.0
    for wi, ji, gw in zip(w, jac, weights):
        rho = _density(wi)
        inner_k_far = float(np.sum(1.0 / ((wi - z_kept) ** b * dj ** c))) / (wi - zn) ** a
        inner_j_far = float(np.sum(1.0 / ((z_kept - wi) ** b * dj ** a))) / (wi - zn) ** c
        total += gw * ji * rho * (inner_k_far + inner_j_far)
    return total


def derive_T_from_identities(which: str, ledger: DerivationLedger) -> MultiSumIdentity:
    """Symbolic closed form for a double-index sum from a rearranged identity.

    "stark3": equate the third perturbation order (binomial coefficient
    4/81) with its double-sum expression; solving for the distinct-index sum
    gives T_{3,2,3} = zeta_n/324.

    "triple_x": close <n|x^3|n> with two insertions of a complete set; the
    four index cases (all equal; two pairs with n; pair j=k apart from n;
    all distinct) rearrange to T_{2,2,2} = 2 zeta_n^3/945 + 5/168.
    """
    zeta = ZetaPoly.zeta()
    if which == "stark3":
        s5 = ledger.get(5).closed_form
        s6 = ledger.get(6).closed_form
        third_order = stark_expansion_coefficient(3) * zeta
        paired = Fraction(8, 3) * (s5 + zeta * s6)
        diag_sub = Fraction(-8, 3) * (zeta * s6)
        closed = (paired + diag_sub - third_order) / Fraction(8)
        return MultiSumIdentity((3, 2, 3), closed)
    if which == "triple_x":
        s3 = ledger.get(3).closed_form
        s4 = ledger.get(4).closed_form
        d1 = diagonal(1).value
        d3 = diagonal(3).value
        all_equal = d1 * d1 * d1
        two_with_n = Fraction(2) * Fraction(4) * (d1 * s4)  # n=k!=j and n=j!=k
        pair_apart = Fraction(8, 3) * (s3 + zeta * s4)      # j=k!=n
        closed = (all_equal + two_with_n + pair_apart - d3) / Fraction(8)
        return MultiSumIdentity((2, 2, 2), closed)
    raise ValueError(f"unknown identity {which!r}; choose 'stark3' or 'triple_x'")


def triple_x_case_decomposition(ledger: DerivationLedger) -> dict[str, ZetaPoly]:
    """The four index-case contributions of the triple position closure.

    Their sum must equal <n|zeta^3|n> exactly once the distinct-index sum is
    replaced by its closed form; used as a completeness assertion.
    """
    zeta = ZetaPoly.zeta()
    s3 = ledger.get(3).closed_form
    s4 = ledger.get(4).closed_form
    d1 = diagonal(1).value
    t222 = derive_T_from_identities("triple_x", ledger).closed_form
    return {
        "all_equal": d1 * d1 * d1,
        "two_with_n": Fraction(2) * Fraction(4) * (d1 * s4),
        "pair_apart": Fraction(8, 3) * (s3 + zeta * s4),
        "distinct": Fraction(-8) * t222,
    }
