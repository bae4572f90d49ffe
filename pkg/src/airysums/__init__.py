"""Airy-function zeros, bouncer matrix elements, and exact spectral sums.

The package computes the zeros zeta_n of Ai to arbitrary precision, builds
the position/momentum matrix elements of the bouncing-particle eigenstates
exactly, derives closed forms for the reciprocal-power zero sums

    S_p(n) = sum_{k != n} 1/(zeta_k - zeta_n)^p

for every integer p >= 2 (and for the double-index generalizations T_{a,b,c}),
and verifies every closed form numerically with certified tail corrections.
"""

from .airy import (
    BracketError,
    ConvergenceError,
    ScaledUnits,
    ZeroTable,
    asymptotic_zero,
    build_zero_table,
    eval_ai,
    eval_ai_prime,
    zero,
)
from .algebra import (
    DeltaLaurent,
    Rational,
    ZetaPoly,
    coefficient_of_delta_power,
    substitute_zeta_ave,
)
from .derive import (
    DerivationLedger,
    SumIdentity,
    bethe_tower_check,
    cross_check_S8,
    derive_S,
    derive_up_to,
    divergence_diagnostic,
    verify_against_reference_table,
)
from .elements import (
    DiagonalElement,
    Eigenstate,
    OffDiagonalElement,
    diagonal,
    momentum_diagonal_powers,
    momentum_off_diagonal,
    off_diagonal,
    quadrature_element,
)
from .multisum import (
    MultiSumIdentity,
    StarkConfig,
    derive_T_from_identities,
    stark_exact,
    stark_perturbative,
    t_sum_numeric,
)
from .precision import PrecisionError, Real, default_precision_bits
from .sums import SumEstimate, compare, sum_S_numeric

__version__ = "0.1.0"

__all__ = [
    "BracketError",
    "ConvergenceError",
    "DeltaLaurent",
    "DerivationLedger",
    "DiagonalElement",
    "Eigenstate",
    "MultiSumIdentity",
    "OffDiagonalElement",
    "PrecisionError",
    "Rational",
    "Real",
    "ScaledUnits",
    "StarkConfig",
    "SumEstimate",
    "SumIdentity",
    "ZeroTable",
    "ZetaPoly",
    "asymptotic_zero",
    "bethe_tower_check",
    "build_zero_table",
    "coefficient_of_delta_power",
    "compare",
    "cross_check_S8",
    "default_precision_bits",
    "derive_S",
    "derive_T_from_identities",
    "derive_up_to",
    "diagonal",
    "divergence_diagnostic",
    "eval_ai",
    "eval_ai_prime",
    "momentum_diagonal_powers",
    "momentum_off_diagonal",
    "off_diagonal",
    "quadrature_element",
    "stark_exact",
    "stark_perturbative",
    "substitute_zeta_ave",
    "sum_S_numeric",
    "t_sum_numeric",
    "verify_against_reference_table",
    "zero",
]
