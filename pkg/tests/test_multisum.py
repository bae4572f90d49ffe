"""Double-index sums and the uniform-field shifts."""

from fractions import Fraction

import pytest

from airysums.algebra import ZetaPoly
from airysums.multisum import (
    StarkConfig,
    derive_T_from_identities,
    stark_exact,
    stark_expansion_coefficient,
    stark_order_symbolic,
    stark_perturbative,
    t_sum_numeric,
    triple_x_case_decomposition,
)
from airysums.elements import diagonal
from airysums.precision import Real

F = Fraction


@pytest.fixture()
def cfg():
    return StarkConfig(F=Real(1, 128), F_bar=Real("0.1", 128))


class TestStarkExact:
    def test_zero_field_is_identity(self, table_small):
        cfg = StarkConfig(F=Real(1), F_bar=Real(0))
        for n in (1, 3):
            shifted = stark_exact(n, cfg, table_small)
            assert float(shifted) == pytest.approx(float(table_small.zeta(n)))

    def test_ten_percent_field(self, cfg, table_small):
        want = float(table_small.zeta(1)) * 1.1 ** (2.0 / 3.0)
        assert float(stark_exact(1, cfg, table_small)) == pytest.approx(want, rel=1e-25)

    def test_field_ratio_bounded(self):
        with pytest.raises(ValueError):
            StarkConfig(F=Real(1), F_bar=Real(2))

    def test_binomial_coefficients(self):
        assert [stark_expansion_coefficient(m) for m in (1, 2, 3)] == [
            F(2, 3), F(-1, 9), F(4, 81),
        ]
        assert stark_expansion_coefficient(4) == F(-7, 243)


class TestStarkPerturbative:
    def test_first_order_exact(self, cfg, table_small):
        got = stark_perturbative(1, cfg, 1, table_small)
        want = F(2, 3) * Real("0.1", 128) * table_small.zeta(1)
        assert abs(float(got - want)) < 1e-30

    def test_first_order_is_diagonal_dipole(self, ledger11):
        assert stark_order_symbolic(1, ledger11) == diagonal(1).value

    def test_symbolic_orders_match_binomial(self, ledger11):
        for order in (1, 2, 3):
            want = stark_expansion_coefficient(order) * ZetaPoly.zeta()
            assert stark_order_symbolic(order, ledger11) == want

    def test_second_order_direct_sum(self, cfg, table_sums):
        for n in (1, 2, 3):
            got = stark_perturbative(n, cfg, 2, table_sums.table, K=2000)
            want = -0.01 / 9.0 * float(table_sums.table.zeta(n))
            assert abs(float(got) - want) / abs(want) < 1e-6

    def test_third_order_direct_sum(self, cfg, table_sums):
        got = stark_perturbative(1, cfg, 3, table_sums.table, K=2000)
        want = 4.0 / 81.0 * 1e-3 * float(table_sums.table.zeta(1))
        assert abs(float(got) - want) / abs(want) < 1e-5

    def test_orders_sum_to_exact_shift_at_fourth_order(self, table_small, ledger11):
        # Richardson check: the residual after three orders scales like x^4
        def residual(x: float) -> float:
            c = StarkConfig(F=Real(1, 128), F_bar=Real(str(x), 128))
            zn = table_small.zeta(1)
            total = zn + sum(
                (stark_expansion_coefficient(m) * ZetaPoly.zeta()).evaluate(zn)
                * Real(str(x), 128) ** m
                for m in (1, 2, 3)
            )
            return float(stark_exact(1, c, table_small) - total)

        r1, r2 = residual(0.2), residual(0.1)
        assert r1 / r2 == pytest.approx(16.0, rel=0.25)

    def test_unsupported_order_rejected(self, cfg, table_small):
        with pytest.raises(ValueError):
            stark_perturbative(1, cfg, 4, table_small)


class TestDoubleSums:
    def test_stark_route_closed_form(self, ledger11):
        ident = derive_T_from_identities("stark3", ledger11)
        assert ident.exponents == (3, 2, 3)
        assert ident.closed_form == ZetaPoly({1: F(1, 324)})

    def test_triple_insertion_closed_form(self, ledger11):
        ident = derive_T_from_identities("triple_x", ledger11)
        assert ident.exponents == (2, 2, 2)
        assert ident.closed_form == ZetaPoly({3: F(2, 945), 0: F(5, 168)})

    def test_unknown_identity_rejected(self, ledger11):
        with pytest.raises(ValueError):
            derive_T_from_identities("quadruple_x", ledger11)

    def test_case_decomposition_reassembles_diagonal(self, ledger11):
        cases = triple_x_case_decomposition(ledger11)
        total = ZetaPoly()
        for part in cases.values():
            total = total + part
        assert total == diagonal(3).value
        assert set(cases) == {"all_equal", "two_with_n", "pair_apart", "distinct"}

    @pytest.mark.parametrize("n", [1, 2, 3])
    def test_asymmetric_sum_numeric(self, n, table_sums, ledger11):
        val, err = t_sum_numeric(3, 2, 3, n, table_sums.table, K=300)
        closed = derive_T_from_identities("stark3", ledger11).evaluate(
            table_sums.table.zeta(n)
        )
        rel = abs(float(val - closed) / float(closed))
        assert rel < 1e-5
        assert rel < 10 * max(float(err) / abs(float(closed)), 1e-9)

    @pytest.mark.parametrize("n", [1, 2, 3])
    def test_symmetric_sum_numeric(self, n, table_sums, ledger11):
        val, err = t_sum_numeric(2, 2, 2, n, table_sums.table, K=300)
        closed = derive_T_from_identities("triple_x", ledger11).evaluate(
            table_sums.table.zeta(n)
        )
        rel = abs(float(val - closed) / float(closed))
        assert rel < 1e-5

    def test_positivity_for_even_exponents(self, table_sums):
        val, _ = t_sum_numeric(2, 2, 2, 2, table_sums.table, K=200)
        assert float(val) > 0

    def test_exchange_symmetry(self, table_sums):
        a, _ = t_sum_numeric(4, 2, 3, 1, table_sums.table, K=250)
        b, _ = t_sum_numeric(3, 2, 4, 1, table_sums.table, K=250)
        assert float(a) == pytest.approx(float(b), rel=1e-9)

    def test_convergence_guard(self, table_sums):
        with pytest.raises(ValueError):
            t_sum_numeric(2, 2, 1, 1, table_sums.table, K=100)
        with pytest.raises(ValueError):
            t_sum_numeric(3, 1, 3, 1, table_sums.table, K=100)
