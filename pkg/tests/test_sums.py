"""Numeric sum evaluation: tail models, error budgets, comparison harness.

The direct-summation oracle values here are frozen from an independent
computation: the p = 3 sum must land on 1/4 and the p = 2 sum on zeta_1/3,
both of which were derived without any numerics.
"""

import pytest

from airysums.derive import SumIdentity
from airysums.algebra import ZetaPoly
from airysums.precision import Real
from airysums.sums import (
    SumEstimate,
    TailConvergenceError,
    compare,
    sum_S_numeric,
)
from fractions import Fraction

F = Fraction


class TestDirectSums:
    def test_dipole_weighted_sum_hits_quarter(self, table_sums):
        est = sum_S_numeric(3, 1, table_sums.table, K=500)
        assert abs(float(est.value) - 0.25) < 1e-6

    def test_slowest_sum_with_tail(self, table_sums):
        # p = 2 terms decay like k^(-4/3); the tail correction carries ~4% of
        # the value at K = 2000
        table = table_sums.table
        est = sum_S_numeric(2, 1, table, K=2000, tail="euler_maclaurin")
        want = float(table.zeta(1)) / 3.0
        assert abs(float(est.value) - want) / want < 1e-6
        assert float(est.tail_correction) > 0.01 * want

    def test_truncation_alone_misses_slowest_sum(self, table_sums):
        est = sum_S_numeric(2, 1, table_sums.table, K=2000, tail="none")
        want = float(table_sums.table.zeta(1)) / 3.0
        assert abs(float(est.value) - want) / want > 0.01
        # but the reported error bound owns the discrepancy
        assert abs(float(est.value) - want) < float(est.error_bound)

    def test_convergence_failure_signalled(self, table_sums):
        with pytest.raises(TailConvergenceError):
            sum_S_numeric(2, 1, table_sums.table, K=2000, tail="none", target_error=1e-6)

    def test_even_power_estimates_positive(self, table_sums):
        for p in (2, 4, 6):
            est = sum_S_numeric(p, 3, table_sums.table, K=300)
            assert float(est.value) > 0

    def test_tail_modes_ordered_by_accuracy(self, table_sums):
        table = table_sums.table
        want = float(table.zeta(1)) / 3.0
        errs = {
            mode: abs(float(sum_S_numeric(2, 1, table, K=1000, tail=mode).value) - want)
            for mode in ("none", "integral", "euler_maclaurin")
        }
        assert errs["euler_maclaurin"] < errs["integral"] < errs["none"]

    def test_rejects_bad_arguments(self, table_small):
        with pytest.raises(ValueError):
            sum_S_numeric(1, 1, table_small)
        with pytest.raises(ValueError):
            sum_S_numeric(2, 1, table_small, K=10 ** 6)
        with pytest.raises(ValueError):
            sum_S_numeric(2, 25, table_small, K=10)
        with pytest.raises(ValueError):
            sum_S_numeric(2, 1, table_small, K=20, tail="levin")


class TestTailModel:
    def test_doubling_K_stays_within_error_bound(self, table_sums):
        # tail-model soundness for the faster-decaying sums
        table = table_sums.table
        for p in (4, 5, 7):
            a = sum_S_numeric(p, 1, table, K=500)
            b = sum_S_numeric(p, 1, table, K=1000)
            assert abs(float(a.value - b.value)) < float(a.error_bound)

    def test_monotone_convergence_for_even_powers(self, table_sums):
        table = table_sums.table
        prev = None
        for K in (100, 200, 400, 800):
            est = sum_S_numeric(4, 1, table, K=K, tail="none")
            if prev is not None:
                assert float(est.value) > prev
            prev = float(est.value)
        with_tail = sum_S_numeric(4, 1, table, K=800)
        assert float(with_tail.tail_correction) > 0

    def test_cross_precision_stability(self):
        from airysums.airy import build_zero_table

        t128 = build_zero_table(200, 128)
        t256 = build_zero_table(200, 256)
        a = sum_S_numeric(4, 1, t128, K=200)
        b = sum_S_numeric(4, 1, t256, K=200)
        assert abs(float(a.value - b.value)) < float(a.error_bound)

    def test_error_bound_nonnegative_invariant(self, table_small):
        est = sum_S_numeric(5, 2, table_small, K=30)
        assert float(est.error_bound) >= 0
        with pytest.raises(ValueError):
            SumEstimate(
                value=Real(1), truncation_K=10,
                tail_correction=Real(0), error_bound=Real(-1),
            )


class TestComparisonHarness:
    def test_monopole_weighted_identity_passes(self, table_sums):
        ident = SumIdentity(7, ZetaPoly({2: F(1, 270)}))
        report = compare(ident, range(1, 6), table_sums.table, tol=1e-8, K=2000)
        assert report.passed
        assert report.worst() < 1e-8

    def test_fast_decay_at_small_K(self, table_sums):
        ident = SumIdentity(11, ZetaPoly({4: F(1, 17010), 1: F(43, 272160)}))
        report = compare(ident, [1], table_sums.table, tol=1e-10, K=500)
        assert report.passed

    def test_corrupted_identity_fails_with_location(self, table_sums):
        bad = SumIdentity(7, ZetaPoly({2: F(1, 269)}))
        report = compare(bad, [1, 2], table_sums.table, tol=1e-8, K=2000)
        assert not report.passed
        failing = [row.n for row in report.rows if not row.passed]
        assert failing == [1, 2]

    def test_rows_carry_error_budget(self, table_sums):
        ident = SumIdentity(5, ZetaPoly({1: F(1, 36)}))
        report = compare(ident, [1], table_sums.table, tol=1e-6, K=1000)
        assert report.rows[0].error_budget > 0
        assert report.rows[0].relative_deviation < report.tolerance
