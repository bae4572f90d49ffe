"""Derivation engine: reference table, cross-checks, the constraint tower,
and divergence diagnostics.
"""

import json
from fractions import Fraction

import pytest

from airysums.algebra import ZetaPoly
from airysums.derive import (
    REFERENCE_CLOSED_FORMS,
    ClosureResidueError,
    DerivationError,
    DerivationLedger,
    MissingLedgerEntryError,
    SumIdentity,
    bethe_constraint_symbolic,
    bethe_order_summand,
    bethe_tower_check,
    commutator_closure,
    cross_check_S8,
    derive_S,
    derive_up_to,
    divergence_diagnostic,
    expand_closure,
    momentum_closure,
    position_closure,
    s8_crosscheck_sides,
    solve_relations,
    verify_against_reference_table,
)
from airysums.elements import off_diagonal
from airysums.algebra import DeltaLaurent

F = Fraction


class TestDeriveS:
    def test_base_case_energy_over_three(self, ledger11):
        assert ledger11.get(2).closed_form == ZetaPoly({1: F(1, 3)})

    def test_dipole_sum_rule_value(self, ledger11):
        assert ledger11.get(3).closed_form == ZetaPoly({0: F(1, 4)})

    def test_tenth_power(self, ledger11):
        assert ledger11.get(10).closed_form == ZetaPoly(
            {5: F(2, 93555), 2: F(611, 1496880)}
        )

    def test_reference_table_reproduced_exactly(self, ledger11):
        report = verify_against_reference_table(ledger11)
        assert len(report) == 10
        assert all(row["match"] for row in report)

    def test_mismatch_is_reported_term_by_term(self):
        ledger = DerivationLedger()
        ledger.add(SumIdentity(2, ZetaPoly({1: F(1, 3)})), "ok")
        corrupted = DerivationLedger()
        corrupted.add(SumIdentity(2, ZetaPoly({1: F(1, 4)})), "bad")
        report = verify_against_reference_table(corrupted)
        assert report[0]["match"] is False
        assert report[0]["mismatches"][0]["zeta_power"] == 1

    def test_empty_ledger_gives_empty_report(self):
        assert verify_against_reference_table(DerivationLedger()) == []

    def test_missing_prerequisite_rejected(self):
        ledger = DerivationLedger()
        with pytest.raises(MissingLedgerEntryError):
            derive_S(5, ledger)

    def test_determinism_across_runs(self, ledger11):
        again = derive_up_to(11)
        for p in range(2, 12):
            assert again.get(p).closed_form == ledger11.get(p).closed_form

    def test_even_p_agrees_across_closure_choices(self, ledger11):
        # S_8 through x^3*x and through x^2*x^2 must coincide exactly
        known = {m: ledger11.get(m).closed_form for m in range(2, 8)}
        via_31 = solve_relations([position_closure(3, 1)], known)[8]
        via_22 = solve_relations([position_closure(2, 2)], known)[8]
        assert via_31 == via_22 == ledger11.get(8).closed_form

    def test_two_unknown_system_solved_by_propagation(self, ledger11):
        # withhold S_6 and S_8: position_closure(2,2) pins S_8 alone, then
        # position_closure(3,1) yields S_6 by exact division by -96 zeta
        known = {m: ledger11.get(m).closed_form for m in (2, 3, 4, 5, 7)}
        solved = solve_relations(
            [position_closure(3, 1), position_closure(2, 2)], known
        )
        assert solved[8] == ledger11.get(8).closed_form
        assert solved[6] == ledger11.get(6).closed_form

    def test_unreducible_system_reported(self, ledger11):
        known = {m: ledger11.get(m).closed_form for m in (2, 3, 4)}
        with pytest.raises(DerivationError, match="single unknown"):
            solve_relations([position_closure(3, 1)], known)

    def test_twelfth_power_against_direct_summation(self, ledger20, table_sums):
        from airysums.sums import sum_S_numeric

        ident = ledger20.get(12)
        for n in (1, 2, 3):
            closed = float(ident.evaluate(table_sums.table.zeta(n)))
            est = sum_S_numeric(12, n, table_sums.table, K=500)
            assert abs(float(est.value) - closed) / abs(closed) < 1e-10

    def test_mod_three_pattern_holds_to_twenty(self, ledger20):
        for p in range(2, 21):
            ident = ledger20.get(p)
            assert ident.mod_three_ok
            classes = {power % 3 for power in ident.closed_form.powers()}
            assert classes == {(-p) % 3}

    def test_energy_ratio_identity(self, ledger11):
        # the p=2 and p=5 sums differ by an exact factor of 12
        assert ledger11.get(2).closed_form == F(12) * ledger11.get(5).closed_form


class TestClosureMechanics:
    def test_momentum_closure_shape(self):
        rel = momentum_closure()
        assert rel.coefficients == {2: ZetaPoly({0: 1})}
        assert rel.rhs == ZetaPoly({1: F(1, 3)})

    def test_commutator_closure_carries_no_sign(self):
        rel = commutator_closure(3)
        assert set(rel.coefficients) == {7, 5, 4}
        assert rel.coefficients[7] == ZetaPoly({0: 1440})

    def test_closure_residue_rejects_positive_powers(self):
        bad = DeltaLaurent({1: ZetaPoly({0: F(1)})})
        with pytest.raises(ClosureResidueError):
            expand_closure(bad)

    def test_closure_residue_rejects_divergent_first_power(self):
        bad = DeltaLaurent({-1: ZetaPoly({0: F(1)})})
        with pytest.raises(ClosureResidueError):
            expand_closure(bad)

    def test_sign_carrying_summand_rejected(self):
        with pytest.raises(DerivationError):
            expand_closure(off_diagonal(2).value)

    def test_every_production_closure_closes(self):
        # no Delta power >= -1 survives in any identity used up to p = 20
        for q in range(1, 10):
            assert max(commutator_closure(q).coefficients) <= 2 * q + 1
        for q in range(1, 10):
            assert max(position_closure(q, 1).coefficients) <= 2 * q + 2


class TestLedger:
    def test_contiguity_enforced(self):
        ledger = DerivationLedger()
        with pytest.raises(DerivationError):
            ledger.add(SumIdentity(5, ZetaPoly({1: F(1, 36)})), "skip")

    def test_idempotent_re_add(self, ledger11):
        before = ledger11.get(4).closed_form
        ledger11.add(SumIdentity(4, before), "again")
        assert ledger11.get(4).closed_form == before

    def test_conflicting_re_add_rejected(self, ledger11):
        with pytest.raises(DerivationError):
            ledger11.add(SumIdentity(4, ZetaPoly({2: F(1, 44)})), "conflict")

    def test_json_round_trip(self, ledger11, tmp_path):
        path = tmp_path / "ledger.json"
        ledger11.save(path)
        loaded = DerivationLedger.load(path)
        for p in range(2, 12):
            assert loaded.get(p).closed_form == ledger11.get(p).closed_form
        # big integers ride as decimal strings
        raw = json.loads(path.read_text())
        assert isinstance(raw[0]["terms"][0]["numerator"], str)


class TestFourthMomentCrossCheck:
    def test_identity_holds_exactly(self, ledger11):
        assert cross_check_S8(ledger11)

    def test_rederived_coefficients(self, ledger11):
        # the x^3*x route must read  <z^3><z> + 1440 S_8 - 96 z S_6 - 48 S_5;
        # a 47 in place of the 48 breaks equality by exactly S_5
        rel = position_closure(3, 1)
        assert rel.coefficients[8] == ZetaPoly({0: 1440})
        assert rel.coefficients[6] == ZetaPoly({1: -96})
        assert rel.coefficients[5] == ZetaPoly({0: -48})
        lhs, rhs = s8_crosscheck_sides(ledger11)
        wrong = lhs + F(1) * ledger11.get(5).closed_form  # emulate the 47
        assert wrong != rhs

    def test_sensitive_to_unit_shift(self, ledger11):
        tampered = DerivationLedger()
        for p in range(2, 12):
            form = ledger11.get(p).closed_form
            if p == 8:
                form = form + ZetaPoly({0: 1})
            tampered.add(SumIdentity(p, form), "tampered")
        assert not cross_check_S8(tampered)

    def test_numeric_agreement_of_both_routes(self, table_sums):
        from airysums.sums import sum_S_numeric

        table = table_sums.table
        n, K = 1, 2000
        zn = float(table.zeta(n))
        s = {p: float(sum_S_numeric(p, n, table, K=K).value) for p in (5, 6, 8)}
        d1, d2, d3 = 2 * zn / 3, 8 * zn ** 2 / 15, 16 * zn ** 3 / 35 + 3.0 / 7.0
        lhs = d3 * d1 + 1440 * s[8] - 96 * zn * s[6] - 48 * s[5]
        rhs = d2 ** 2 + 576 * s[8]
        assert abs(lhs - rhs) < 1e-8


class TestConstraintTower:
    def test_second_order_saturates_dipole_sum_rule(self, ledger11):
        assert bethe_constraint_symbolic(2, ledger11) == ZetaPoly()

    def test_higher_orders_vanish_symbolically(self, ledger20):
        # order r involves sums up to S_{2r-1}
        for order in (4, 6, 8, 10):
            assert bethe_constraint_symbolic(order, ledger20) == ZetaPoly()

    def test_odd_orders_vanish_identically(self):
        for order in (3, 5, 7):
            assert not bethe_order_summand(order)

    def test_numeric_residual_fourth_order(self, table_sums, ledger11):
        resid = bethe_tower_check(4, 1, table_sums.table, ledger=ledger11, K=2000)
        assert float(resid) < 1e-8

    def test_numeric_residual_sixth_order(self, table_sums, ledger11):
        resid = bethe_tower_check(6, 1, table_sums.table, ledger=ledger11, K=2000)
        assert float(resid) < 1e-8

    def test_corrupted_ledger_detected(self, ledger11, table_small):
        tampered = DerivationLedger()
        for p in range(2, 12):
            form = ledger11.get(p).closed_form
            if p == 7:
                form = F(2) * form
            tampered.add(SumIdentity(p, form), "tampered")
        assert bethe_constraint_symbolic(4, tampered) != ZetaPoly()
        with pytest.raises(DerivationError):
            bethe_tower_check(4, 1, table_small, ledger=tampered, K=30)


class TestDivergenceDiagnostics:
    def test_first_power_grows_like_cube_root(self):
        report = divergence_diagnostic(1, 1, [10 ** 3, 10 ** 4, 10 ** 5, 10 ** 6])
        assert report.growth_exponent == pytest.approx(1 / 3, abs=0.05)
        assert not report.bounded

    def test_partial_sums_grow_tenfold_over_three_decades(self):
        report = divergence_diagnostic(1, 1, [10 ** 3, 10 ** 6])
        first, last = report.points[0][1], report.points[-1][1]
        assert 8.0 < last / first < 12.0

    def test_zeroth_power_counts_terms(self):
        report = divergence_diagnostic(0, 1, [100, 1000])
        assert report.points[0][1] == pytest.approx(99.0)
        assert report.growth_exponent == pytest.approx(1.0, abs=0.05)

    def test_second_power_bounded(self):
        report = divergence_diagnostic(2, 1, [10 ** 3, 10 ** 4, 10 ** 5, 10 ** 6])
        assert report.bounded

    def test_single_point_carries_no_exponent(self):
        report = divergence_diagnostic(1, 1, [10 ** 4])
        assert len(report.points) == 1
        assert report.growth_exponent is None

    def test_out_of_range_power_rejected(self):
        with pytest.raises(ValueError):
            divergence_diagnostic(3, 1, [100])
