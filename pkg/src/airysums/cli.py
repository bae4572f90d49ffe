"""Command-line front end: compute zeros, derive closed forms, run checks.

Exit codes: 0 on success (all verifications passed), 1 if any verification
failed, 2 on usage errors.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
import time
from fractions import Fraction
from pathlib import Path

from .airy import build_zero_table
from .derive import (
    DerivationLedger,
    bethe_constraint_symbolic,
    bethe_tower_check,
    cross_check_S8,
    derive_up_to,
    divergence_diagnostic,
    verify_against_reference_table,
)
from .multisum import (
    StarkConfig,
    derive_T_from_identities,
    stark_expansion_coefficient,
    stark_order_symbolic,
    stark_perturbative,
    t_sum_numeric,
)
from .precision import Real, default_precision_bits
from .sums import compare

SUITES = ("sums", "stark", "bethe", "tsums", "all")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="airysums",
        description="Airy zeros, bouncer matrix elements, and exact reciprocal-power zero sums.",
    )
    parser.add_argument(
        "--precision",
        type=int,
        default=None,
        help=f"precision in bits (default {default_precision_bits()}, "
        "or AIRYSUMS_PRECISION_BITS)",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_zeros = sub.add_parser("zeros", help="tabulate zeros of Ai")
    p_zeros.add_argument("--n", type=int, required=True, help="number of zeros (>= 1)")
    _output_args(p_zeros)

    p_derive = sub.add_parser("derive", help="derive closed forms S_2..S_pmax")
    p_derive.add_argument("--p-max", type=int, required=True, help="largest power (>= 2)")
    p_derive.add_argument(
        "--ledger", type=Path, default=None,
        help="ledger JSON path; reused incrementally if it exists",
    )
    _output_args(p_derive)

    p_verify = sub.add_parser("verify", help="run a verification suite")
    p_verify.add_argument("--suite", choices=SUITES, required=True)
    p_verify.add_argument("--K", type=int, default=2000, help="direct-summation cutoff")
    p_verify.add_argument("--n-set", type=int, nargs="+", default=[1, 2, 3, 4, 5])
    _output_args(p_verify)

    return parser


def _output_args(p: argparse.ArgumentParser):
    p.add_argument("--format", choices=("json", "csv", "text"), default="text")
    p.add_argument("--output", type=Path, default=None, help="write to file instead of stdout")


def _emit(text: str, path: Path | None):
    if path is None:
        sys.stdout.write(text)
        if not text.endswith("\n"):
            sys.stdout.write("\n")
    else:
        path.write_text(text if text.endswith("\n") else text + "\n")


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def cmd_zeros(args) -> int:
    if args.n < 1:
        raise UsageError("--n must be >= 1")
    bits = args.precision or default_precision_bits()
    table = build_zero_table(args.n, bits)
    if args.format == "json":
        payload = {
            "precision_bits": table.precision_bits,
            "tolerance": table.tolerance.to_decimal_string(),
            "zeros": table.to_records(),
        }
        _emit(json.dumps(payload, indent=2), args.output)
    elif args.format == "csv":
        buf = io.StringIO()
        w = csv.writer(buf)
        w.writerow(["n", "zeta"])
        for n, z in table:
            w.writerow([n, z.to_decimal_string()])
        _emit(buf.getvalue(), args.output)
    else:
        lines = [f"zeta_{n} = {z.to_decimal_string()}" for n, z in table]
        _emit("\n".join(lines), args.output)
    return 0


def cmd_derive(args) -> int:
    if args.p_max < 2:
        raise UsageError("--p-max must be >= 2")
    ledger = DerivationLedger()
    if args.ledger is not None and args.ledger.exists():
        ledger = DerivationLedger.load(args.ledger)
    derive_up_to(args.p_max, ledger)
    if args.ledger is not None:
        ledger.save(args.ledger)
    records = ledger.to_json_obj()
    records = [r for r in records if r["p"] <= args.p_max]
    if args.format == "json":
        _emit(json.dumps(records, indent=2), args.output)
    elif args.format == "csv":
        buf = io.StringIO()
        w = csv.writer(buf)
        w.writerow(["p", "zeta_power", "numerator", "denominator", "provenance"])
        for rec in records:
            for term in rec["terms"]:
                w.writerow(
                    [rec["p"], term["zeta_power"], term["numerator"],
                     term["denominator"], rec["provenance"]]
                )
        _emit(buf.getvalue(), args.output)
    else:
        lines = []
        for rec in records:
            terms = " + ".join(
                _term_text(t["zeta_power"], t["numerator"], t["denominator"])
                for t in rec["terms"]
            )
            lines.append(f"S_{rec['p']}(n) = {terms}    [{rec['provenance']}]")
        _emit("\n".join(lines), args.output)
    return 0


def _term_text(power, num, den) -> str:
    coeff = f"{num}/{den}" if den != "1" else f"{num}"
    if power == 0:
        return coeff
    z = "zeta_n" if power == 1 else f"zeta_n^{power}"
    return f"({coeff}) {z}"


def cmd_verify(args) -> int:
    bits = args.precision or default_precision_bits()
    checks: list[dict] = []
    t0 = time.monotonic()

    suites = [args.suite] if args.suite != "all" else ["sums", "stark", "bethe", "tsums"]
    ledger = derive_up_to(11)
    n_max = max(max(args.n_set), 5)
    table = build_zero_table(max(args.K, n_max), bits)

    if "sums" in suites:
        for row in verify_against_reference_table(ledger):
            checks.append(
                {"name": f"closed form S_{row['p']} matches reference",
                 "passed": row["match"],
                 "detail": "" if row["match"] else str(row["mismatches"])}
            )
        for p in range(2, 12):
            report = compare(ledger.get(p), args.n_set, table, tol=1e-6, K=args.K)
            checks.append(
                {"name": f"numeric S_{p} at n in {args.n_set} (tol 1e-6)",
                 "passed": report.passed,
                 "detail": f"worst rel dev {report.worst():.3e}"}
            )
        checks.append(
            {"name": "S_2 = 12 S_5 as polynomials",
             "passed": ledger.get(2).closed_form
             == Fraction(12) * ledger.get(5).closed_form,
             "detail": ""}
        )
        checks.append(
            {"name": "fourth-moment cross-check identity",
             "passed": cross_check_S8(ledger), "detail": ""}
        )
        div1 = divergence_diagnostic(1, 1, [10 ** 3, 10 ** 4, 10 ** 5, 10 ** 6])
        div2 = divergence_diagnostic(2, 1, [10 ** 3, 10 ** 4, 10 ** 5, 10 ** 6])
        checks.append(
            {"name": "S_1 partial sums grow like K^(1/3)",
             "passed": div1.growth_exponent is not None
             and abs(div1.growth_exponent - 1 / 3) < 0.05,
             "detail": f"fitted exponent {div1.growth_exponent:.4f}"}
        )
        checks.append(
            {"name": "S_2 partial sums bounded",
             "passed": div2.bounded,
             "detail": f"fitted exponent {div2.growth_exponent:.2e}"}
        )

    if "stark" in suites:
        cfg = StarkConfig(F=Real(1, bits), F_bar=Real("0.1", bits))
        for order in (1, 2, 3):
            want = stark_expansion_coefficient(order)
            from .algebra import ZetaPoly

            got = stark_order_symbolic(order, ledger)
            passed = got == want * ZetaPoly.zeta()
            checks.append(
                {"name": f"perturbation order {order} coefficient = {want}",
                 "passed": passed, "detail": repr(got) if not passed else ""}
            )
        for n in (1, 2, 3):
            direct = stark_perturbative(n, cfg, 2, table, K=args.K)
            exact = Fraction(-1, 9) * cfg.ratio * cfg.ratio * cfg.units.E0 * table.zeta(n)
            rel = abs(float(direct - exact) / float(exact))
            checks.append(
                {"name": f"order-2 direct sum at n={n} (tol 1e-6)",
                 "passed": rel < 1e-6, "detail": f"rel dev {rel:.3e}"}
            )

    if "bethe" in suites:
        passed = not bethe_constraint_symbolic(2, ledger)
        checks.append(
            {"name": "order q^2 saturates the energy-weighted dipole sum (exact)",
             "passed": passed, "detail": ""}
        )
        for order in (4, 6):
            resid = bethe_tower_check(order, 1, table, ledger=ledger, K=args.K)
            checks.append(
                {"name": f"order q^{order} constraint residual < 1e-8",
                 "passed": float(resid) < 1e-8,
                 "detail": f"residual {float(resid):.3e}"}
            )

    if "tsums" in suites:
        for which, exps in (("stark3", (3, 2, 3)), ("triple_x", (2, 2, 2))):
            ident = derive_T_from_identities(which, ledger)
            for n in (1, 2, 3):
                val, err = t_sum_numeric(*exps, n, table, K=min(300, args.K))
                closed = ident.evaluate(table.zeta(n))
                rel = abs(float(val - closed) / float(closed))
                checks.append(
                    {"name": f"T_{exps} numeric at n={n} (tol 1e-5)",
                     "passed": rel < 1e-5,
                     "detail": f"rel dev {rel:.3e}, est err {float(err):.2e}"}
                )

    elapsed = time.monotonic() - t0
    all_passed = all(c["passed"] for c in checks)
    _emit_report(checks, all_passed, elapsed, args)
    return 0 if all_passed else 1


def _emit_report(checks, all_passed, elapsed, args):
    if args.format == "json":
        payload = {
            "suite": args.suite,
            "passed": all_passed,
            "elapsed_seconds": round(elapsed, 3),
            "checks": checks,
        }
        _emit(json.dumps(payload, indent=2), args.output)
    elif args.format == "csv":
        buf = io.StringIO()
        w = csv.writer(buf)
        w.writerow(["name", "passed", "detail"])
        for c in checks:
            w.writerow([c["name"], c["passed"], c["detail"]])
        _emit(buf.getvalue(), args.output)
    else:
        lines = []
        for c in checks:
            mark = "PASS" if c["passed"] else "FAIL"
            detail = f"  ({c['detail']})" if c["detail"] else ""
            lines.append(f"[{mark}] {c['name']}{detail}")
        lines.append(
            f"{'all checks passed' if all_passed else 'FAILURES PRESENT'} "
            f"in {elapsed:.1f}s"
        )
        _emit("\n".join(lines), args.output)


class UsageError(Exception):
    pass


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "zeros":
            return cmd_zeros(args)
        if args.command == "derive":
            return cmd_derive(args)
        return cmd_verify(args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"airysums: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
