"""Command-line interface.

Exit codes: 0 success (order holds, all checks pass), 1 a check failed,
2 bad input or usage.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from fractions import Fraction
from pathlib import Path

from .coupling import SimulationConfig, parse_jump_spec, read_samples_csv, run_simulation
from .diatomic import (
    SelectionRule,
    decomposition_to_json,
    diatomic_decompose,
    load_decomposition,
    validate_decomposition,
)
from .distributions import load_distribution, make_distribution
from .errors import InputError, NotCxOrdered
from .orders import check_order
from .verify import TestReport, counterexample_report, verify_samples

EXIT_OK, EXIT_FAIL, EXIT_INPUT = 0, 1, 2

FIG1_MU = make_distribution([(n, Fraction(1, 4)) for n in range(2, 6)])
FIG1_NU = make_distribution([(1, Fraction(1, 4)), (3, Fraction(1, 4))] + [(n, Fraction(1, 6)) for n in range(4, 7)])
FIG1_MEAN = 3.5
FIG1_MEAN_TOL = 0.15


def _dump(doc) -> str:
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def _write(path, text: str) -> None:
    if path is None or str(path) == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text, encoding="utf-8")


def render_reports(reports: list[TestReport]) -> str:
    rows = [("test", "statistic", "threshold", "n", "result")]
    for r in reports:
        verdict = "PASS" if r.passed else "FAIL"
        rows.append((r.name, f"{r.statistic:.6g}", f"{r.threshold:g}", str(r.n_samples), verdict))
    widths = [max(len(row[i]) for row in rows) for i in range(len(rows[0]))]
    lines = ["  ".join(cell.ljust(w) for cell, w in zip(row, widths)).rstrip() for row in rows]
    lines.insert(1, "  ".join("-" * w for w in widths))
    return "\n".join(lines) + "\n"


def cmd_check_order(args) -> int:
    mu, nu = load_distribution(args.mu), load_distribution(args.nu)
    verdict = check_order(args.order, mu, nu)
    doc = {"order": args.order, **verdict.to_json()}
    sys.stdout.write(_dump(doc))
    return EXIT_OK if verdict.holds else EXIT_FAIL


def cmd_decompose(args) -> int:
    mu, nu = load_distribution(args.mu), load_distribution(args.nu)
    dec = diatomic_decompose(mu, nu, SelectionRule(args.rule), debug=args.debug)
    report = validate_decomposition(dec, mu, nu)
    for c in report.checks:
        print(f"{c.name:12s} {'PASS' if c.passed else 'FAIL'} {c.detail}".rstrip(), file=sys.stderr)
    if not report.ok:
        return EXIT_FAIL
    _write(args.out, _dump(decomposition_to_json(dec)))
    return EXIT_OK


def _simulation_config(args) -> SimulationConfig:
    if args.decomposition:
        dec = load_decomposition(args.decomposition)
    elif args.mu and args.nu:
        mu, nu = load_distribution(args.mu), load_distribution(args.nu)
        dec = diatomic_decompose(mu, nu, SelectionRule(args.rule))
    else:
        raise InputError("give --decomposition, or both --mu and --nu")
    if args.mode == "compound":
        if not args.jumps:
            raise InputError("compound mode needs --jumps")
        return SimulationConfig("compound", dec, args.n, args.seed, jumps=parse_jump_spec(args.jumps))
    if args.rate is None:
        raise InputError("poisson mode needs --rate")
    return SimulationConfig("poisson", dec, args.n, args.seed, rate=args.rate)


def cmd_simulate(args) -> int:
    samples = run_simulation(_simulation_config(args))
    _write(args.out, samples.to_csv())
    return EXIT_OK


def cmd_verify(args) -> int:
    samples = read_samples_csv(args.samples)
    reports = verify_samples(samples, reference_n=args.reference_n)
    sys.stdout.write(render_reports(reports))
    if args.json:
        _write(args.json, _dump({"config": samples.config, "reports": [r.to_json() for r in reports]}))
    return EXIT_OK if all(r.passed for r in reports) else EXIT_FAIL


def cmd_counterexample(args) -> int:
    sys.stdout.write(_dump(counterexample_report().to_json()))
    return EXIT_OK


def _mean_report(name: str, values) -> TestReport:
    gap = abs(float(values.mean()) - FIG1_MEAN)
    return TestReport(
        name=name,
        statistic=gap,
        reference=f"|sample mean - {FIG1_MEAN}|",
        threshold=FIG1_MEAN_TOL,
        passed=gap < FIG1_MEAN_TOL,
        n_samples=len(values),
    )


def run_figure1(seed: int, n: int, out_dir, reference_n: int = 100_000) -> tuple[list[TestReport], dict]:
    """End-to-end pipeline on the reference example pair with Exp(1) jumps.

    Writes decomposition.json, samples.csv, report.json and scatter.tsv
    into ``out_dir`` and returns the reports.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    dec = diatomic_decompose(FIG1_MU, FIG1_NU)
    validation = validate_decomposition(dec, FIG1_MU, FIG1_NU)
    cfg = SimulationConfig("compound", dec, n, seed, jumps=parse_jump_spec("exp:1"))
    samples = run_simulation(cfg)
    echo = samples.config

    reports = [
        TestReport(
            name="decomposition",
            statistic=float(len(validation.failures())),
            reference="failed exact validation checks",
            threshold=0.0,
            passed=validation.ok,
            n_samples=len(dec),
        )
    ]
    if n > 0:
        reports.append(_mean_report("mean-A", samples.column("a")))
        reports.append(_mean_report("mean-B", samples.column("b")))
    reports.extend(verify_samples(samples, reference_n=reference_n))

    (out / "decomposition.json").write_text(
        _dump({"config": echo, **decomposition_to_json(dec), "validation": validation.to_json()}), encoding="utf-8"
    )
    samples.write_csv(out / "samples.csv")
    lines = ["# config: " + json.dumps(echo, sort_keys=True, separators=(",", ":")), "a\tb"]
    lines += [f"{a:.17g}\t{b:.17g}" for a, b in zip(samples.column("a"), samples.column("b"))]
    (out / "scatter.tsv").write_text("\n".join(lines) + "\n", encoding="utf-8")
    (out / "report.json").write_text(
        _dump({"config": echo, "reports": [r.to_json() for r in reports]}), encoding="utf-8"
    )
    return reports, echo


def cmd_figure1(args) -> int:
    reports, _ = run_figure1(args.seed, args.n, args.out_dir, args.reference_n)
    sys.stdout.write(render_reports(reports))
    return EXIT_OK if all(r.passed for r in reports) else EXIT_FAIL


def _positive_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if value < 1:
        raise argparse.ArgumentTypeError("must be at least 1")
    return value


def _seed(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError("seed must be a 64-bit unsigned integer")
    return value


def _default_seed() -> int:
    raw = os.environ.get("CONVORD_SEED")
    if raw is None:
        return 0
    try:
        return _seed(raw)
    except argparse.ArgumentTypeError as exc:
        raise InputError(f"CONVORD_SEED: {exc}") from None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="convord", description="Convex-order couplings for compound distributions.")
    sub = parser.add_subparsers(dest="command", required=True)
    rules = [r.value for r in SelectionRule]

    p = sub.add_parser("check-order", help="exact cx / icx / st comparison of two distribution files")
    p.add_argument("order", choices=["cx", "icx", "st"])
    p.add_argument("mu")
    p.add_argument("nu")
    p.set_defaults(func=cmd_check_order)

    p = sub.add_parser("decompose", help="diatomic decomposition of mu ≺_cx nu")
    p.add_argument("mu")
    p.add_argument("nu")
    p.add_argument("--rule", choices=rules, default=SelectionRule.LEFT_CURTAIN.value)
    p.add_argument("--out", "-o", default=None, help="output file (default stdout)")
    p.add_argument("--debug", action="store_true", help="re-check the order invariant after every step")
    p.set_defaults(func=cmd_decompose)

    p = sub.add_parser("simulate", help="simulate coupled pairs (A, B) to CSV")
    p.add_argument("--mode", choices=["compound", "poisson"], default="compound")
    p.add_argument("--decomposition", "-d")
    p.add_argument("--mu")
    p.add_argument("--nu")
    p.add_argument("--rule", choices=rules, default=SelectionRule.LEFT_CURTAIN.value)
    p.add_argument("--jumps", help="exp:RATE, det:VALUE or discrete:FILE")
    p.add_argument("--rate", type=float)
    p.add_argument("-n", type=_positive_int, required=True)
    p.add_argument("--seed", type=_seed, default=None)
    p.add_argument("--out", "-o", default=None)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("verify", help="martingale and marginal tests on a samples CSV")
    p.add_argument("samples")
    p.add_argument("--reference-n", type=_positive_int, default=100_000)
    p.add_argument("--json", default=None, help="also write the reports as JSON")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("counterexample", help="exact report on signed jumps breaking the ordering")
    p.set_defaults(func=cmd_counterexample)

    p = sub.add_parser("figure1", help="end-to-end run on the reference example")
    p.add_argument("--seed", type=_seed, default=None)
    p.add_argument("-n", type=_positive_int, default=10_000)
    p.add_argument("--out-dir", default="figure1")
    p.add_argument("--reference-n", type=_positive_int, default=100_000)
    p.set_defaults(func=cmd_figure1)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # usage errors and --help
        return exc.code if isinstance(exc.code, int) else EXIT_INPUT
    try:
        if getattr(args, "seed", 0) is None:
            args.seed = _default_seed()
        return args.func(args)
    except NotCxOrdered as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL
    except (InputError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
