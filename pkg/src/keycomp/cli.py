"""Command-line surface: analyze, simulate, verify, report.

Exit codes are fixed for scriptability: 0 success, 1 validation error,
2 I/O error, 3 failed consistency check under --strict-consistency,
4 failed statistical verification.
"""

from __future__ import annotations

import argparse
import os
import sys
import tempfile
from pathlib import Path

from .core import EffectModel, KeyComparisonError
from .doe import DEFAULT_COVERAGE, build_report
from .io import (
    FileFormat,
    ReportFormat,
    emit_report,
    parse_comparison,
    parse_report,
    parse_sim_spec,
)
from .kcrv import DEFAULT_ALPHA
from .simulate import DEFAULT_Z, run_simulation, verify_model

__all__ = ["main", "build_parser"]

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_IO = 2
EXIT_INCONSISTENT = 3
EXIT_VERIFY_FAILED = 4


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on bad arguments; bad user input is a validation
    # failure here, and 2 is reserved for I/O.
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_VALIDATION, f"{self.prog}: error: {message}\n")


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {value}")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="keycomp", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="subcommand", required=True, parser_class=_Parser)

    def common(p, with_format=True):
        p.add_argument("--input", required=True, help="input file path")
        p.add_argument("--output", default=None, help="output file path (default: stdout)")
        if with_format:
            p.add_argument(
                "--format",
                choices=[f.value for f in ReportFormat],
                default=ReportFormat.JSON.value,
                help="output format (default: json)",
            )

    p_analyze = sub.add_parser("analyze", help="reference value, degrees of equivalence, verdicts")
    common(p_analyze)
    p_analyze.add_argument(
        "--model",
        choices=[m.value for m in EffectModel],
        default=None,
        help="effect model (required for CSV input; overrides JSON input)",
    )
    p_analyze.add_argument("--k", type=float, default=DEFAULT_COVERAGE, help="coverage factor (default: 2)")
    p_analyze.add_argument("--alpha", type=float, default=DEFAULT_ALPHA, help="consistency level (default: 0.05)")
    p_analyze.add_argument(
        "--strict-consistency",
        action="store_true",
        help="exit 3 when the chi-squared consistency check fails",
    )

    p_sim = sub.add_parser("simulate", help="draw replications and report empirical moments")
    common(p_sim)
    p_sim.add_argument("--seed", type=int, default=None, help="overrides the spec's seed")
    p_sim.add_argument("--n-reps", type=_positive_int, default=None, help="overrides the spec's replication count")
    p_sim.add_argument("--threads", type=_positive_int, default=1, help="max worker threads (default: 1)")

    p_verify = sub.add_parser("verify", help="check analytical expectations against a simulation")
    common(p_verify)
    p_verify.add_argument("--seed", type=int, default=None, help="overrides the spec's seed")
    p_verify.add_argument("--n-reps", type=_positive_int, default=None, help="overrides the spec's replication count")
    p_verify.add_argument("--threads", type=_positive_int, default=1, help="max worker threads (default: 1)")
    p_verify.add_argument("--z", type=float, default=DEFAULT_Z, help="sigma multiplier (default: 4)")

    p_report = sub.add_parser("report", help="re-render a JSON report as json, csv, or md")
    common(p_report)

    return parser


def _read_input(path: str) -> bytes:
    return Path(path).read_bytes()


def _write_output(data: bytes, path: str | None) -> None:
    """Write whole output or nothing: temp file plus atomic rename."""
    if path is None:
        sys.stdout.buffer.write(data)
        sys.stdout.buffer.flush()
        return
    target = Path(path)
    fd, tmp_name = tempfile.mkstemp(dir=str(target.parent) or ".", prefix=f".{target.name}.")
    try:
        with os.fdopen(fd, "wb") as handle:
            handle.write(data)
        os.replace(tmp_name, str(target))
    except BaseException:
        try:
            os.unlink(tmp_name)
        except OSError:
            pass
        raise


def _input_format(path: str) -> FileFormat:
    return FileFormat.CSV if path.lower().endswith(".csv") else FileFormat.JSON


def _cmd_analyze(args) -> int:
    raw = _read_input(args.input)
    model = EffectModel(args.model) if args.model else None
    comparison = parse_comparison(raw, _input_format(args.input), model=model)
    report = build_report(comparison, k=args.k, alpha=args.alpha if comparison.n_labs >= 2 else None)
    _write_output(emit_report(report, ReportFormat(args.format)), args.output)
    if args.strict_consistency and report.consistency is not None and not report.consistency.passed:
        print(
            f"consistency check failed: chi2_obs={report.consistency.chi2_obs:.6g}, "
            f"p={report.consistency.p_value:.6g} < alpha={report.consistency.alpha:g}",
            file=sys.stderr,
        )
        return EXIT_INCONSISTENT
    return EXIT_OK


def _cmd_simulate(args) -> int:
    spec = parse_sim_spec(_read_input(args.input), seed=args.seed, n_reps=args.n_reps)
    outcome = run_simulation(spec, threads=args.threads)
    _write_output(emit_report(outcome, ReportFormat(args.format)), args.output)
    return EXIT_OK


def _cmd_verify(args) -> int:
    spec = parse_sim_spec(_read_input(args.input), seed=args.seed, n_reps=args.n_reps)
    report = verify_model(spec, z=args.z, threads=args.threads)
    _write_output(emit_report(report, ReportFormat(args.format)), args.output)
    if not report.passed:
        failed = [c for c in report.checks if not c.passed]
        print(f"verification failed: {len(failed)} of {len(report.checks)} checks", file=sys.stderr)
        return EXIT_VERIFY_FAILED
    return EXIT_OK


def _cmd_report(args) -> int:
    report = parse_report(_read_input(args.input))
    _write_output(emit_report(report, ReportFormat(args.format)), args.output)
    return EXIT_OK


_COMMANDS = {
    "analyze": _cmd_analyze,
    "simulate": _cmd_simulate,
    "verify": _cmd_verify,
    "report": _cmd_report,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.subcommand](args)
    except KeyComparisonError as exc:
        print(f"keycomp {args.subcommand}: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except OSError as exc:
        print(f"keycomp {args.subcommand}: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
