"""Command-line entry point.

Exit codes: 0 every check passed, 1 some check failed or was degenerate,
2 configuration or I/O error.
"""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import replace

from .config import CHECKS, RunConfig, parse_config
from .errors import ParseError, ValidationError

EXIT_PASS, EXIT_FAIL, EXIT_ERROR = 0, 1, 2
DEFAULT_SEED = 20240917


def default_config() -> RunConfig:
    """Every check on the built-in catalog; identical to ``configs/default.yaml``."""
    return RunConfig().with_seed(DEFAULT_SEED)


def _common(parser):
    parser.add_argument("--config", metavar="PATH", help="YAML run configuration (default: built-in suite)")
    parser.add_argument("--out", metavar="DIR", help="report directory (default: the config's output)")
    parser.add_argument("--seed", type=int, metavar="U64", help="Monte Carlo seed, overrides mc.seed")
    parser.add_argument("--tolerance-scale", type=float, default=1.0, metavar="X",
                        help="multiply every tolerance by X (recorded in the report)")
    parser.add_argument("--threads", type=int, default=1, metavar="N",
                        help="worker threads; results do not depend on N")
    parser.add_argument("--quiet", action="store_true", help="do not print the summary table")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fisherinfo",
        description="Numerical checks of the Fisher information inequality, its Stam form and both "
                    "proof chains (mutual information and MMSE), with JSON/CSV/text reports.",
        epilog="exit codes: 0 all checks pass, 1 a check failed or was degenerate, 2 configuration/IO error",
    )
    sub = parser.add_subparsers(dest="command", required=True, metavar="{suite,check,report}")
    p_suite = sub.add_parser("suite", help="run every check selected by the config")
    _common(p_suite)
    p_check = sub.add_parser("check", help="run one family of checks")
    p_check.add_argument("name", choices=CHECKS)
    _common(p_check)
    p_report = sub.add_parser("report", help="re-emit CSV and summary files from a saved report.json")
    p_report.add_argument("path", metavar="REPORT_JSON")
    p_report.add_argument("--out", metavar="DIR", help="directory to write (default: next to REPORT_JSON)")
    p_report.add_argument("--quiet", action="store_true")
    return parser


def _load_config(args) -> RunConfig:
    if args.config:
        config = parse_config(args.config, seed=args.seed)
    else:
        config = default_config()
        if args.seed is not None:
            if not 0 <= args.seed < 2**64:
                raise ValidationError(["--seed: must fit in 64 bits"])
            config = config.with_seed(args.seed)
    if not args.tolerance_scale > 0:
        raise ValidationError([f"--tolerance-scale: must be positive, got {args.tolerance_scale}"])
    if args.threads < 1:
        raise ValidationError([f"--threads: must be >= 1, got {args.threads}"])
    if args.tolerance_scale != 1.0:
        config = config.scaled(args.tolerance_scale)
    if args.command == "check":
        if args.name == "var-additivity" and config.mc.seed is None:
            raise ValidationError(["mc.seed: required when var-additivity is selected"])
        config = replace(config, checks=(args.name,))
    return config


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    # deferred so that --help stays fast
    from .report import emit_report, load_report, summary_text
    from .suite import run_suite

    try:
        if args.command == "report":
            try:
                report = load_report(args.path)
            except (KeyError, TypeError, ValueError) as exc:
                raise ParseError(f"not a fisherinfo report: {exc}") from exc
            out = args.out or os.path.dirname(os.path.abspath(args.path))
        else:
            config = _load_config(args)
            report = run_suite(config, threads=args.threads)
            out = args.out or config.output
        paths = emit_report(report, out)
    except (ParseError, ValidationError) as exc:
        print(f"fisherinfo: configuration error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except OSError as exc:
        print(f"fisherinfo: I/O error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    if not args.quiet:
        print(summary_text(report), end="")
        print(f"\nreport written to {paths['json']}")
    return EXIT_PASS if report.verdict == "pass" else EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
