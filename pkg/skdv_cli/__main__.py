"""
sKdV Hamiltonian toolkit CLI entry point.

Usage:
    python -m skdv_cli derive --model skdv2_lagrangian --out report.json
    python -m skdv_cli verify-paper
    python -m skdv_cli expand-super --expr "D(Phi)"
    python -m skdv_cli simulate --config ./config/simulation.example.yaml
"""

import argparse
import sys
from pathlib import Path
from typing import Optional, Sequence

from skdv_cli.commands import (
    COMMANDS,
    EXIT_MISMATCH,
    EXIT_NUMERICAL,
    EXIT_USAGE,
)
from skdv_core.exceptions import (
    ConfigError,
    DSLSyntaxError,
    ModelError,
    NonlocalError,
    NumericalError,
    SkdvError,
    UnknownFieldError,
)
from skdv_core.utils.logging import bind_run_context, get_logger, setup_logging

logger = get_logger(__name__)

USAGE_ERRORS = (ConfigError, DSLSyntaxError, ModelError, UnknownFieldError)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="skdv",
        description="Constrained Hamiltonian analysis and simulation of the sKdV equations",
    )

    subparsers = parser.add_subparsers(dest="command", required=True)

    derive_parser = subparsers.add_parser(
        "derive",
        help="Run the Dirac-Bergmann algorithm on a model Lagrangian",
    )
    verify_parser = subparsers.add_parser(
        "verify-paper",
        help="Re-derive the sKdV-2 results and compare with the golden forms",
    )
    expand_parser = subparsers.add_parser(
        "expand-super",
        help="Expand a superspace expression into theta components",
    )
    expand_parser.add_argument(
        "--expr",
        type=str,
        required=True,
        help='Superspace expression, e.g. "D(Phi)"',
    )
    simulate_parser = subparsers.add_parser(
        "simulate",
        help="Integrate a model numerically and write CSV output",
    )

    for subparser in [derive_parser, simulate_parser]:
        subparser.add_argument(
            "--model",
            type=str,
            help="Registered model name (overrides the config file)",
        )
        subparser.add_argument(
            "--config",
            type=Path,
            help="Path to a YAML config file",
        )

    for subparser in [derive_parser, expand_parser, simulate_parser]:
        subparser.add_argument(
            "--param",
            action="append",
            default=[],
            metavar="KEY=VALUE",
            help="Model parameter, e.g. a=2 (repeatable)",
        )

    # Common arguments
    for subparser, default_format, formats in [
        (derive_parser, "json", ["json", "text"]),
        (verify_parser, "text", ["json", "text"]),
        (expand_parser, "text", ["json", "text"]),
        (simulate_parser, "text", ["json", "text", "csv"]),
    ]:
        subparser.add_argument(
            "--out",
            type=Path,
            help="Output file (output directory for simulate)",
        )
        subparser.add_argument(
            "--format",
            choices=formats,
            default=default_format,
            help="Output format",
        )
        subparser.add_argument(
            "--verbose", "-v",
            action="store_true",
            help="Enable verbose output",
        )
        subparser.add_argument(
            "--json-logs",
            action="store_true",
            help="Emit log records as JSON",
        )
        subparser.add_argument(
            "--log-file",
            type=str,
            help="Also write logs to this file",
        )

    return parser


def parse_args(argv: Optional[Sequence[str]] = None) -> argparse.Namespace:
    """Parse command line arguments."""
    return build_parser().parse_args(argv)


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Main entry point."""
    try:
        args = parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else 0

    log_level = "DEBUG" if args.verbose else "INFO"
    setup_logging(level=log_level, json_format=args.json_logs, log_file=args.log_file)
    bind_run_context(command=args.command)

    try:
        return COMMANDS[args.command](args)
    except USAGE_ERRORS as e:
        logger.error("Invalid input", error=str(e))
        return EXIT_USAGE
    except (NumericalError, NonlocalError) as e:
        last = getattr(e, "last_valid_time", None)
        logger.error("Numerical failure", error=str(e), last_valid_time=last)
        return EXIT_NUMERICAL
    except SkdvError as e:
        logger.error("Derivation failed", error=str(e))
        return EXIT_MISMATCH


if __name__ == "__main__":
    sys.exit(main())
