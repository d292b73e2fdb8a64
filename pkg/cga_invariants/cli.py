"""Command-line entry point.

Usage:
    cga-inv verify-algebra --ell 5/2
    cga-inv verify-invariants --ell 5/2 --parallelism 0
    cga-inv emit --ell 5/2 --what final --format latex
    cga-inv coeff --ell 7/2 --format json
    cga-inv check candidate.txt --ell 3/2
    cga-inv bench --ell 9/2

Exit status is 0 when no check FAILs (WARN entries do not count), 1 on any
FAIL and 2 on usage, parse or engine errors.
"""

import argparse
import logging
import sys
from collections.abc import Sequence
from pathlib import Path

from pydantic import ValidationError

from cga_invariants.config import get_settings
from cga_invariants.exceptions import CGAError, ParseError
from cga_invariants.schemas.common import CheckStatus
from cga_invariants.schemas.run import EmitTarget, OutputFormat, RunConfig
from cga_invariants.services import reports

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_USAGE = 2


def _common_flags() -> argparse.ArgumentParser:
    settings = get_settings()
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--ell", required=True, help="Half-integer ell >= 3/2, e.g. 5/2")
    common.add_argument(
        "--format",
        dest="output_format",
        choices=[f.value for f in OutputFormat],
        default=settings.default_format,
        help="Output format (default: %(default)s)",
    )
    common.add_argument(
        "--parallelism",
        type=int,
        default=settings.parallelism,
        help="Worker processes, 0 for one per CPU (default: %(default)s)",
    )
    common.add_argument("--output", help="Write to this file instead of stdout")
    common.add_argument(
        "--log-level",
        choices=["DEBUG", "INFO", "WARNING", "ERROR"],
        default=settings.log_level,
        help="Log level on stderr (default: %(default)s)",
    )
    return common


def build_parser() -> argparse.ArgumentParser:
    common = _common_flags()
    parser = argparse.ArgumentParser(
        prog="cga-inv",
        description="Exact differential invariants of centrally extended conformal Galilei algebras",
    )
    settings = get_settings()
    parser.add_argument("--version", action="version", version=f"{settings.app_name} {settings.app_version}")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("verify-algebra", parents=[common], help="Check every commutator of the realization")
    sub.add_parser(
        "verify-invariants", parents=[common], help="Check the final invariants and the intermediate claims"
    )
    emit = sub.add_parser("emit", parents=[common], help="Write generators or an invariant tower")
    emit.add_argument("--what", required=True, choices=[t.value for t in EmitTarget])
    sub.add_parser("coeff", parents=[common], help="Dump the c_ab(k, m) and gamma(k, m) table")
    check = sub.add_parser("check", parents=[common], help="Apply every generator to a candidate expression")
    check.add_argument("file", help="File holding one expression in text form, '-' for stdin")
    sub.add_parser("bench", parents=[common], help="Time construction and full verification")
    return parser


def _write(text: str, output: str | None) -> None:
    if output is None:
        sys.stdout.write(text)
        return
    Path(output).write_text(text, encoding="utf-8")
    logger.info(f"Wrote {output}")


def _read_candidate(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    return Path(path).read_text(encoding="utf-8")


def _apply_memory_limit(limit_mb: int) -> None:
    if limit_mb <= 0:
        return
    try:
        import resource
    except ImportError:
        logger.warning("Memory limit requested but not supported on this platform")
        return
    limit = limit_mb * 1024 * 1024
    resource.setrlimit(resource.RLIMIT_AS, (limit, limit))
    logger.info(f"Address space limited to {limit_mb} MB")


def _exit_code(status: CheckStatus) -> int:
    return EXIT_FAIL if status == CheckStatus.FAIL else EXIT_OK


def run(command: str, cfg: RunConfig, candidate_file: str | None = None) -> int:
    """
    Execute one validated command and write its output.

    Args:
        command: Subcommand name
        cfg: Validated flags merged with settings
        candidate_file: Path for ``check``, "-" for stdin

    Returns:
        Exit status: 1 when any check FAILs, else 0

    Raises:
        ParseError: If the ``check`` candidate is malformed
        CGAError: On engine errors
        ValueError: On an unknown command or a target that does not exist at this ell
        OSError: If the candidate or output file cannot be accessed
    """
    ell = cfg.half_int
    fmt = cfg.output_format
    as_json = fmt == OutputFormat.JSON

    match command:
        case "verify-algebra":
            bracket = reports.bracket_report(ell)
            _write(reports.to_json(bracket) if as_json else reports.format_bracket_report(bracket), cfg.output)
            return _exit_code(bracket.status)
        case "verify-invariants":
            verification = reports.verification_report(ell, cfg.parallelism)
            text = reports.to_json(verification) if as_json else reports.format_verification(verification)
            _write(text, cfg.output)
            return _exit_code(verification.status)
        case "emit":
            if cfg.what is None:
                raise ValueError("emit needs --what")
            _write(reports.emit_document(ell, cfg.what, fmt), cfg.output)
            return EXIT_OK
        case "coeff":
            model = reports.coeff_table_model(ell)
            _write(reports.to_json(model) if as_json else reports.format_coeff_table(model), cfg.output)
            return EXIT_OK
        case "check":
            if candidate_file is None:
                raise ValueError("check needs a file")
            verdicts = reports.check_expression(_read_candidate(candidate_file), ell)
            _write(reports.to_json(verdicts) if as_json else reports.format_check_report(verdicts), cfg.output)
            return EXIT_OK
        case "bench":
            limit = get_settings().bench_memory_limit_mb
            _apply_memory_limit(limit)
            bench = reports.run_bench(ell, cfg.parallelism, limit)
            _write(reports.to_json(bench) if as_json else reports.format_bench_report(bench), cfg.output)
            return _exit_code(bench.status)
    raise ValueError(f"Unknown command {command}")


def main(argv: Sequence[str] | None = None) -> int:
    """Parse arguments, configure logging and run; returns the exit status."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if e.code in (0, None) else EXIT_USAGE

    logging.basicConfig(
        format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
        level=getattr(logging, args.log_level),
        stream=sys.stderr,
    )

    try:
        cfg = RunConfig(
            ell=args.ell,
            output_format=args.output_format,
            parallelism=args.parallelism,
            output=args.output,
            what=getattr(args, "what", None),
        )
    except ValidationError as e:
        errors = "; ".join(str(err["msg"]) for err in e.errors())
        print(f"cga-inv: invalid arguments: {errors}", file=sys.stderr)
        return EXIT_USAGE

    try:
        return run(args.command, cfg, getattr(args, "file", None))
    except ParseError as e:
        print(f"cga-inv: parse error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except (CGAError, ValueError, KeyError, OSError) as e:
        print(f"cga-inv: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
