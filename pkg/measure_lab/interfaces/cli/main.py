"""mplab command line

    mplab solve|reduce|project|admissible|sweep|verify --config <file>
          [--out <dir>] [--jobs N] [--mollifier-profile bump|cosine] [--dump-kernels]
          [--log-level LEVEL] [-v]

Exit codes: 0 when every grid converged and every invariant row passed,
1 for non-convergence or a failed row, 2 for configuration errors.
"""

import argparse
import logging
import os
import sys
from pathlib import Path
from typing import List, Optional

from ... import __version__
from ...application.use_cases import USE_CASES
from ...domain.exceptions import ConfigError, MeasureLabError, MonotonicityViolationError
from ...infrastructure.io.spec_loader import load_config

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_CONFIG = 2

OUT_DIR_ENV = "MPLAB_OUT_DIR"
LOG_FORMAT = "%(levelname)s %(name)s: %(message)s"


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mplab",
        description="Semilinear Dirichlet problems with measure data: solves, "
        "reduced measures, projections and admissibility studies.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in USE_CASES:
        command = sub.add_parser(name, help=f"run the {name} pipeline")
        command.add_argument(
            "--config",
            required=name != "verify",
            help="experiment config JSON" + (" (optional for verify)" if name == "verify" else ""),
        )
        command.add_argument("--out", help=f"output directory (overrides ${OUT_DIR_ENV})")
        command.add_argument("--jobs", type=int, default=1, help="worker threads (default 1)")
        command.add_argument(
            "--mollifier-profile",
            choices=["bump", "cosine"],
            help="override mollification.profile",
        )
        command.add_argument(
            "--dump-kernels",
            action="store_true",
            help="write the mollifier stencils under kernels/ in the output directory",
        )
        command.add_argument(
            "--log-level",
            default="WARNING",
            choices=["DEBUG", "INFO", "WARNING", "ERROR"],
            help="logging level (default WARNING)",
        )
        command.add_argument(
            "-v", "--verbose", action="store_true", help="same as --log-level INFO"
        )
    return parser


def configure_logging(level: str, verbose: bool) -> None:
    if verbose and level == "WARNING":
        level = "INFO"
    logging.basicConfig(level=getattr(logging, level), format=LOG_FORMAT, force=True)


def resolve_out_dir(explicit: Optional[str]) -> Optional[str]:
    """--out wins over $MPLAB_OUT_DIR; None falls back to config.output_dir."""
    return explicit or os.environ.get(OUT_DIR_ENV) or None


def run(argv: Optional[List[str]] = None) -> int:
    """Parse argv, run the pipeline and return the exit code."""
    parser = build_parser()
    args = parser.parse_args(argv)
    configure_logging(args.log_level, args.verbose)

    config = None
    base_dir = Path(".")
    try:
        if args.config:
            config = load_config(args.config)
            base_dir = Path(args.config).parent
            overrides = {}
            if args.mollifier_profile:
                overrides["profile"] = args.mollifier_profile
            if args.dump_kernels:
                overrides["dump_kernels"] = True
            if overrides:
                mollification = config.mollification.model_copy(update=overrides)
                config = config.model_copy(update={"mollification": mollification})
        if args.jobs < 1:
            raise ConfigError("must be >= 1", key="--jobs")
        use_case = USE_CASES[args.command].create(jobs=args.jobs)
        result = use_case.execute(config, base_dir, resolve_out_dir(args.out))
    except (ConfigError, MonotonicityViolationError) as e:
        print(f"mplab {args.command}: configuration error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as e:
        print(f"mplab {args.command}: cannot write output: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except MeasureLabError as e:
        print(f"mplab {args.command}: {e}", file=sys.stderr)
        return EXIT_FAILED

    if result['success']:
        print(result['message'])
        return EXIT_OK
    print(result['error'], file=sys.stderr)
    return EXIT_FAILED


def main(argv: Optional[List[str]] = None) -> int:
    return run(argv)


if __name__ == "__main__":
    sys.exit(main())
