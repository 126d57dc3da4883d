"""Command-line entry point: `run [kind] --config PATH --out DIR --seed U64 --scale desk|paper --threads K --set k=v`."""

import argparse
import logging
import sys
from pathlib import Path
from typing import List, Optional

from .analysis import error_record, write_json
from .config import ExperimentConfig, get_settings, load_config
from .errors import ConfigError, ReportIOError, SolverError
from .graph import run_experiment

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_UNEXPECTED = 1
EXIT_CONFIG = 2
EXIT_SOLVER = 3
EXIT_IO = 4

KINDS = ["example1", "example2", "optimality5", "lognormal61", "dimension8", "bounds3", "solve-once"]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="saa-tailbounds", description="SAA tail-bound experiments")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="Run one experiment and write its artifacts")
    run.add_argument("kind", nargs="?", choices=KINDS, help="Experiment kind (or 'kind' in the config)")
    run.add_argument("--config", type=Path, help="JSON experiment config")
    run.add_argument("--out", type=Path, help="Output directory")
    run.add_argument("--seed", type=int, help="Base seed (unsigned 64-bit)")
    run.add_argument("--scale", choices=["desk", "paper"], help="Problem size preset")
    run.add_argument("--threads", type=int, help="Worker threads for replications")
    run.add_argument(
        "--set",
        dest="overrides",
        action="append",
        default=[],
        metavar="KEY=VALUE",
        help="Dotted-path override applied to the config, e.g. --set solver.tol=1e-9",
    )
    return parser


def exit_code_for(exc: BaseException) -> int:
    if isinstance(exc, ConfigError):
        return EXIT_CONFIG
    if isinstance(exc, SolverError):
        return EXIT_SOLVER
    if isinstance(exc, (ReportIOError, OSError)):
        return EXIT_IO
    return EXIT_UNEXPECTED


def _error_dir(args: argparse.Namespace, config: Optional[ExperimentConfig]) -> Path:
    if args.out is not None:
        return args.out
    if config is not None:
        return Path(config.resolve().output_dir)
    return get_settings().output_dir


def run_command(args: argparse.Namespace) -> int:
    config: Optional[ExperimentConfig] = None
    try:
        config = load_config(
            args.config,
            args.overrides,
            kind=args.kind,
            scale=args.scale,
            base_seed=args.seed,
            threads=args.threads,
            output_dir=args.out,
        )
        run_experiment(config)
        return EXIT_OK
    except Exception as exc:
        code = exit_code_for(exc)
        logger.error(f"Run failed with exit code {code}: {exc}")
        record = error_record(exc, code)
        try:
            write_json(record, _error_dir(args, config) / "error.json")
        except Exception as write_exc:
            logger.error(f"Could not write error.json: {write_exc}")
            print(record, file=sys.stderr)
        return code


def main(argv: Optional[List[str]] = None) -> int:
    settings = get_settings()
    logging.basicConfig(
        level=getattr(logging, settings.log_level.upper(), logging.INFO),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )
    args = build_parser().parse_args(argv)
    if args.command == "run":
        return run_command(args)
    return EXIT_UNEXPECTED
