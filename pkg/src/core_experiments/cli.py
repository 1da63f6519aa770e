"""Command-line entrypoint for the experiment harness.

    qpaths run <config.yml> [--out results.csv] [--seed N] [--threads N] [--quiet]
    qpaths table1 | bdmc-curve | density-grid [--family student_t] | selftest

Exit codes: 0 success, 2 configuration error, 3 numerical failure or a
failing self-test.
"""

import argparse
import logging
from collections.abc import Sequence
try:
    from importlib.resources.abc import Traversable
except ImportError:  # Python < 3.11
    from importlib.abc import Traversable
from pathlib import Path

from pydantic import ValidationError

from core_experiments.config.settings import get_settings
from core_experiments.models.experiment_config import ExperimentConfig, load_experiment_config
from core_experiments.models.result_row import ResultRow, RowModel
from core_experiments.runner import aggregate, run_experiment
from core_experiments.selftest import selftest
from core_experiments.utils.common import builtin_experiment, resolve_output_path
from core_experiments.utils.config_loader import ConfigError
from core_experiments.utils.logger import configure_logging
from core_experiments.utils.result_io import companion_path, write_jsonl, write_rows, write_summary
from qpaths.errors import ConstructionError, DomainError, NumericalFailureError, PreconditionError

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG_ERROR = 2
EXIT_NUMERICAL_FAILURE = 3

CONFIG_ERRORS = (ConfigError, ValidationError, PreconditionError, DomainError, ConstructionError)

BUILTIN_COMMANDS = {
    "table1": "table1",
    "bdmc-curve": "bdmc_curve",
}
DENSITY_GRID_EXPERIMENTS = {
    "gaussian": "density_grid",
    "student_t": "student_t_grid",
}


def _uint64(value: str) -> int:
    seed = int(value)
    if not 0 <= seed < 1 << 64:
        raise argparse.ArgumentTypeError(f"seed must be an unsigned 64-bit integer, got {value}")
    return seed


def _non_negative(value: str) -> int:
    threads = int(value)
    if threads < 0:
        raise argparse.ArgumentTypeError(f"threads must be >= 0, got {value}")
    return threads


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", type=Path, default=None, help="CSV output path (default: artifacts/<name>.csv)")
    common.add_argument("--seed", type=_uint64, default=None, help="Override the config's base_seed")
    common.add_argument(
        "--threads",
        type=_non_negative,
        default=None,
        help="Worker threads; 0 means one per CPU (default: QPATHS_DEFAULT_THREADS)",
    )
    common.add_argument("--quiet", action="store_true", help="Only log warnings and errors")

    parser = argparse.ArgumentParser(prog="qpaths", description="Annealed importance sampling along q-paths.")
    commands = parser.add_subparsers(dest="command", required=True)

    run = commands.add_parser("run", parents=[common], help="Run an experiment file")
    run.add_argument("config_path", nargs="?", type=Path, help="Experiment YAML file")
    run.add_argument("--config", dest="config_option", type=Path, default=None, help="Experiment YAML file")

    commands.add_parser("table1", parents=[common], help="Partition function estimates per q (Gaussian pair)")
    commands.add_parser("bdmc-curve", parents=[common], help="BDMC bounds over T in {2, 5, 10, 25, 50, 100, 200}")
    grid = commands.add_parser("density-grid", parents=[common], help="Intermediate log-densities for ridge plots")
    grid.add_argument("--family", choices=sorted(DENSITY_GRID_EXPERIMENTS), default="gaussian")
    commands.add_parser("selftest", parents=[common], help="Run the built-in property checks")
    return parser


def _config_source(args: argparse.Namespace) -> Path | Traversable:
    if args.command == "run":
        if args.config_path is not None and args.config_option is not None:
            raise ConfigError("give the config either positionally or via --config, not both", field="config")
        source = args.config_path or args.config_option
        if source is None:
            raise ConfigError("no experiment file given", field="config")
        return source
    if args.command == "density-grid":
        return builtin_experiment(DENSITY_GRID_EXPERIMENTS[args.family])
    return builtin_experiment(BUILTIN_COMMANDS[args.command])


def write_outputs(config: ExperimentConfig, rows: Sequence[RowModel], out: Path) -> None:
    """CSV plus JSON-lines mirror; AIS/BDMC runs add a summary and a timings log."""
    result_rows = [row for row in rows if isinstance(row, ResultRow)]
    if result_rows and not config.include_timings:
        emitted: Sequence[RowModel] = [row.model_copy(update={"wall_ms": 0.0}) for row in result_rows]
    else:
        emitted = rows

    write_rows(out, emitted, row_type=type(rows[0]) if rows else ResultRow)
    write_jsonl(companion_path(out, ".jsonl"), emitted)
    if result_rows:
        write_jsonl(
            companion_path(out, ".timings.jsonl"),
            [{"mode": r.mode, "q": r.q, "T": r.T, "seed": r.seed, "wall_ms": r.wall_ms} for r in result_rows],
        )
        summary = aggregate(result_rows, z_true=config.z_true)
        write_summary(companion_path(out, ".summary.csv"), summary)
        for item in summary:
            spread = "" if item.std is None else f" +/- {item.std:.4f}"
            print(f"{item.mode} q={item.q:g} T={item.T}: {item.mean:.4f}{spread}")
    print(out)


def _run_selftest() -> int:
    checks = selftest()
    for check in checks:
        print(f"{'PASS' if check.passed else 'FAIL'} {check.name}: {check.detail}")
    return EXIT_OK if all(check.passed for check in checks) else EXIT_NUMERICAL_FAILURE


def run_command(args: argparse.Namespace) -> int:
    if args.command == "selftest":
        return _run_selftest()

    config = load_experiment_config(_config_source(args))
    if args.seed is not None:
        config = config.with_seed(args.seed)
    threads = get_settings().default_threads if args.threads is None else args.threads
    rows = run_experiment(config, threads=threads)
    write_outputs(config, rows, resolve_output_path(args.out, config.name))
    return EXIT_OK


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    configure_logging(quiet=args.quiet)
    try:
        return run_command(args)
    except CONFIG_ERRORS as exc:
        logger.error("Configuration error: %s", exc)
        return EXIT_CONFIG_ERROR
    except FileNotFoundError as exc:
        logger.error("Missing file: %s", exc)
        return EXIT_CONFIG_ERROR
    except NumericalFailureError as exc:
        logger.error("Numerical failure: %s", exc)
        return EXIT_NUMERICAL_FAILURE


if __name__ == "__main__":
    raise SystemExit(main())
