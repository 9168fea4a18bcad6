"""
Command line layout: argument parser, subcommand dispatch and exit codes.

Every subcommand is a ``cmd_*(config, args) -> int`` function in
``cli.commands``. ``run`` is the single place where library exceptions are
mapped to process exit codes.
"""
from __future__ import annotations

import argparse
import logging
from pathlib import Path
from typing import Callable, Dict, Optional, Sequence

try:
    from config.defaults import APP_NAME, APP_VERSION, EXIT_VALIDATION, OUTPUT_FORMATS
    from config.settings_manager import SettingsManager
    from core.errors import LeapError
    from cli.commands.analysis import cmd_absorb, cmd_classify, cmd_stationary
    from cli.commands.bench import cmd_bench
    from cli.commands.common import RunConfig, build_run_config
    from cli.commands.config_command import cmd_config
    from cli.commands.oracle_commands import cmd_simulate, cmd_verify
    from cli.commands.roulette import cmd_roulette
    from cli.log_handler import capture_diagnostics
except ImportError:
    from ..config.defaults import APP_NAME, APP_VERSION, EXIT_VALIDATION, OUTPUT_FORMATS
    from ..config.settings_manager import SettingsManager
    from ..core.errors import LeapError
    from .commands.analysis import cmd_absorb, cmd_classify, cmd_stationary
    from .commands.bench import cmd_bench
    from .commands.common import RunConfig, build_run_config
    from .commands.config_command import cmd_config
    from .commands.oracle_commands import cmd_simulate, cmd_verify
    from .commands.roulette import cmd_roulette
    from .log_handler import capture_diagnostics

logger = logging.getLogger(__name__)

CommandHandler = Callable[[RunConfig, argparse.Namespace], int]

COMMANDS: Dict[str, CommandHandler] = {
    "absorb": cmd_absorb,
    "stationary": cmd_stationary,
    "classify": cmd_classify,
    "simulate": cmd_simulate,
    "verify": cmd_verify,
    "bench": cmd_bench,
    "roulette": cmd_roulette,
    "config": cmd_config,
}


# =============================================================================
# Parser
# =============================================================================
def _params_parent() -> argparse.ArgumentParser:
    parent = argparse.ArgumentParser(add_help=False)
    group = parent.add_argument_group("leap parameters (give --p/--q or --params)")
    group.add_argument("--p", nargs="+", metavar="P", help="Rightward step probabilities p_1..p_k, e.g. 12/38 6/38")
    group.add_argument("--q", nargs="+", metavar="Q", help="Leftward step probabilities q_1..q_k")
    group.add_argument("--hold", help="Self-transition probability (default 0)")
    group.add_argument("--params", type=Path, metavar="FILE", help='JSON file {"p": [...], "q": [...], "hold": ...}')
    return parent


def _output_parent() -> argparse.ArgumentParser:
    parent = argparse.ArgumentParser(add_help=False)
    parent.add_argument("--format", choices=OUTPUT_FORMATS, default=None, help="Output format (default: table)")
    parent.add_argument("--output", type=Path, default=None, help="Write the report to this file instead of stdout")
    return parent


def _precision_parent() -> argparse.ArgumentParser:
    parent = argparse.ArgumentParser(add_help=False)
    parent.add_argument(
        "--extended-precision",
        action=argparse.BooleanOptionalAction,
        default=None,
        help="Allow the extended precision root retry (default: on)",
    )
    return parent


def _simulation_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--N", type=int, help="Upper barrier")
    parser.add_argument("--start", type=int, help="Starting state (default N//2 for absorbing chains)")
    parser.add_argument("--paths", type=int, help="Number of simulated paths")
    parser.add_argument("--seed", type=int, help="Random seed")
    parser.add_argument("--workers", type=int, help="Worker threads (each owns a substream)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="random-leap",
        description=f"{APP_NAME}: absorption, stationary distributions and oracles for random leaps",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {APP_VERSION}")
    verbosity = parser.add_mutually_exclusive_group()
    verbosity.add_argument("-v", "--verbose", action="store_true", help="Log debug messages")
    verbosity.add_argument("--quiet", action="store_true", help="Log errors only")
    parser.add_argument("--settings-file", type=Path, default=None, help="Settings JSON to use instead of the per-user file")

    params, output, precision = _params_parent(), _output_parent(), _precision_parent()
    sub = parser.add_subparsers(dest="command", metavar="COMMAND")

    absorb = sub.add_parser("absorb", parents=[params, output, precision], help="Absorption probabilities and times")
    absorb.add_argument("--N", type=int, help="Upper barrier")
    absorb.add_argument("--method", choices=("auto", "determinant"), default="auto")

    stationary = sub.add_parser(
        "stationary", parents=[params, output, precision], help="Stationary distribution of a reflecting leap"
    )
    stationary.add_argument("--N", type=int, help="Upper barrier of the two-sided chain")
    stationary.add_argument("--one-sided", action="store_true", help="Reflect at 0 only")
    stationary.add_argument("--tail-tol", type=float, help="Relative tail tolerance for the one-sided sum")
    stationary.add_argument("--limit-check", action="store_true", help="Compare two-sided results with the one-sided limit")
    stationary.add_argument("--N-list", nargs="+", help="Barriers for --limit-check (default 20 40 80)")

    sub.add_parser("classify", parents=[params, output], help="Transience or recurrence of the free leap")

    simulate = sub.add_parser("simulate", parents=[params, output], help="Monte Carlo oracle")
    _simulation_args(simulate)
    simulate.add_argument("--mode", choices=("absorbing", "reflecting", "one-sided"), default="absorbing")
    simulate.add_argument("--horizon", type=int, help="Step budget per path")

    verify = sub.add_parser(
        "verify", parents=[params, output, precision], help="Determinant path against dense and Monte Carlo oracles"
    )
    _simulation_args(verify)

    bench = sub.add_parser("bench", parents=[output], help="Determinant vs dense timings")
    bench.add_argument("--k", type=int, default=2, help="Maximum step size of the random leap")
    bench.add_argument("--N-list", nargs="+", help="Ascending barriers (default 100 10000 1000000)")
    bench.add_argument("--seed", type=int, help="Seed for the random leap")
    bench.add_argument("--repeats", type=int, default=5, help="Timing repeats, best kept")
    bench.add_argument("--skip-dense", action="store_true", help="Time the determinant path only")

    roulette = sub.add_parser("roulette", parents=[output, precision], help="Column bet tables")
    roulette.add_argument("--N-list", nargs="+", help="Barriers (default 5 10 15 20 25)")
    roulette.add_argument("--check", action="store_true", help="Compare with the published tables")

    config = sub.add_parser("config", parents=[output], help="Show or change stored defaults")
    config.add_argument("--show", action="store_true", help="Print the stored settings")
    config.add_argument("--set", action="append", default=[], metavar="KEY=VALUE", help="Store a default")
    return parser


# =============================================================================
# Dispatch
# =============================================================================
def _configure_verbosity(verbose: bool, quiet: bool) -> None:
    root = logging.getLogger()
    if verbose:
        root.setLevel(logging.DEBUG)
        for handler in root.handlers:
            handler.setLevel(logging.DEBUG)
    elif quiet:
        for handler in root.handlers:
            handler.setLevel(logging.ERROR)


def run(argv: Optional[Sequence[str]] = None) -> int:
    """
    Parse arguments, run one subcommand and return its exit code.

    Returns:
        0 on success, 2 on validation errors, 3 on numerical tolerance
        failures, 4 on ill-conditioned problems.
    """
    parser = build_parser()
    try:
        args = parser.parse_args(list(argv) if argv is not None else None)
    except SystemExit as e:
        return int(e.code) if isinstance(e.code, int) else EXIT_VALIDATION
    if args.command is None:
        parser.print_help()
        return EXIT_VALIDATION

    _configure_verbosity(args.verbose, args.quiet)
    handler = COMMANDS[args.command]
    try:
        manager = SettingsManager(args.settings_file)
        with capture_diagnostics() as warnings:
            config = build_run_config(args, manager)
            config.warnings = warnings
            code = handler(config, args)
        logger.debug(f"{args.command} finished with exit code {code}")
        return code
    except LeapError as e:
        logger.error(f"{type(e).__name__}: {e}")
        return e.exit_code
    except OSError as e:
        logger.error(f"File error: {e}")
        return EXIT_VALIDATION
    except (ValueError, KeyError) as e:
        logger.error(f"Invalid input: {e}")
        return EXIT_VALIDATION
