"""
Shared plumbing for subcommands: the resolved run configuration, parameter
sources and report output.
"""
from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional, Sequence

try:
    from config.settings_manager import Settings, SettingsManager
    from core.errors import ShapeMismatch
    from core.leap_model import LeapParams, load_params, validate
    from core.report_writer import ReportWriter
except ImportError:
    from ...config.settings_manager import Settings, SettingsManager
    from ...core.errors import ShapeMismatch
    from ...core.leap_model import LeapParams, load_params, validate
    from ...core.report_writer import ReportWriter

logger = logging.getLogger(__name__)

PARAMETRIC_SUBCOMMANDS = ("absorb", "stationary", "classify", "simulate", "verify")


@dataclass
class RunConfig:
    """Everything a subcommand needs after flags and stored settings are merged"""
    subcommand: str
    params: Optional[LeapParams] = None
    params_source: Optional[str] = None
    N: Optional[int] = None
    tail_tol: float = 0.0
    output_format: str = "table"
    seed: int = 0
    n_paths: int = 1
    worker_count: int = 1
    extended_precision: bool = True
    output: Optional[Path] = None
    settings_manager: Optional[SettingsManager] = field(default=None, repr=False)
    warnings: List[str] = field(default_factory=list)


def split_values(raw: Optional[Sequence[str]]) -> List[str]:
    """Accept both '--p 1/2 1/4' and '--p 1/2,1/4'."""
    values: List[str] = []
    for item in raw or ():
        values.extend(part.strip() for part in item.split(",") if part.strip())
    return values


def parse_int_list(raw: Optional[Sequence[str]]) -> List[int]:
    return [int(x) for x in split_values(raw)]


def resolve_params(args: argparse.Namespace) -> tuple[LeapParams, str]:
    """
    Read the leap from exactly one source.

    Raises:
        ShapeMismatch: Both or neither of --p/--q and --params were given.
    """
    inline = args.p is not None or args.q is not None
    from_file = args.params is not None
    if inline == from_file:
        raise ShapeMismatch("Give either --p and --q or --params, not both or neither")
    if from_file:
        return load_params(args.params), str(args.params)
    if args.p is None or args.q is None:
        raise ShapeMismatch("--p and --q must be given together")
    hold = args.hold if args.hold is not None else "0"
    return validate(split_values(args.p), split_values(args.q), hold), "inline"


def build_run_config(args: argparse.Namespace, manager: SettingsManager) -> RunConfig:
    """Merge flags over stored settings."""
    settings: Settings = manager.settings.merged(
        seed=getattr(args, "seed", None),
        n_paths=getattr(args, "paths", None),
        worker_count=getattr(args, "workers", None),
        tail_tol=getattr(args, "tail_tol", None),
        extended_precision=getattr(args, "extended_precision", None),
        output_format=getattr(args, "format", None),
    )
    if not settings.is_valid():
        raise ShapeMismatch(f"Invalid run options: {settings}")

    config = RunConfig(
        subcommand=args.command,
        N=getattr(args, "N", None),
        tail_tol=settings.tail_tol,
        output_format=settings.output_format,
        seed=settings.seed,
        n_paths=settings.n_paths,
        worker_count=settings.worker_count,
        extended_precision=settings.extended_precision,
        output=getattr(args, "output", None),
        settings_manager=manager,
    )
    if args.command in PARAMETRIC_SUBCOMMANDS:
        config.params, config.params_source = resolve_params(args)
    return config


def require_N(config: RunConfig) -> int:
    if config.N is None:
        raise ShapeMismatch(f"{config.subcommand} needs --N")
    return config.N


def emit(writer: ReportWriter, config: RunConfig) -> None:
    """Write the report to --output or stdout."""
    if config.output_format == "json":
        writer.add_mapping({"warnings": list(config.warnings)})
    if config.output is not None:
        writer.save(config.output, config.output_format)
        return
    sys.stdout.write(writer.render(config.output_format))
