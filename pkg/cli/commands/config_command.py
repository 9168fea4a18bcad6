"""
config subcommand: show or change stored run defaults.
"""
from __future__ import annotations

import argparse
import logging
from dataclasses import asdict
from typing import Dict, Sequence

try:
    from config.defaults import EXIT_OK
    from core.errors import ShapeMismatch
    from core.report_writer import ReportWriter
except ImportError:
    from ...config.defaults import EXIT_OK
    from ...core.errors import ShapeMismatch
    from ...core.report_writer import ReportWriter
from .common import RunConfig, emit

logger = logging.getLogger(__name__)


def parse_assignments(raw: Sequence[str]) -> Dict[str, str]:
    assignments: Dict[str, str] = {}
    for item in raw:
        key, sep, value = item.partition("=")
        if not sep or not key.strip():
            raise ShapeMismatch(f"Expected key=value, got {item!r}")
        assignments[key.strip()] = value.strip()
    return assignments


def cmd_config(config: RunConfig, args: argparse.Namespace) -> int:
    manager = config.settings_manager
    if args.set:
        previous = asdict(manager.settings)
        try:
            manager.update_from_strings(parse_assignments(args.set))
        except (KeyError, ValueError) as e:
            raise ShapeMismatch(f"Invalid setting: {e}") from e
        if not manager.settings.is_valid():
            manager.update(**previous)
            raise ShapeMismatch(f"Setting out of range: {', '.join(args.set)}")
        logger.info(f"Settings saved to {manager.path}")

    writer = ReportWriter()
    writer.create_report("Stored settings")
    writer.add_mapping({"path": str(manager.path), **asdict(manager.settings)})
    emit(writer, config)
    return EXIT_OK
