"""
Command line package.

Contains the argument parser, subcommands and diagnostics capture.
"""
from .app_layout import build_parser, run
from .log_handler import DiagnosticsLogHandler, capture_diagnostics, setup_logger

__all__ = [
    "build_parser",
    "run",
    "DiagnosticsLogHandler",
    "capture_diagnostics",
    "setup_logger",
]
