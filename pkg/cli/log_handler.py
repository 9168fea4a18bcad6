"""
Logging handler that forwards numerical diagnostics to a callback.

Commands use it to collect the warnings raised while they compute and
attach them to JSON reports.
"""
from __future__ import annotations

import logging
from contextlib import contextmanager
from typing import Callable, Iterator, List

DIAGNOSTIC_LOGGERS = ("core",)


class DiagnosticsLogHandler(logging.Handler):
    """
    Logging handler that forwards messages to a callback.
    """

    def __init__(self, callback: Callable[[str], None]):
        """
        Initialize the handler.

        Args:
            callback: Function to call with each formatted message.
        """
        super().__init__()
        self.callback = callback
        self.setFormatter(logging.Formatter("%(name)s: %(message)s"))

    def emit(self, record: logging.LogRecord) -> None:
        """
        Emit a log record.

        Args:
            record: Log record to emit.
        """
        try:
            msg = self.format(record)
            self.callback(msg)
        except Exception:
            self.handleError(record)


def setup_logger(
    name: str,
    callback: Callable[[str], None],
    level: int = logging.WARNING,
) -> DiagnosticsLogHandler:
    """
    Attach a callback handler to a logger without disturbing propagation.

    Args:
        name: Logger name (typically a package name).
        callback: Function to receive formatted messages.
        level: Minimum level forwarded (default: WARNING).

    Returns:
        The attached handler, for later removal.
    """
    logger = logging.getLogger(name)
    handler = DiagnosticsLogHandler(callback)
    handler.setLevel(level)
    logger.addHandler(handler)
    return handler


@contextmanager
def capture_diagnostics(level: int = logging.WARNING) -> Iterator[List[str]]:
    """
    Collect warnings emitted by the library while the block runs.

    Example:
        ```python
        with capture_diagnostics() as warnings:
            result = analyze_absorption(params, N)
        report["warnings"] = warnings
        ```
    """
    collected: List[str] = []
    handlers = [(name, setup_logger(name, collected.append, level)) for name in DIAGNOSTIC_LOGGERS]
    try:
        yield collected
    finally:
        for name, handler in handlers:
            logging.getLogger(name).removeHandler(handler)
