from __future__ import annotations

import logging

from cli.log_handler import capture_diagnostics, setup_logger


def test_capture_collects_library_warnings() -> None:
    with capture_diagnostics() as warnings:
        logging.getLogger("core.absorbing").warning("Clamped 2 entries")
        logging.getLogger("core.absorbing").info("not collected")
        logging.getLogger("cli.commands").warning("outside the library")
    assert warnings == ["core.absorbing: Clamped 2 entries"]


def test_capture_detaches_handler() -> None:
    with capture_diagnostics() as warnings:
        pass
    logging.getLogger("core").warning("after the block")
    assert warnings == []


def test_setup_logger_level() -> None:
    received = []
    handler = setup_logger("core.test", received.append, level=logging.ERROR)
    try:
        log = logging.getLogger("core.test")
        log.warning("skipped")
        log.error("kept")
    finally:
        logging.getLogger("core.test").removeHandler(handler)
    assert received == ["core.test: kept"]
