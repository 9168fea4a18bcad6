"""
Random Leap Analyzer

Application entry point.
Absorption probabilities, expected absorption times and stationary
distributions of random leaps, with dense and Monte Carlo cross-checks.
"""
from __future__ import annotations

import logging
import sys

from cli.app_layout import run

# Configure root logger; stdout is reserved for reports
logging.basicConfig(
    level=logging.INFO,
    format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
    datefmt="%H:%M:%S",
    stream=sys.stderr,
)

logger = logging.getLogger(__name__)


def main() -> int:
    """
    Command line main function.

    Returns:
        Process exit code.
    """
    return run(sys.argv[1:])


if __name__ == "__main__":
    sys.exit(main())
