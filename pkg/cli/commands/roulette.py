"""
roulette subcommand: the column bet of American roulette as a random jump.

Betting on a column of the wheel and, on loss, covering the other two
columns gives net wins of +2 (6/38) and +1 (12/38) and losses of -1 (13/38)
and -2 (7/38). The published tables list u_i and v_i for i = 1..N.
"""
from __future__ import annotations

import argparse
import json
import logging
from dataclasses import dataclass, field
from typing import Dict, List

try:
    from config.defaults import EXIT_OK, EXIT_TOLERANCE, GOLDEN_TABLES_PATH, GOLDEN_TOL, ROULETTE_N_LIST
    from core.absorbing import AbsorptionResult, analyze_absorption
    from core.errors import ShapeMismatch
    from core.leap_model import roulette_params
    from core.report_writer import ReportWriter, round_half_away
    from utils.system import resource_path
except ImportError:
    from ...config.defaults import EXIT_OK, EXIT_TOLERANCE, GOLDEN_TABLES_PATH, GOLDEN_TOL, ROULETTE_N_LIST
    from ...core.absorbing import AbsorptionResult, analyze_absorption
    from ...core.errors import ShapeMismatch
    from ...core.leap_model import roulette_params
    from ...core.report_writer import ReportWriter, round_half_away
    from ...utils.system import resource_path
from .common import RunConfig, emit, parse_int_list

logger = logging.getLogger(__name__)


@dataclass
class GoldenCheck:
    compared: int = 0
    skipped: int = 0
    failures: List[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.failures

    def to_dict(self) -> Dict[str, object]:
        return {
            "compared": self.compared,
            "skipped": self.skipped,
            "failures": list(self.failures),
            "passed": self.passed,
        }


def load_golden_tables() -> dict:
    """
    Read the bundled golden tables.

    Raises:
        FileNotFoundError: If the data file is missing from the bundle.
    """
    path = resource_path(GOLDEN_TABLES_PATH)
    if not path.exists():
        raise FileNotFoundError(f"Golden tables not found: {path}")
    with open(path, "r", encoding="utf-8") as f:
        return json.load(f)


def check_against_golden(results: Dict[int, AbsorptionResult], golden: dict) -> GoldenCheck:
    """Compare 4-decimal rounded u_i and v_i with the published values."""
    misprints = {(m["table"], m["N"], m["i"]) for m in golden.get("misprints", [])}
    check = GoldenCheck()
    for N, result in results.items():
        for table, values in (("u", result.u), ("v", result.v)):
            printed = golden[table].get(str(N))
            if printed is None:
                logger.info(f"No golden {table} column for N={N}")
                continue
            for i, expected in enumerate(printed, start=1):
                if (table, N, i) in misprints:
                    logger.warning(
                        f"Skipping known misprint {table}_{i} at N={N} "
                        f"(printed {expected}, computed {round_half_away(float(values[i])):.4f})"
                    )
                    check.skipped += 1
                    continue
                got = round_half_away(float(values[i]))
                check.compared += 1
                if abs(got - expected) > GOLDEN_TOL:
                    message = f"{table}_{i} at N={N}: computed {got:.4f}, published {expected:.4f}"
                    logger.error(message)
                    check.failures.append(message)
    return check


def _wide_table(results: Dict[int, AbsorptionResult], attr: str) -> List[list]:
    longest = max(results)
    rows = []
    for i in range(1, longest + 1):
        row: list = [i]
        for N, result in results.items():
            row.append(float(getattr(result, attr)[i]) if i <= N else None)
        rows.append(row)
    return rows


def cmd_roulette(config: RunConfig, args: argparse.Namespace) -> int:
    """
    u_i and v_i tables for the column bet, optionally checked against the
    published values.
    """
    n_list = parse_int_list(args.N_list) or list(ROULETTE_N_LIST)
    if not n_list:
        raise ShapeMismatch("--N-list must not be empty")
    params = roulette_params()
    results = {N: analyze_absorption(params, N, extended_precision=config.extended_precision) for N in n_list}

    check = check_against_golden(results, load_golden_tables()) if args.check else None

    writer = ReportWriter()
    writer.create_report("Column bet on American roulette")
    if config.output_format == "json":
        writer.add_mapping(
            {
                "params": params.to_dict(),
                "u": {str(N): r.u[1:].tolist() for N, r in results.items()},
                "v": {str(N): r.v[1:].tolist() for N, r in results.items()},
            }
        )
    elif config.output_format == "csv":
        writer.add_table(
            "absorption",
            ["N", "i", "u", "v"],
            [[N, i, float(r.u[i]), float(r.v[i])] for N, r in results.items() for i in range(1, N + 1)],
        )
    else:
        columns = ["i"] + [f"N={N}" for N in results]
        writer.add_table("u_i (probability of reaching N)", columns, _wide_table(results, "u"))
        writer.add_table("v_i (expected number of bets)", columns, _wide_table(results, "v"))
    if check is not None:
        writer.add_mapping(check.to_dict(), name="check")
    emit(writer, config)

    if check is not None and not check.passed:
        return EXIT_TOLERANCE
    return EXIT_OK
