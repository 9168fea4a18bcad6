"""
Report generation module.

Collects tables and key/value sections from a command and renders them as
an aligned text table, CSV or JSON.
"""
from __future__ import annotations

import csv
import io
import json
import logging
import math
from dataclasses import dataclass, field
from decimal import ROUND_HALF_UP, Decimal
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

import numpy as np

try:
    from config.defaults import OUTPUT_DECIMALS, OUTPUT_FORMATS
except ImportError:
    from ..config.defaults import OUTPUT_DECIMALS, OUTPUT_FORMATS

logger = logging.getLogger(__name__)


def round_half_away(x: float, decimals: int = OUTPUT_DECIMALS) -> float:
    """
    Round half away from zero on the shortest decimal representation.

    Example:
        >>> round_half_away(0.19785)
        0.1979
        >>> round_half_away(-2.5, 0)
        -3.0
    """
    if not math.isfinite(x):
        return x
    quantum = Decimal(1).scaleb(-decimals)
    return float(Decimal(repr(float(x))).quantize(quantum, rounding=ROUND_HALF_UP))


def format_fixed(x: float, decimals: int = OUTPUT_DECIMALS) -> str:
    """
    Fixed-point text with the leading zero dropped below 1 (".1978", "1.0000").
    """
    if not math.isfinite(x):
        return str(x)
    text = f"{round_half_away(x, decimals):.{decimals}f}"
    if text.startswith("0."):
        return text[1:]
    if text.startswith("-0."):
        return "-" + text[2:]
    return text


def _plain(value: Any) -> Any:
    """Convert numpy scalars and arrays into JSON-compatible values."""
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, dict):
        return {str(k): _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    return value


@dataclass
class TableSection:
    name: str
    columns: List[str]
    rows: List[List[Any]]


@dataclass
class MappingSection:
    name: Optional[str]
    data: Dict[str, Any] = field(default_factory=dict)


class ReportWriter:
    """
    Builds a report from table and mapping sections.

    Mapping sections without a name are merged into the top level of JSON
    output; CSV output carries table sections only.
    """

    def __init__(self, decimals: int = OUTPUT_DECIMALS):
        self.decimals = decimals
        self.title: Optional[str] = None
        self._sections: Optional[List[Any]] = None

    def create_report(self, title: str) -> None:
        self.title = title
        self._sections = []
        logger.debug(f"Report created: {title}")

    def _require(self) -> List[Any]:
        if self._sections is None:
            raise RuntimeError("Report not initialized. Call create_report() first.")
        return self._sections

    def add_table(self, name: str, columns: Sequence[str], rows: Sequence[Sequence[Any]]) -> None:
        sections = self._require()
        rows = [list(row) for row in rows]
        for row in rows:
            if len(row) != len(columns):
                raise ValueError(f"Row {row} does not match columns {list(columns)}")
        sections.append(TableSection(name=name, columns=list(columns), rows=rows))

    def add_mapping(self, data: Dict[str, Any], name: Optional[str] = None) -> None:
        self._require().append(MappingSection(name=name, data=dict(data)))

    @property
    def section_count(self) -> int:
        return len(self._sections or [])

    # =========================================================================
    # Rendering
    # =========================================================================
    def render(self, fmt: str) -> str:
        if fmt not in OUTPUT_FORMATS:
            raise ValueError(f"Unknown output format: {fmt}")
        self._require()
        if fmt == "json":
            return self._render_json()
        if fmt == "csv":
            return self._render_csv()
        return self._render_table()

    def _cell(self, value: Any) -> str:
        if value is None:
            return ""
        if isinstance(value, (bool, np.bool_)):
            return str(bool(value)).lower()
        if isinstance(value, (int, np.integer)):
            return str(int(value))
        if isinstance(value, (float, np.floating)):
            return format_fixed(float(value), self.decimals)
        return str(value)

    def _render_table(self) -> str:
        lines: List[str] = []
        if self.title:
            lines.append(self.title)
            lines.append("=" * len(self.title))
        for section in self._sections:
            if lines:
                lines.append("")
            if isinstance(section, TableSection):
                lines.append(section.name)
                cells = [[self._cell(v) for v in row] for row in section.rows]
                widths = [
                    max([len(col)] + [len(row[c]) for row in cells])
                    for c, col in enumerate(section.columns)
                ]
                lines.append("  ".join(col.rjust(w) for col, w in zip(section.columns, widths)))
                lines.append("  ".join("-" * w for w in widths))
                for row in cells:
                    lines.append("  ".join(v.rjust(w) for v, w in zip(row, widths)))
            else:
                if section.name:
                    lines.append(section.name)
                width = max((len(k) for k in section.data), default=0)
                for key, value in section.data.items():
                    text = json.dumps(_plain(value)) if isinstance(value, (dict, list, tuple)) else self._cell(value)
                    lines.append(f"{key.ljust(width)}  {text}")
        return "\n".join(lines) + "\n"

    def _render_csv(self) -> str:
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        first = True
        for section in self._sections:
            if not isinstance(section, TableSection):
                continue
            if not first:
                buffer.write("\n")
            first = False
            writer.writerow(section.columns)
            for row in section.rows:
                writer.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in row])
        return buffer.getvalue()

    def _render_json(self) -> str:
        document: Dict[str, Any] = {}
        for section in self._sections:
            if isinstance(section, TableSection):
                document[section.name] = [dict(zip(section.columns, row)) for row in section.rows]
            elif section.name:
                document[section.name] = section.data
            else:
                document.update(section.data)
        return json.dumps(_plain(document), indent=2, ensure_ascii=False) + "\n"

    def save(self, output_path: Path, fmt: str) -> None:
        """
        Write the rendered report to a file.

        Raises:
            IOError: If the file cannot be written.
        """
        text = self.render(fmt)
        try:
            output_path = Path(output_path)
            output_path.parent.mkdir(parents=True, exist_ok=True)
            output_path.write_text(text, encoding="utf-8")
            logger.info(f"Report saved to: {output_path}")
        except OSError as e:
            logger.error(f"Failed to save report: {e}")
            raise IOError(f"Failed to save report: {e}") from e
