from __future__ import annotations

import json

import numpy as np
import pytest

from core.report_writer import ReportWriter, format_fixed, round_half_away


@pytest.mark.parametrize(
    "x, expected",
    [(0.19785, 0.1979), (0.12345, 0.1235), (-0.00005, -0.0001), (3.60185, 3.6019), (1.0, 1.0)],
)
def test_round_half_away(x, expected) -> None:
    assert round_half_away(x) == expected


def test_round_half_away_passes_non_finite() -> None:
    assert np.isnan(round_half_away(float("nan")))
    assert round_half_away(float("inf")) == float("inf")


@pytest.mark.parametrize(
    "x, text",
    [(0.19784, ".1978"), (1.0, "1.0000"), (-0.25, "-.2500"), (2.67644, "2.6764"), (0.0, ".0000")],
)
def test_format_fixed(x, text) -> None:
    assert format_fixed(x) == text


def _sample() -> ReportWriter:
    writer = ReportWriter()
    writer.create_report("Sample")
    writer.add_mapping({"N": 5, "method": "determinant"})
    writer.add_table("absorption", ["i", "u"], [[1, 0.19784], [2, np.float64(0.35412)]])
    writer.add_mapping({"passed": True}, name="check")
    return writer


def test_render_table() -> None:
    text = _sample().render("table")
    lines = text.splitlines()
    assert lines[0] == "Sample"
    assert "method  determinant" in text
    assert "1  .1978" in text
    assert "2  .3541" in text
    assert "passed  true" in text


def test_render_csv_keeps_full_precision() -> None:
    text = _sample().render("csv")
    assert text.splitlines() == ["i,u", "1,0.19784", "2,0.35412"]


def test_render_json() -> None:
    document = json.loads(_sample().render("json"))
    assert document["N"] == 5
    assert document["absorption"] == [{"i": 1, "u": 0.19784}, {"i": 2, "u": 0.35412}]
    assert document["check"] == {"passed": True}


def test_row_width_is_checked() -> None:
    writer = ReportWriter()
    writer.create_report("Bad")
    with pytest.raises(ValueError):
        writer.add_table("t", ["a", "b"], [[1]])


def test_unknown_format() -> None:
    with pytest.raises(ValueError):
        _sample().render("xml")


def test_sections_need_a_report() -> None:
    writer = ReportWriter()
    with pytest.raises(RuntimeError):
        writer.add_mapping({"a": 1})
    assert writer.section_count == 0


def test_save_creates_parent_dirs(tmp_path) -> None:
    target = tmp_path / "out" / "report.json"
    _sample().save(target, "json")
    assert json.loads(target.read_text(encoding="utf-8"))["method"] == "determinant"


def test_decimals_are_configurable() -> None:
    writer = ReportWriter(decimals=6)
    writer.create_report("Timing")
    writer.add_table("bench", ["t"], [[0.0012345]])
    assert ".001235" in writer.render("table")
