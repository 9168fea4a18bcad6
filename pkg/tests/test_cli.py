from __future__ import annotations

import json
import subprocess
import sys
from pathlib import Path

import pytest

from cli.app_layout import build_parser, run
from cli.commands.common import PARAMETRIC_SUBCOMMANDS, split_values
from config.defaults import EXIT_OK, EXIT_VALIDATION

ROOT = Path(__file__).resolve().parent.parent
ROULETTE_FLAGS = ["--p", "12/38", "6/38", "--q", "13/38", "7/38"]


@pytest.fixture
def cli(tmp_path, capsys):
    """run() against a throwaway settings file; returns (exit code, stdout)."""
    settings = tmp_path / "settings.json"

    def invoke(*argv: str):
        code = run(["--settings-file", str(settings), *argv])
        return code, capsys.readouterr().out

    return invoke


def test_split_values_accepts_commas() -> None:
    assert split_values(["1/2,1/4", "1/8"]) == ["1/2", "1/4", "1/8"]


def test_no_command_prints_help(cli) -> None:
    code, out = cli()
    assert code == EXIT_VALIDATION
    assert "COMMAND" in out


def test_parser_knows_every_command() -> None:
    parser = build_parser()
    for command in ("absorb", "stationary", "classify", "simulate", "verify", "bench", "roulette", "config"):
        assert parser.parse_args([command]).command == command


@pytest.mark.parametrize("command", PARAMETRIC_SUBCOMMANDS)
def test_parametric_commands_need_a_leap(cli, command) -> None:
    code, _ = cli(command)
    assert code == EXIT_VALIDATION


def test_roulette_check_passes(cli) -> None:
    code, out = cli("roulette", "--check")
    assert code == EXIT_OK
    assert "N=25" in out
    assert ".5445" in out


def test_roulette_json(cli) -> None:
    code, out = cli("roulette", "--N-list", "5", "--format", "json")
    assert code == EXIT_OK
    document = json.loads(out)
    assert round(document["u"]["5"][2], 4) == 0.5445
    assert document["warnings"] == []


def test_absorb_csv_header(cli) -> None:
    code, out = cli("absorb", *ROULETTE_FLAGS, "--N", "5", "--format", "csv")
    assert code == EXIT_OK
    lines = out.splitlines()
    assert lines[0] == "i,u,v"
    assert len(lines) == 7


def test_absorb_json_round_trips_params(cli, tmp_path) -> None:
    code, first = cli("absorb", *ROULETTE_FLAGS, "--N", "10", "--format", "json")
    assert code == EXIT_OK
    document = json.loads(first)
    assert document["params"] == {"p": ["6/19", "3/19"], "q": ["13/38", "7/38"], "hold": "0"}

    params_file = tmp_path / "params.json"
    params_file.write_text(json.dumps(document["params"]), encoding="utf-8")
    code, second = cli("absorb", "--params", str(params_file), "--N", "10", "--format", "json")
    assert code == EXIT_OK
    assert second == first


def test_output_file(cli, tmp_path) -> None:
    target = tmp_path / "reports" / "absorb.json"
    code, out = cli("absorb", *ROULETTE_FLAGS, "--N", "5", "--format", "json", "--output", str(target))
    assert code == EXIT_OK
    assert out == ""
    assert json.loads(target.read_text(encoding="utf-8"))["N"] == 5


@pytest.mark.parametrize(
    "argv",
    [
        ["absorb", "--N", "5"],
        ["absorb", *ROULETTE_FLAGS, "--params", "leap.json", "--N", "5"],
        ["absorb", "--p", "1/2", "--q", "1/3", "--N", "5"],
        ["absorb", "--p", "1/2", "--N", "5"],
        ["absorb", *ROULETTE_FLAGS, "--N", "3"],
        ["absorb", *ROULETTE_FLAGS],
        ["stationary", "--p", "7/38", "13/38", "--q", "6/38", "12/38", "--one-sided"],
        ["stationary", *ROULETTE_FLAGS, "--one-sided", "--N", "10"],
        ["absorb", "--p", "1/2", "--q", "1/2", "--N", "5", "--format", "xml"],
        ["bench", "--k", "9"],
        ["bench", "--N-list", "100", "50"],
    ],
)
def test_validation_exit_code(cli, argv) -> None:
    code, _ = cli(*argv)
    assert code == EXIT_VALIDATION


def test_missing_params_file(cli, tmp_path) -> None:
    code, _ = cli("absorb", "--params", str(tmp_path / "missing.json"), "--N", "5")
    assert code == EXIT_VALIDATION


def test_stationary_two_sided_table(cli) -> None:
    code, out = cli("stationary", "--p", "1/2", "--q", "1/2", "--N", "4")
    assert code == EXIT_OK
    assert out.count(".2000") == 5


def test_stationary_limit_check(cli) -> None:
    code, out = cli("stationary", "--p", "2/5", "--q", "3/5", "--limit-check", "--N-list", "10", "20", "--format", "json")
    assert code == EXIT_OK
    document = json.loads(out)
    assert document["N"] == [10, 20]
    assert document["monotone"] is True


def test_classify(cli) -> None:
    code, out = cli("classify", *ROULETTE_FLAGS, "--format", "json")
    assert code == EXIT_OK
    assert json.loads(out)["verdict"] == "transient_left"


def test_simulate_table(cli) -> None:
    code, out = cli("simulate", *ROULETTE_FLAGS, "--N", "5", "--start", "3", "--paths", "2000", "--seed", "1")
    assert code == EXIT_OK
    assert "estimates" in out
    assert "Philox" in out


def test_verify_roulette(cli) -> None:
    code, out = cli("verify", *ROULETTE_FLAGS, "--N", "10", "--paths", "20000", "--seed", "11", "--workers", "2")
    assert code == EXIT_OK
    document = json.loads(out)
    assert document["passed"] is True
    assert document["max_abs_dev_u"] <= 1e-8
    assert document["mc"]["worker_count"] == 2


def test_verify_near_critical_jump(cli) -> None:
    code, out = cli(
        "verify", "--p", "3/10", "1/5", "--q", "300001/1000000", "199999/1000000",
        "--N", "20", "--paths", "4000", "--seed", "5",
    )
    assert code == EXIT_OK
    document = json.loads(out)
    assert document["checks"]["det_vs_dense_v"] is True
    assert document["max_rel_dev_v"] <= 1e-8
    assert any("Near-critical" in message for message in document["warnings"])


def test_verify_needs_interior_start(cli) -> None:
    code, _ = cli("verify", *ROULETTE_FLAGS, "--N", "10", "--start", "0", "--paths", "10")
    assert code == EXIT_VALIDATION


def test_bench_small(cli) -> None:
    code, out = cli("bench", "--N-list", "50", "200", "--repeats", "2", "--seed", "3")
    assert code == EXIT_OK
    lines = out.splitlines()
    assert lines[0] == "N,t_determinant,t_dense,dense_status,rss_mb"
    assert len(lines) == 3
    assert lines[1].split(",")[3] == "ok"


def test_bench_skip_dense(cli) -> None:
    code, out = cli("bench", "--N-list", "100", "--repeats", "1", "--skip-dense", "--format", "json")
    assert code == EXIT_OK
    row = json.loads(out)["timings"][0]
    assert row["t_dense"] is None
    assert row["dense_status"] == "skipped: --skip-dense"


def test_config_set_and_show(cli, tmp_path) -> None:
    code, _ = cli("config", "--set", "seed=7", "--set", "output_format=json")
    assert code == EXIT_OK
    code, out = cli("config", "--show")
    assert code == EXIT_OK
    document = json.loads(out)
    assert document["seed"] == 7
    assert document["path"] == str(tmp_path / "settings.json")


def test_config_rejects_bad_values(cli) -> None:
    assert cli("config", "--set", "n_paths=0")[0] == EXIT_VALIDATION
    assert cli("config", "--set", "colour=blue")[0] == EXIT_VALIDATION
    assert cli("config", "--set", "seed")[0] == EXIT_VALIDATION
    code, out = cli("config", "--show")
    assert code == EXIT_OK
    assert "n_paths" in out


def test_stored_format_is_used(cli) -> None:
    cli("config", "--set", "output_format=csv")
    code, out = cli("classify", *ROULETTE_FLAGS)
    assert code == EXIT_OK
    assert out.splitlines()[0].startswith("verdict")


@pytest.mark.slow
def test_main_module_smoke(tmp_path) -> None:
    completed = subprocess.run(
        [sys.executable, "main.py", "--settings-file", str(tmp_path / "s.json"), "roulette", "--N-list", "5"],
        cwd=ROOT,
        capture_output=True,
        text=True,
        timeout=120,
    )
    assert completed.returncode == 0
    assert ".1978" in completed.stdout
