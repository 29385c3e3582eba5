from __future__ import annotations

import json

import pytest
from click.testing import CliRunner

from wulffcap import SCHEMA_VERSION, __version__
from wulffcap.cli import main


@pytest.fixture
def invoke(tmp_path):
    runner = CliRunner()

    def _invoke(*args: str):
        return runner.invoke(main, ["--config", str(tmp_path / "config.yaml"), "--no-banner", *args])

    return _invoke


def test_version(invoke):
    result = invoke("--version")
    assert result.exit_code == 0
    assert f"wulffcap {__version__}" in result.output


def test_list_shows_the_catalog(invoke):
    result = invoke("list")
    assert result.exit_code == 0
    assert "hsiung-minkowski" in result.output
    assert "capillary-wulff" in result.output


def test_unknown_check_is_a_usage_error(invoke):
    result = invoke("verify", "bogus")
    assert result.exit_code == 2
    assert "hsiung-minkowski" in result.output


def test_bad_tolerance_override(invoke):
    result = invoke("verify", "support-constancy", "--tol", "identity")
    assert result.exit_code == 2
    assert "KEY=VALUE" in result.output


def test_verify_writes_a_report(invoke, tmp_path):
    path = tmp_path / "out.json"
    result = invoke("verify", "support-constancy", "--surface", "capillary-wulff", "--level", "3", "--report", str(path))
    assert result.exit_code == 0, result.output
    payload = json.loads(path.read_text())
    assert payload["schema_version"] == SCHEMA_VERSION
    assert payload["run"]["target"] == "support-constancy"
    assert payload["run"]["level"] == 3
    assert payload["summary"] == {"checks": 1, "passed": 1, "failed": 0}


def test_solve_minkowski1d(invoke, tmp_path):
    path = tmp_path / "solve.json"
    result = invoke("solve", "minkowski1d", "--p", "3", "--N", "64", "--report", str(path))
    assert result.exit_code == 0, result.output
    payload = json.loads(path.read_text())
    assert payload["run"]["command"] == "solve minkowski1d"
    assert len(payload["result"]["u"]) == 65


def test_verify_all_passes_at_default_level(invoke, tmp_path):
    path = tmp_path / "all.json"
    result = invoke("verify", "all", "--level", "4", "--report", str(path))
    assert result.exit_code == 0, result.output
    payload = json.loads(path.read_text())
    failed = [(r["check"], r["case"], r["verdict"]) for r in payload["reports"] if r["verdict"] != "pass"]
    assert failed == []
    assert payload["summary"]["failed"] == 0


def test_banner_reports_the_level(tmp_path):
    result = CliRunner().invoke(
        main, ["--config", str(tmp_path / "config.yaml"), "verify", "support-constancy", "--level", "3"]
    )
    assert result.exit_code == 0, result.output
    assert "level 3" in result.output
