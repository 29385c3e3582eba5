"""Tests for configuration loading, normalisation and persistence."""
from __future__ import annotations

import importlib

import pytest
import yaml


@pytest.fixture
def config_mod(tmp_path, monkeypatch):
    """Reimport ``wulffcap.config`` with an isolated config dir per test."""
    monkeypatch.setenv("WULFFCAP_CONFIG_DIR", str(tmp_path / "cfg"))
    import wulffcap.config as config

    importlib.reload(config)
    try:
        yield config
    finally:
        monkeypatch.delenv("WULFFCAP_CONFIG_DIR", raising=False)
        importlib.reload(config)


def test_load_creates_file_with_defaults(config_mod):
    cfg = config_mod.load_config()
    assert config_mod.CONFIG_FILE.exists()
    assert cfg.tolerances.identity == 1e-6
    assert cfg.tolerances.boundary == 1e-8
    assert cfg.ladder.levels == [3, 4, 5]
    assert cfg.solver.grid == 256


def test_save_load_roundtrip(config_mod):
    cfg = config_mod.load_config()
    cfg.tolerances.identity = 1e-7
    cfg.ladder.levels = [2, 3, 4, 5]
    cfg.output.jobs = 4
    config_mod.save_config(cfg)

    reloaded = config_mod.load_config()
    assert reloaded.tolerances.identity == 1e-7
    assert reloaded.ladder.levels == [2, 3, 4, 5]
    assert reloaded.output.jobs == 4


def test_normalize_clamps_invalid_values(config_mod):
    cfg = config_mod.AppConfig()
    cfg.tolerances.identity = -1.0    # not positive
    cfg.ladder.levels = [4, 4]        # too short a ladder
    cfg.solver.grid = 129             # odd
    cfg.output.jobs = 0
    normalized = cfg.normalize()
    assert normalized.tolerances.identity == 1e-6
    assert normalized.ladder.levels == [3, 4, 5]
    assert normalized.solver.grid % 2 == 0
    assert normalized.output.jobs == 1


def test_corrupted_yaml_falls_back_to_defaults(config_mod):
    config_mod.ensure_config_dir(config_mod.CONFIG_DIR)
    config_mod.CONFIG_FILE.write_text("this: : not: valid: yaml: [")
    cfg = config_mod.load_config()  # must not raise
    assert cfg.ladder.level == 4


def test_levels_accept_comma_string(config_mod):
    config_mod.ensure_config_dir(config_mod.CONFIG_DIR)
    config_mod.CONFIG_FILE.write_text(yaml.safe_dump({"ladder": {"levels": "5, 3,4"}}))
    cfg = config_mod.load_config()
    assert cfg.ladder.levels == [3, 4, 5]


def test_save_is_idempotent(config_mod):
    cfg = config_mod.load_config()
    config_mod.save_config(cfg)
    mtime = config_mod.CONFIG_FILE.stat().st_mtime_ns
    config_mod.save_config(cfg)  # identical payload -> no rewrite
    assert config_mod.CONFIG_FILE.stat().st_mtime_ns == mtime


def test_tolerance_overrides_ignore_unknown_keys(config_mod):
    run = config_mod.RunConfig("verify", tolerance_overrides={"identity": 1e-4, "bogus": 3.0})
    merged = run.tolerances(config_mod.ToleranceConfig())
    assert merged.identity == 1e-4
    assert not hasattr(merged, "bogus")


def test_norm_nodes_follow_dimension(config_mod):
    norms = config_mod.NormConfig(admissibility_nodes_2d=300, admissibility_nodes_1d=64)
    assert norms.nodes_for(2) == 64
    assert norms.nodes_for(3) == 300


def test_run_payload_is_sorted(config_mod):
    run = config_mod.RunConfig("verify", parameters={"z": 1, "a": 2})
    assert list(run.to_payload()["parameters"]) == ["a", "z"]


def test_sections_repair_types_and_drop_unknown_keys(config_mod):
    config_mod.ensure_config_dir(config_mod.CONFIG_DIR)
    config_mod.CONFIG_FILE.write_text(
        yaml.safe_dump(
            {
                "solver": {"grid": "lots", "starts": 1, "colour": "blue"},
                "norms": {"derivative_step": -3},
                "output": {"report_dir": "~/wulff-reports", "seed": "7"},
                "ladder": 5,
            }
        )
    )
    cfg = config_mod.load_config()
    assert cfg.solver.grid == 256
    assert cfg.solver.starts == 2
    assert cfg.norms.derivative_step == 1e-4
    assert cfg.output.seed == 7
    assert not str(cfg.output.report_dir).startswith("~")
    assert cfg.ladder.levels == [3, 4, 5]
    saved = yaml.safe_load(config_mod.CONFIG_FILE.read_text())
    assert list(saved) == list(config_mod.SECTIONS)
    assert "colour" not in saved["solver"]
    assert isinstance(saved["output"]["report_dir"], str)
