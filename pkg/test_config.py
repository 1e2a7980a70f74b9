"""
Tests for configuration loading and logging setup.

Run with: pytest test_config.py
"""

import logging

import pytest

from blockminres.config import CONFIG_ENV_VAR, DEFAULT_CONFIG, load_config, merge_configs
from blockminres.core import InputError
from blockminres.solver import SolverOptions
from blockminres.utils.logging_config import get_logger, setup_logging


def test_missing_file_gives_defaults(tmp_path):
    config = load_config(str(tmp_path / "absent.yaml"))
    assert config == DEFAULT_CONFIG
    assert config is not DEFAULT_CONFIG


def test_file_merges_over_defaults(tmp_path):
    path = tmp_path / "c.yaml"
    path.write_text("solver:\n  rel_tol: 1.0e-9\nproblems:\n  stokes:\n    viscosity: 0.5\n", encoding="utf-8")
    config = load_config(str(path))
    assert config["solver"]["rel_tol"] == 1e-9
    assert config["solver"]["max_iter"] == 1000
    assert config["problems"]["stokes"] == {"viscosity": 0.5, "length": 10.0, "height": 1.0}


def test_env_var_names_config(tmp_path, monkeypatch):
    path = tmp_path / "env.yaml"
    path.write_text("verify:\n  tolerance: 1.0e-6\n", encoding="utf-8")
    monkeypatch.setenv(CONFIG_ENV_VAR, str(path))
    assert load_config()["verify"]["tolerance"] == 1e-6


def test_invalid_yaml_falls_back(tmp_path):
    path = tmp_path / "bad.yaml"
    path.write_text("solver: [unclosed\n", encoding="utf-8")
    assert load_config(str(path)) == DEFAULT_CONFIG


def test_merge_configs_is_recursive():
    merged = merge_configs({"a": {"b": 1, "c": 2}, "d": 3}, {"a": {"c": 5}, "e": 6})
    assert merged == {"a": {"b": 1, "c": 5}, "d": 3, "e": 6}


def test_solver_options_from_config():
    config = merge_configs(DEFAULT_CONFIG, {"solver": {"max_iter": 50, "monitor": False}})
    options = SolverOptions.from_config(config, rel_tol=1e-8, max_iter=None)
    assert options.max_iter == 50
    assert options.rel_tol == 1e-8
    assert not options.monitor


def test_solver_options_reject_bad_values():
    with pytest.raises(InputError):
        SolverOptions(rel_tol=0.0)
    with pytest.raises(InputError):
        SolverOptions(max_iter=0)
    with pytest.raises(InputError):
        SolverOptions(per_block_tol=[1e-3], monitor=False)


def test_setup_logging_writes_file(tmp_path):
    root = setup_logging("WARNING", log_dir=tmp_path, session_name="run")
    get_logger("test").debug("debug line")
    for handler in root.handlers:
        handler.flush()
    assert "debug line" in (tmp_path / "run.log").read_text(encoding="utf-8")
    console = [h for h in root.handlers if not isinstance(h, logging.FileHandler)]
    assert console[0].level == logging.WARNING


def test_setup_logging_replaces_handlers(tmp_path):
    setup_logging("INFO", log_dir=tmp_path, session_name="one")
    root = setup_logging("INFO")
    assert len(root.handlers) == 1


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
