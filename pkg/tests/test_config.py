"""Test experiment config validation and runtime settings.

Configs are validated strictly; runtime settings come from the command line
first, then from ``ZAREMBALAB_*`` environment variables.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any

import pytest

from zarembalab.errors import ConfigError
from zarembalab.kit.config import ConfigMixin, RuntimeSettings
from zarembalab.schema import json_schema, load_config, parse_config


def _config(**overrides: Any) -> dict[str, Any]:
    data: dict[str, Any] = {
        "name": "scoped",
        "task": "solve",
        "domain": {"family": "half_disk", "variant": "I"},
        "mesh": {"h": 0.1},
    }
    data.update(overrides)
    return data


@pytest.fixture
def clean_env(monkeypatch: pytest.MonkeyPatch) -> pytest.MonkeyPatch:
    for key in ("THREADS", "OUTPUT_ROOT", "ZAREMBALAB_THREADS", "ZAREMBALAB_OUTPUT_ROOT",
                "ZAREMBALAB_SCOPED_THREADS"):
        monkeypatch.delenv(key, raising=False)
    return monkeypatch


def test_minimal_config_defaults() -> None:
    """Test that a minimal config fills in solver and option defaults."""
    config = parse_config(_config())

    assert config.mesh.levels == 1
    assert config.mesh.symmetric is True
    assert config.solver.count == 10
    assert config.solver.tol == 1e-10
    assert config.solver.cluster_tol == 1e-6
    assert config.options.figures is True
    assert config.checks == []


def test_unknown_keys_are_rejected() -> None:
    """Test that a misspelled key fails with the offending location."""
    with pytest.raises(ConfigError) as info:
        parse_config(_config(mesh={"h": 0.1, "level": 2}))

    assert info.value.exit_code == 2
    assert any("mesh" in e["loc"] for e in info.value.details["errors"])


@pytest.mark.parametrize(
    "overrides",
    [
        {"mesh": {"h": 0.0}},
        {"mesh": {"h": 0.8}},
        {"solver": {"tol": 1e-14}},
        {"name": "Bad Name"},
        {"task": "transmute"},
        {"domain": {"family": "disk_partition", "k": 5, "n": 3}},
        {"domain": {"family": "disk_partition", "k": 5}},
        {"domain": {"family": "sectorial", "alpha": 0.5, "points": [[1, 0]], "parts": []}},
        {"domain": {"family": "rectangle", "lower": [1, 1], "upper": [0, 2]}},
        {"domain": None},
        {"options": {"lam_lo": 5.0, "lam_hi": 4.0}},
        {"checks": [{"key": "lambda1"}]},
    ],
)
def test_invalid_configs(overrides: dict[str, Any]) -> None:
    """Test range checks and family-specific requirements."""
    with pytest.raises(ConfigError):
        parse_config(_config(**overrides))


def test_task_domain_rules() -> None:
    """Test the task-specific domain requirements."""
    assert parse_config(_config(task="sweep", domain=None)).domain is None
    with pytest.raises(ConfigError):
        parse_config(_config(task="symmetry-pair"))
    with pytest.raises(ConfigError):
        parse_config(_config(task="cover-check"))
    half = {"family": "rectangle_half", "dirichlet_side": "top"}
    with pytest.raises(ConfigError):
        parse_config(_config(task="compare", domain=half))
    assert parse_config(_config(task="symmetry-pair", domain=half)).domain is not None


def test_load_config(tmp_path: Path) -> None:
    """Test loading from disk and the errors for unreadable files."""
    good = tmp_path / "good.json"
    good.write_text(json.dumps(_config()))
    broken = tmp_path / "broken.json"
    broken.write_text("{not json")
    listing = tmp_path / "list.json"
    listing.write_text("[]")

    assert load_config(good).name == "scoped"
    for path in (broken, listing, tmp_path / "missing.json"):
        with pytest.raises(ConfigError) as info:
            load_config(path)
        assert info.value.details["source"] == str(path)


def test_json_schema() -> None:
    """Test that the published schema lists the top-level keys."""
    schema = json_schema()

    assert {"name", "task", "domain", "mesh", "solver", "options", "checks"} <= set(schema["properties"])
    assert schema.get("additionalProperties") is False


def test_runtime_settings_defaults(clean_env: pytest.MonkeyPatch) -> None:
    """Test the built-in defaults."""
    settings = RuntimeSettings()

    assert settings.output_root == "results"
    assert settings.threads == 1


def test_runtime_settings_environment(clean_env: pytest.MonkeyPatch) -> None:
    """Test that the environment fills unset values and explicit values win."""
    clean_env.setenv("ZAREMBALAB_THREADS", "4")
    clean_env.setenv("ZAREMBALAB_OUTPUT_ROOT", "/tmp/lab")

    assert RuntimeSettings().threads == 4
    assert RuntimeSettings().output_root == "/tmp/lab"
    assert RuntimeSettings({"threads": 2, "output_root": None}).threads == 2


def test_runtime_settings_invalid(clean_env: pytest.MonkeyPatch) -> None:
    """Test that bad thread counts raise ConfigError."""
    with pytest.raises(ConfigError):
        _ = RuntimeSettings({"threads": 0}).threads
    clean_env.setenv("ZAREMBALAB_THREADS", "many")
    with pytest.raises(ConfigError):
        _ = RuntimeSettings().threads


def test_task_specific_environment(clean_env: pytest.MonkeyPatch) -> None:
    """Test that a task-scoped variable beats the generic one."""

    class Scoped(ConfigMixin):
        name = "scoped"
        config_keys = ["threads"]

    clean_env.setenv("ZAREMBALAB_THREADS", "2")
    clean_env.setenv("ZAREMBALAB_SCOPED_THREADS", "3")
    task = Scoped()

    assert task.setting("threads", int) == 3
    assert task.configure({"threads": 5, "ignored": 1}).config == {"threads": 5}
    assert task.setting("threads", int) == 5
    assert task.get_missing_config_keys() == []
