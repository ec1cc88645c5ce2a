"""Test task discovery, the experiment catalog, checks and experiment runs."""

from __future__ import annotations

import json
import xml.etree.ElementTree as ET
from pathlib import Path
from typing import Any

import pytest

from zarembalab import helpers
from zarembalab.errors import ConfigError, NumericalError
from zarembalab.helpers import (
    EXPERIMENTS_DIR,
    RunResult,
    apply_overrides,
    autodiscover_tasks,
    evaluate_check,
    get_experiments,
    get_task,
    get_tasks,
    list_experiments,
    load_experiment,
    resolve_key,
    run_config_data,
    run_experiment,
    worst_error,
)
from zarembalab.kit import TaskBase
from zarembalab.kit.config import RuntimeSettings
from zarembalab.kit.package import PackageMixin
from zarembalab.schema import Check, parse_config

TASK_NAMES = {"solve", "compare", "sweep", "dtn-scan", "cover-check", "heat-fit", "symmetry-pair"}


def _tiny(**overrides: Any) -> dict[str, Any]:
    data: dict[str, Any] = {
        "name": "tiny",
        "task": "solve",
        "domain": {"family": "half_disk", "variant": "I"},
        "mesh": {"h": 0.25},
        "solver": {"count": 3},
        "options": {"figures": False},
        "checks": [
            {"key": "domain.lambda1", "min": 0.0},
            {"key": "domain.length_balance.balanced", "expect": True},
        ],
    }
    data.update(overrides)
    return data


def test_autodiscover_tasks() -> None:
    """Test that every task module is discovered under its config name."""
    tasks = autodiscover_tasks()

    assert set(tasks) == TASK_NAMES, f"Discovered {sorted(tasks)}"


def test_get_task() -> None:
    """Test instantiation by name and the error for unknown names."""
    task = get_task("solve", {"threads": 2})

    assert task.name == "solve"
    assert task.threads == 2
    assert task.are_packages_installed()
    with pytest.raises(ConfigError):
        get_task("transmute")


def test_get_tasks_formats() -> None:
    """Test the JSON and XML task listings."""
    data = json.loads(get_tasks("json"))
    root = ET.fromstring(get_tasks("xml"))

    assert {item["name"] for item in data} == TASK_NAMES
    assert len(root.findall("task")) == len(TASK_NAMES)
    with pytest.raises(ValueError):
        get_tasks("yaml")


def test_task_listings_report_optional_packages() -> None:
    """Test that listings show the CHOLMOD and VTK packages with their status."""
    data = json.loads(get_tasks("json"))
    root = ET.fromstring(get_tasks("xml"))

    for item in data:
        assert set(item["packages_optional"]) == {"scikit-sparse", "meshio"}, item["name"]
        assert all(isinstance(ok, bool) for ok in item["packages_optional"].values())
    for task in root.findall("task"):
        packages = task.findall("packages_optional/package")
        assert {p.text for p in packages} == {"scikit-sparse", "meshio"}
        assert {p.get("installed") for p in packages} <= {"true", "false"}
    assert "Optional" in get_tasks("table")


class GhostTask(TaskBase):
    name = "ghost"
    display_name = "Ghost"
    required_packages = ["numpy", "no-such-package-zz"]
    optional_packages = ["meshio"]


def test_missing_required_package_blocks_task(monkeypatch: pytest.MonkeyPatch) -> None:
    """Test package status and that get_task refuses a task with a missing requirement."""
    task = GhostTask()

    assert task.get_missing_packages() == ["no-such-package-zz"]
    assert task.missing_packages == ["no-such-package-zz"]
    assert not task.are_packages_installed()
    assert set(task.optional_status()) == {"meshio"}
    monkeypatch.setattr(helpers, "autodiscover_tasks", lambda: {"ghost": GhostTask})
    with pytest.raises(ConfigError) as info:
        helpers.get_task("ghost")
    assert info.value.details["packages"] == ["no-such-package-zz"]


def test_vtk_output_needs_meshio(tmp_path: Path, monkeypatch: pytest.MonkeyPatch) -> None:
    """Test that requesting VTK without meshio is a config error and publishes nothing."""
    original = PackageMixin.is_package_installed
    monkeypatch.setattr(PackageMixin, "is_package_installed",
                        lambda self, pkg: pkg != "meshio" and original(self, pkg))
    config = parse_config(_tiny(name="vtk", options={"figures": False, "vtk": True}))
    result = run_experiment(config, output_root=tmp_path)

    assert isinstance(result.error, ConfigError)
    assert list(tmp_path.iterdir()) == []


def test_bundled_catalog_is_valid() -> None:
    """Test that every bundled experiment validates and is named after its file."""
    experiments = list_experiments()
    files = sorted(p.stem for p in EXPERIMENTS_DIR.glob("*.json"))

    assert len(experiments) >= 10, f"Only {len(experiments)} bundled experiments"
    assert sorted(experiments) == files
    assert {c.task for c in experiments.values()} == TASK_NAMES
    for name, config in experiments.items():
        assert config.checks, f"{name} has no checks"


def test_get_experiments_json() -> None:
    """Test the JSON catalog listing."""
    data = json.loads(get_experiments("json"))

    assert "halfdisk-transplant" in {item["name"] for item in data}


def test_load_experiment(tmp_path: Path) -> None:
    """Test loading by bundled name and by path."""
    path = tmp_path / "tiny.json"
    path.write_text(json.dumps(_tiny()))

    assert load_experiment("disk-bessel").task == "solve"
    assert load_experiment(path).name == "tiny"
    with pytest.raises(ConfigError):
        load_experiment("no-such-experiment")


def test_resolve_key() -> None:
    """Test dotted paths through dicts and lists."""
    report = {"domain": {"lambda": [1.0, 2.0]}, "ok": True}

    assert resolve_key(report, "domain.lambda.1") == 2.0
    assert resolve_key(report, "ok") is True
    with pytest.raises(KeyError):
        resolve_key(report, "domain.missing")


@pytest.mark.parametrize(
    "check, passed",
    [
        ({"key": "value", "value": 2.0, "rel_tol": 1e-3}, True),
        ({"key": "value", "value": 2.1, "rel_tol": 1e-3}, False),
        ({"key": "value", "value": 2.1, "rel_tol": 0.0, "abs_tol": 0.2}, True),
        ({"key": "value", "min": 1.0, "max": 3.0}, True),
        ({"key": "value", "max": 1.0}, False),
        ({"key": "flag", "expect": True}, True),
        ({"key": "flag", "expect": False}, False),
        ({"key": "nan", "max": 1.0}, False),
        ({"key": "flag", "min": 0.0}, False),
        ({"key": "absent", "expect": True}, False),
    ],
)
def test_evaluate_check(check: dict[str, Any], passed: bool) -> None:
    """Test numeric, boolean, non-finite and missing checks."""
    report = {"value": 2.0, "flag": True, "nan": "nan"}

    assert evaluate_check(report, Check(**check))["passed"] is passed


def test_run_result_exit_codes() -> None:
    """Test exit codes for passing, failing and erroring runs."""
    assert RunResult("a", checks=[{"passed": True}]).exit_code == 0
    assert RunResult("b", checks=[{"passed": False}]).exit_code == 1
    assert RunResult("c", error=NumericalError("boom")).exit_code == 3


def test_worst_error_has_highest_exit_code() -> None:
    """Test that a multi-run picks the error that maps to the highest exit code."""
    numerical, config = NumericalError("boom"), ConfigError("bad")
    results = [RunResult("a", error=config), RunResult("b", checks=[{"passed": False}]), RunResult("c", error=numerical)]

    assert worst_error(results) is numerical
    assert worst_error(results[:2]) is config
    assert worst_error([RunResult("d")]) is None


def test_apply_overrides() -> None:
    """Test command-line overrides and their validation."""
    config = parse_config(_tiny())

    assert apply_overrides(config, h=0.1, count=5).mesh.h == 0.1
    assert apply_overrides(config, count=5).solver.count == 5
    with pytest.raises(ConfigError):
        apply_overrides(config, h=2.0)


@pytest.mark.slow
def test_run_experiment_bundle(tmp_path: Path) -> None:
    """Test that a run publishes a reproducible bundle."""
    settings = RuntimeSettings({"output_root": str(tmp_path), "threads": 1})
    first = run_config_data(_tiny(), settings)
    bundle = (tmp_path / "tiny" / "bundle.json").read_text()
    second = run_config_data(_tiny(), settings)

    assert first.passed, first.summary()
    assert first.target == tmp_path / "tiny"
    assert (tmp_path / "tiny" / "timings.json").exists()
    data = json.loads(bundle)
    assert data["passed"] is True
    assert data["config"]["name"] == "tiny"
    assert "domain-L0.mesh" in data["files"]
    assert second.passed
    assert (tmp_path / "tiny" / "bundle.json").read_text() == bundle, "Reruns must give identical bundles"


def test_run_experiment_error_leaves_no_output(tmp_path: Path) -> None:
    """Test that a failing task reports its error and publishes nothing."""
    config = parse_config(_tiny(name="broken", task="heat-fit", options={"source": "bessel"}, checks=[]))
    result = run_experiment(config, output_root=tmp_path)

    assert isinstance(result.error, ConfigError)
    assert result.exit_code == 2
    assert not (tmp_path / "broken").exists()
    assert list(tmp_path.iterdir()) == []
