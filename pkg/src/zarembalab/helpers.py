"""Helper functions for task discovery, experiment loading and running."""

from __future__ import annotations

import concurrent.futures
import importlib
import inspect
import json
import logging
import math
import sys
import time
import xml.etree.ElementTree as ET
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from .errors import ConfigError, LabError
from .kit import TaskBase
from .kit.config import RuntimeSettings
from .schema import Check, ExperimentConfig, load_config, parse_config
from .serialize import Workspace, to_jsonable

try:
    from qualitybase.services.utils import format_table
except ImportError as e:
    raise ImportError(
        "qualitybase not found. "
        "Either install qualitybase as a dependency or ensure it's available in the development environment. "
        "Run: pip install -r requirements.txt"
    ) from e

logger = logging.getLogger(__name__)

PACKAGE_DIR = Path(__file__).parent
TASKS_DIR = PACKAGE_DIR / "tasks"
EXPERIMENTS_DIR = PACKAGE_DIR / "experiments"


def _extract_tasks_from_module(module: Any, module_path: str) -> dict[str, type[TaskBase]]:
    """Extract task classes from a module.

    Args:
        module: Imported module.
        module_path: Module path string.

    Returns:
        Dictionary of task name to task class.
    """
    tasks: dict[str, type[TaskBase]] = {}
    for name, obj in inspect.getmembers(module, inspect.isclass):
        if (
            obj is not TaskBase
            and issubclass(obj, TaskBase)
            and obj.__module__ == module_path
            and "Task" in name
        ):
            task_name = getattr(obj, "name", "")
            if task_name:
                tasks[task_name] = obj
    return tasks


def autodiscover_tasks(
    dir_path: str | Path = TASKS_DIR,
    *,
    base_module: str = "zarembalab.tasks",
    exclude_files: list[str] | None = None,
) -> dict[str, type[TaskBase]]:
    """Discover task classes by scanning a package directory."""
    if exclude_files is None:
        exclude_files = ["__init__.py", "base.py"]

    dir_path_obj = Path(dir_path)
    if not dir_path_obj.is_dir():
        return {}

    tasks: dict[str, type[TaskBase]] = {}
    for py_file in sorted(dir_path_obj.rglob("*.py")):
        if py_file.name in exclude_files or py_file.name.startswith("_"):
            continue
        parts = [*py_file.relative_to(dir_path_obj).parts[:-1], py_file.stem]
        module_path = f"{base_module}.{'.'.join(parts)}"
        try:
            module = importlib.import_module(module_path)
        except ImportError as exc:
            logger.warning("skipping %s: %s", module_path, exc)
            continue
        tasks.update(_extract_tasks_from_module(module, module_path))
    return tasks


def get_task(name: str, config: dict[str, Any] | None = None) -> TaskBase:
    """Instantiate the task registered under ``name``.

    Raises:
        ConfigError: No task has that name, or its required packages are missing.
    """
    tasks = autodiscover_tasks()
    if name not in tasks:
        raise ConfigError(f"unknown task: {name}", allowed=sorted(tasks))
    task = tasks[name](config=config or {})
    missing = task.get_missing_packages()
    if missing:
        raise ConfigError(f"task {name} needs missing packages", packages=missing)
    return task


def _format_tasks_table(tasks: dict[str, TaskBase]) -> str:
    columns = [
        {"header": "Name", "width": 16, "formatter": lambda _item, key: key},
        {"header": "Display Name", "width": 26, "formatter": lambda item, key: getattr(item, "display_name", key)},
        {"header": "Description", "width": 60, "formatter": lambda item, _key: item.description or ""},
        {
            "header": "Package",
            "width": 8,
            "formatter": lambda item, _key: "✓" if item.are_packages_installed() else "✗",
        },
        {
            "header": "Optional",
            "width": 28,
            "formatter": lambda item, _key: " ".join(
                f"{pkg}{'✓' if ok else '✗'}" for pkg, ok in item.optional_status().items()
            ),
        },
    ]
    return str(format_table(tasks, columns=columns, empty_message="No tasks found."))


def _format_tasks_json(tasks: dict[str, TaskBase]) -> str:
    data = [
        {
            "name": name,
            "display_name": task.display_name,
            "description": task.description,
            "class_path": f"{type(task).__module__}.{type(task).__name__}",
            "packages_installed": task.are_packages_installed(),
            "packages_missing": task.get_missing_packages(),
            "packages_optional": task.optional_status(),
        }
        for name, task in sorted(tasks.items())
    ]
    return json.dumps(data, indent=2, ensure_ascii=False)


def _format_tasks_xml(tasks: dict[str, TaskBase]) -> str:
    root = ET.Element("tasks")
    for name, task in sorted(tasks.items()):
        elem = ET.SubElement(root, "task")
        ET.SubElement(elem, "name").text = name
        ET.SubElement(elem, "display_name").text = task.display_name
        if task.description:
            ET.SubElement(elem, "description").text = task.description
        missing = ET.SubElement(elem, "packages_missing")
        for pkg in task.get_missing_packages():
            ET.SubElement(missing, "package").text = pkg
        optional = ET.SubElement(elem, "packages_optional")
        for pkg, ok in task.optional_status().items():
            ET.SubElement(optional, "package", installed=str(ok).lower()).text = pkg
    ET.indent(root)
    return ET.tostring(root, encoding="unicode")


def get_tasks(output_format: str = "table") -> str:
    """Formatted list of the available tasks.

    Supported formats: 'table', 'json', 'xml'.
    """
    tasks = {name: cls() for name, cls in autodiscover_tasks().items()}
    if output_format == "table":
        return _format_tasks_table(tasks)
    if output_format == "json":
        return _format_tasks_json(tasks)
    if output_format == "xml":
        return _format_tasks_xml(tasks)
    raise ValueError(f"Invalid format '{output_format}'. Must be 'table', 'json', or 'xml'.")


# ---------------------------------------------------------------------------
# Experiment catalog


def list_experiments(dir_path: str | Path = EXPERIMENTS_DIR) -> dict[str, ExperimentConfig]:
    """Bundled experiment configs by name."""
    found: dict[str, ExperimentConfig] = {}
    for path in sorted(Path(dir_path).glob("*.json")):
        config = load_config(path)
        found[config.name] = config
    return found


def get_experiments(output_format: str = "table", dir_path: str | Path = EXPERIMENTS_DIR) -> str:
    experiments = list_experiments(dir_path)
    if output_format == "json":
        return json.dumps(
            [{"name": n, "task": c.task, "description": c.description} for n, c in experiments.items()],
            indent=2,
            ensure_ascii=False,
        )
    if output_format != "table":
        raise ValueError(f"Invalid format '{output_format}'. Must be 'table' or 'json'.")
    columns = [
        {"header": "Name", "width": 28, "formatter": lambda _item, key: key},
        {"header": "Task", "width": 14, "formatter": lambda item, _key: item.task},
        {"header": "Description", "width": 70, "formatter": lambda item, _key: item.description},
    ]
    return str(format_table(experiments, columns=columns, empty_message="No experiments found."))


def load_experiment(name_or_path: str | Path) -> ExperimentConfig:
    """Config from a file path or the name of a bundled experiment.

    Raises:
        ConfigError: Neither a readable file nor a known experiment.
    """
    path = Path(name_or_path)
    if path.suffix == ".json" or path.exists():
        return load_config(path)
    bundled = EXPERIMENTS_DIR / f"{name_or_path}.json"
    if bundled.exists():
        return load_config(bundled)
    for config in list_experiments().values():
        if config.name == str(name_or_path):
            return config
    raise ConfigError(f"unknown experiment: {name_or_path}", allowed=sorted(list_experiments()))


# ---------------------------------------------------------------------------
# Checks


def resolve_key(report: Any, key: str) -> Any:
    """Follow a dotted path through nested dicts and lists (``domain.lambda.0``).

    Raises:
        KeyError: The path does not exist.
    """
    value = report
    for part in key.split("."):
        if isinstance(value, dict):
            value = value[part]
        elif isinstance(value, (list, tuple)):
            value = value[int(part)]
        else:
            raise KeyError(key)
    return value


def evaluate_check(report: dict[str, Any], check: Check) -> dict[str, Any]:
    out: dict[str, Any] = {"key": check.key}
    try:
        actual = to_jsonable(resolve_key(report, check.key))
    except (KeyError, IndexError, ValueError):
        return {**out, "actual": None, "passed": False, "reason": "missing"}
    out["actual"] = actual
    reasons = []
    if check.expect is not None and actual is not check.expect:
        reasons.append(f"expected {check.expect}")
    numeric = isinstance(actual, (int, float)) and not isinstance(actual, bool)
    if check.value is not None or check.min is not None or check.max is not None:
        if not numeric or not math.isfinite(actual):
            reasons.append("not a finite number")
        else:
            if check.value is not None and not math.isclose(
                actual, check.value, rel_tol=check.rel_tol, abs_tol=check.abs_tol
            ):
                reasons.append(f"expected {check.value} (rel {check.rel_tol}, abs {check.abs_tol})")
            if check.min is not None and actual < check.min:
                reasons.append(f"below {check.min}")
            if check.max is not None and actual > check.max:
                reasons.append(f"above {check.max}")
    out["passed"] = not reasons
    if reasons:
        out["reason"] = "; ".join(reasons)
    return out


def evaluate_checks(report: dict[str, Any], checks: list[Check]) -> list[dict[str, Any]]:
    return [evaluate_check(report, check) for check in checks]


# ---------------------------------------------------------------------------
# Running


@dataclass
class RunResult:
    """Outcome of one experiment run."""

    name: str
    target: Path | None = None
    report: dict[str, Any] = field(default_factory=dict)
    checks: list[dict[str, Any]] = field(default_factory=list)
    error: LabError | None = None
    seconds: float = 0.0

    @property
    def passed(self) -> bool:
        return self.error is None and all(c["passed"] for c in self.checks)

    @property
    def exit_code(self) -> int:
        if self.error is not None:
            return self.error.exit_code
        return 0 if self.passed else 1

    def summary(self) -> dict[str, Any]:
        out: dict[str, Any] = {
            "name": self.name,
            "passed": self.passed,
            "exit_code": self.exit_code,
            "target": str(self.target) if self.target else None,
            "checks": self.checks,
        }
        if self.error is not None:
            out["error"] = json.loads(self.error.report())
        return out


def run_experiment(
    config: ExperimentConfig,
    settings: RuntimeSettings | None = None,
    *,
    output_root: str | Path | None = None,
) -> RunResult:
    """Run one experiment and publish its bundle.

    ``bundle.json`` holds the config echo, report and check results and is
    identical across reruns; wall times go to ``timings.json``. Any
    :class:`LabError` discards the staged files and is returned in the result.
    """
    from . import __version__

    settings = settings or RuntimeSettings()
    root = Path(output_root) if output_root is not None else Path(settings.output_root)
    target = Path(config.output) if config.output else root / config.name
    result = RunResult(name=config.name)
    workspace: Workspace | None = None
    start = time.perf_counter()
    try:
        task = get_task(config.task, {"threads": settings.threads})
        if config.options.vtk and not task.optional_status().get("meshio", False):
            raise ConfigError("vtk output needs the meshio package", task=task.name)
        workspace = Workspace(target)
        logger.info("running %s (%s)", config.name, task.name)
        report = to_jsonable(task.execute(config, workspace))
        result.report = report
        result.checks = evaluate_checks(report, config.checks)
        result.seconds = time.perf_counter() - start
        workspace.write_json("bundle.json", {
            "name": config.name,
            "task": config.task,
            "version": __version__,
            "config": config.model_dump(mode="json"),
            "report": report,
            "checks": result.checks,
            "passed": result.passed,
            "files": dict(sorted(workspace.files.items())),
        })
        workspace.write_json("timings.json", {"seconds": result.seconds, "threads": settings.threads})
        result.target = workspace.commit()
    except LabError as exc:
        if workspace is not None:
            workspace.discard()
        result.error = exc
        result.seconds = time.perf_counter() - start
        logger.error("%s failed: %s", config.name, exc.message)
    for check in result.checks:
        if not check["passed"]:
            logger.warning("%s: check %s failed: %s", config.name, check["key"], check.get("reason"))
    return result


def run_catalog(
    names: list[str] | None = None,
    settings: RuntimeSettings | None = None,
    *,
    output_root: str | Path | None = None,
    overrides: dict[str, Any] | None = None,
) -> list[RunResult]:
    """Run bundled experiments (all when ``names`` is empty), in parallel over ``settings.threads``.

    ``overrides`` (``h``, ``count``, ``options``) apply to every config, as in
    :func:`apply_overrides`.

    Raises:
        ConfigError: An unknown name, or an override out of range for some config.
    """
    settings = settings or RuntimeSettings()
    catalog = list_experiments()
    selected = names or sorted(catalog)
    configs = [catalog[n] if n in catalog else load_experiment(n) for n in selected]
    if overrides:
        configs = [apply_overrides(c, **overrides) for c in configs]
    per_run = RuntimeSettings({"output_root": settings.output_root, "threads": 1})
    with concurrent.futures.ThreadPoolExecutor(max_workers=settings.threads) as executor:
        futures = [executor.submit(run_experiment, c, per_run, output_root=output_root) for c in configs]
        return [f.result() for f in futures]


def worst_error(results: list[RunResult]) -> LabError | None:
    """Error with the highest exit code among ``results``, if any run failed."""
    errors = [r.error for r in results if r.error is not None]
    return max(errors, key=lambda e: e.exit_code, default=None)


def run_config_data(data: dict[str, Any], settings: RuntimeSettings | None = None, **kwargs: Any) -> RunResult:
    """Validate a config mapping and run it."""
    return run_experiment(parse_config(data, "<mapping>"), settings, **kwargs)


def apply_overrides(
    config: ExperimentConfig,
    *,
    h: float | None = None,
    count: int | None = None,
    output: str | None = None,
    options: dict[str, Any] | None = None,
) -> ExperimentConfig:
    """Copy of ``config`` with command-line overrides, validated again.

    Raises:
        ConfigError: An override is out of range.
    """
    data = config.model_dump(mode="json", exclude_none=True)
    if h is not None:
        data["mesh"]["h"] = h
    if count is not None:
        data["solver"]["count"] = count
    if output is not None:
        data["output"] = output
    if options:
        data["options"].update(options)
    return parse_config(data, f"{config.name} (overrides)")


def parse_number(flag: str, raw: str, kind: type[int] | type[float]) -> int | float | None:
    """Command-line value of ``flag`` as ``kind``; prints the problem and returns None if malformed."""
    try:
        value = kind(raw)
    except ValueError:
        print(f"Invalid value for {flag}: {raw!r} (expected {kind.__name__})", file=sys.stderr)
        return None
    if isinstance(value, float) and not math.isfinite(value):
        print(f"Invalid value for {flag}: {raw!r} (expected a finite number)", file=sys.stderr)
        return None
    return value
