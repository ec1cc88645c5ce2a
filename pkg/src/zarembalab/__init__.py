"""Zaremba lab - finite-element experiments on Dirichlet-Neumann isospectrality."""

__version__ = "0.1.0"

from .cli import main
from .errors import (
    ConfigError,
    ConvergenceError,
    GeometryError,
    LabError,
    MeshError,
    NumericalError,
    SingularShiftError,
    TransplantError,
)
from .helpers import (
    autodiscover_tasks,
    get_task,
    get_tasks,
    list_experiments,
    load_experiment,
    run_catalog,
    run_experiment,
)
from .kit import TaskBase
from .kit.config import ConfigMixin, RuntimeSettings
from .kit.package import PackageMixin

__all__ = [
    "ConfigError",
    "ConfigMixin",
    "ConvergenceError",
    "GeometryError",
    "LabError",
    "MeshError",
    "NumericalError",
    "PackageMixin",
    "RuntimeSettings",
    "SingularShiftError",
    "TaskBase",
    "TransplantError",
    "autodiscover_tasks",
    "get_task",
    "get_tasks",
    "list_experiments",
    "load_experiment",
    "main",
    "run_catalog",
    "run_experiment",
]
