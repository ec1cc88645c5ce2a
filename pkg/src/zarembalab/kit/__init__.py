"""Base class for experiment tasks."""

from __future__ import annotations

from typing import TYPE_CHECKING, Any

from ..errors import ConfigError
from .config import ConfigMixin
from .package import PackageMixin

if TYPE_CHECKING:
    from ..schema import ExperimentConfig
    from ..serialize import Workspace


class TaskBase(PackageMixin, ConfigMixin):
    """Declarative experiment task with basic identification information."""

    name: str
    display_name: str
    description: str | None = None
    mandatory_base_fields: list[str] = ["name", "display_name"]
    required_packages: list[str] = ["numpy", "scipy", "triangle"]
    optional_packages: list[str] = ["scikit-sparse", "meshio"]
    config_keys: list[str] = ["threads"]
    config_defaults: dict[str, Any] = {"threads": 1}
    priority: int = 0  # 0 - highest, 5 - lowest

    def __init__(self, **kwargs: Any) -> None:
        """Initialize a task.

        Args:
            **kwargs: Task attributes:
                - name: Task identifier used in configs (defaults to the class value).
                - display_name: Human-readable name.
                - config: Optional runtime settings dict.

        Raises:
            ConfigError: If name or display_name is empty.
        """
        for field in self.mandatory_base_fields:
            setattr(self, field, kwargs.pop(field, getattr(self, field, None)))
            if not getattr(self, field):
                raise ConfigError(f"{field} is required and cannot be empty", task=type(self).__name__)
        config = kwargs.pop("config", None)
        self._init_config(config if isinstance(config, dict) else None)
        for field, value in kwargs.items():
            setattr(self, field, value)

    @property
    def threads(self) -> int:
        return max(1, int(self.setting("threads", int)))

    def execute(self, config: ExperimentConfig, workspace: Workspace) -> dict[str, Any]:
        """Run the task, write its files into ``workspace`` and return the report."""
        raise NotImplementedError(f"{type(self).__name__} does not implement execute")

    def __repr__(self) -> str:
        return f"<{type(self).__name__} {self.name}>"
