"""Configuration management mixin for tasks."""

from __future__ import annotations

import os
from collections.abc import Callable
from typing import Any

from ..errors import ConfigError

ENV_PREFIX = "ZAREMBALAB"


class ConfigMixin:
    """Mixin for runtime settings with environment fallback.

    This mixin adds functionality to:
    - Declare the settings a task reads (``config_keys``) and their defaults
    - Initialize settings from a dict
    - Resolve a setting from the dict, then from the environment
    """

    config_keys: list[str] = []
    config_defaults: dict[str, Any] = {}
    config_prefix: str = ENV_PREFIX

    def _init_config(self, config: dict[str, Any] | None = None) -> None:
        """Initialize configuration.

        Args:
            config: Configuration dictionary. If None, uses empty dict.
        """
        if not hasattr(self, "_config"):
            self._config: dict[str, Any] = {}
        if config is not None:
            self._config = self._filter_config(config)

    def _filter_config(self, config: dict[str, Any]) -> dict[str, Any]:
        """Keep only the declared keys (everything when none are declared)."""
        if not self.config_keys:
            return dict(config)
        return {key: config[key] for key in self.config_keys if key in config}

    def _get_config_or_env(self, key: str, default: Any = None) -> Any:
        """Get a setting from the config dict or the environment.

        Priority order:
        1. Config dict (highest priority)
        2. Environment variable ``{PREFIX}_{TASK_NAME}_{KEY}``
        3. Environment variable ``{PREFIX}_{KEY}``
        4. Environment variable ``{KEY}``
        5. ``config_defaults`` entry, then ``default`` (lowest priority)

        Args:
            key: Setting name.
            default: Fallback when nothing else provides a value.

        Returns:
            The resolved value; environment values are strings.
        """
        value = getattr(self, "_config", {}).get(key)
        if value is not None:
            return value
        task_name = getattr(self, "name", "").upper().replace("-", "_")
        key_upper = key.upper()
        candidates = []
        if task_name:
            candidates.append(f"{self.config_prefix}_{task_name}_{key_upper}")
        candidates += [f"{self.config_prefix}_{key_upper}", key_upper]
        for env_key in candidates:
            value = os.getenv(env_key)
            if value is not None:
                return value
        return self.config_defaults.get(key, default)

    def setting(self, key: str, cast: Callable[[Any], Any] = str, default: Any = None) -> Any:
        """Resolved setting converted with ``cast``.

        Raises:
            ConfigError: The value cannot be converted.
        """
        value = self._get_config_or_env(key, default)
        if value is None:
            return None
        try:
            return cast(value)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"invalid value for setting {key}", key=key, value=str(value)) from exc

    def configure(self, config: dict[str, Any], *, replace: bool = False) -> Any:
        """Update settings.

        Args:
            config: Settings to merge or replace.
            replace: If True, replace existing settings.

        Returns:
            Self for method chaining.
        """
        if not hasattr(self, "_config"):
            self._config = {}
        filtered = self._filter_config(config)
        if replace:
            self._config = filtered
        else:
            self._config.update(filtered)
        return self

    @property
    def config(self) -> dict[str, Any]:
        if not hasattr(self, "_config"):
            self._config = {}
        return self._config

    def get_missing_config_keys(self) -> list[str]:
        """Declared keys that resolve to nothing."""
        return [key for key in self.config_keys if self._get_config_or_env(key) is None]


class RuntimeSettings(ConfigMixin):
    """Settings not tied to a task: output root and worker threads."""

    name = ""
    config_keys = ["output_root", "threads"]
    config_defaults = {"output_root": "results", "threads": 1}

    def __init__(self, config: dict[str, Any] | None = None) -> None:
        self._init_config({k: v for k, v in (config or {}).items() if v is not None})

    @property
    def output_root(self) -> str:
        return str(self.setting("output_root"))

    @property
    def threads(self) -> int:
        threads = int(self.setting("threads", int))
        if threads < 1:
            raise ConfigError("thread count must be positive", threads=threads)
        return threads
