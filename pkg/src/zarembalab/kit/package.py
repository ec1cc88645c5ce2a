"""Package dependency management mixin for tasks."""

from __future__ import annotations

import importlib
import importlib.util
from functools import lru_cache
from types import ModuleType

# distribution name -> import name, where they differ
IMPORT_NAMES = {"scikit-sparse": "sksparse"}


def import_name(package_name: str) -> str:
    """Module name under which a distribution is imported."""
    return IMPORT_NAMES.get(package_name, package_name.replace("-", "_"))


@lru_cache(maxsize=None)
def optional_module(name: str) -> ModuleType | None:
    """Import ``name`` if its top-level package is installed, else return None."""
    top = import_name(name.split(".")[0])
    try:
        if importlib.util.find_spec(top) is None:
            return None
        return importlib.import_module(".".join([top, *name.split(".")[1:]]))
    except (ImportError, ValueError):
        return None


class PackageMixin:
    """Mixin for checking the packages a task needs.

    ``required_packages`` must be importable for the task to run;
    ``optional_packages`` only speed things up or add output formats.
    """

    required_packages: list[str] = []
    optional_packages: list[str] = []

    def get_required_packages(self) -> list[str]:
        """Get the list of required packages for this task.

        Returns:
            List of distribution names.
        """
        return getattr(self, "required_packages", [])

    def is_package_installed(self, package_name: str) -> bool:
        """Check if a specific package is installed.

        Args:
            package_name: Distribution name of the package.

        Returns:
            True if the package can be imported, False otherwise.
        """
        try:
            return importlib.util.find_spec(import_name(package_name)) is not None
        except (ImportError, ValueError):
            return False

    def check_packages(self) -> dict[str, bool]:
        """Check installation status of required and optional packages.

        Returns:
            Dictionary mapping package names to their installation status.
        """
        if hasattr(self, "_packages_cache"):
            cache: dict[str, bool] = getattr(self, "_packages_cache", {})
            return cache
        packages = [*self.get_required_packages(), *getattr(self, "optional_packages", [])]
        status = {pkg: self.is_package_installed(pkg) for pkg in packages}
        self._packages_cache = status
        return status

    def optional_status(self) -> dict[str, bool]:
        """Installation status of the optional packages (CHOLMOD factor, VTK export)."""
        status = self.check_packages()
        return {pkg: status[pkg] for pkg in getattr(self, "optional_packages", [])}

    def are_packages_installed(self) -> bool:
        """True if every required package is installed."""
        status = self.check_packages()
        return all(status[pkg] for pkg in self.get_required_packages())

    def get_missing_packages(self) -> list[str]:
        """Required packages that are not installed."""
        status = self.check_packages()
        return [pkg for pkg in self.get_required_packages() if not status[pkg]]

    @property
    def missing_packages(self) -> list[str]:
        return self.get_missing_packages()
