"""Exception hierarchy shared by every lab module."""

from __future__ import annotations

import json
from typing import Any


class LabError(Exception):
    """Base class for all lab failures.

    Args:
        message: Human-readable description.
        **details: Machine-readable context attached to the error report.
    """

    exit_code: int = 1
    kind: str = "lab"

    def __init__(self, message: str, **details: Any) -> None:
        super().__init__(message)
        self.message = message
        self.details: dict[str, Any] = details

    def report(self) -> str:
        """Serialize the error as a JSON report."""
        payload = {"error": self.kind, "message": self.message, "details": self.details}
        return json.dumps(payload, indent=2, sort_keys=True, default=str)


class ConfigError(LabError):
    """Invalid experiment configuration or unknown domain family."""

    exit_code = 2
    kind = "config"


class GeometryError(LabError):
    """Invalid domain description."""

    exit_code = 2
    kind = "geometry"


class MeshError(LabError):
    """Meshing failure or invalid mesh."""

    exit_code = 3
    kind = "mesh"


class NumericalError(LabError):
    """Failure of an assembly, factorization or eigen solve."""

    exit_code = 3
    kind = "numerical"


class SingularShiftError(NumericalError):
    """Shifted operator is (near) singular for one of the homogeneous problems."""

    kind = "singular-shift"


class ConvergenceError(NumericalError):
    """Eigen solver did not reach the requested residuals."""

    kind = "convergence"


class TransplantError(NumericalError):
    """Transplantation map unavailable or verification failed."""

    kind = "transplant"
