"""Experiment configuration schema.

One experiment per JSON file. Unknown keys are rejected at every level and
physical parameters are range-checked; :func:`load_config` turns validation
failures into :class:`~zarembalab.errors.ConfigError`.
"""

from __future__ import annotations

import json
import math
from pathlib import Path
from typing import Any, Literal

from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from .errors import ConfigError

TaskName = Literal["solve", "compare", "sweep", "dtn-scan", "cover-check", "heat-fit", "symmetry-pair"]
Family = Literal[
    "half_disk",
    "disk",
    "disk_partition",
    "rectangle",
    "quarter_disk",
    "sectorial",
    "double_cover",
    "lens_half",
    "rectangle_half",
    "curves",
]
Tag = Literal["D", "N"]
HALF_FAMILIES = ("lens_half", "rectangle_half")
DOMAINLESS_TASKS = ("sweep", "dtn-scan")


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid")


class DomainConfig(_Strict):
    """Domain family and its parameters; only the fields of the chosen family are read."""

    family: Family
    weight: Literal["flat", "spherical"] = "flat"
    swapped: bool = Field(False, description="exchange every boundary tag after building")
    variant: Literal["I", "II", "D-diameter", "N-diameter"] = "I"
    tag: Tag = Field("D", description="disk boundary condition; top-arc tag of the double cover")
    radius: float = Field(1.0, gt=0)
    k: int | None = Field(None, ge=1, description="partition angle alpha = k pi / step")
    n: int | None = Field(None, ge=1, description="partition angle beta = n pi / step")
    step: int = Field(24, ge=2)
    lower: tuple[float, float] = (0.0, 0.0)
    upper: tuple[float, float] = (1.0, 1.0)
    sides: dict[Literal["bottom", "right", "top", "left"], Tag] = Field(default_factory=dict)
    alpha: float | None = Field(None, gt=0, lt=math.pi / 2, description="sector angle of a sectorial block")
    points: list[tuple[float, float]] = Field(default_factory=list)
    parts: list[Literal["gamma11", "gamma12"]] = Field(default_factory=list)
    axis: Literal["x", "y"] = "y"
    dirichlet_side: Literal["top", "left", "right"] = "top"
    width: float = Field(1.0, gt=0)
    height: float = Field(1.0, gt=0)
    spec: dict[str, Any] | None = Field(None, description="explicit curve list (family 'curves')")

    @model_validator(mode="after")
    def _family_fields(self) -> DomainConfig:
        if self.family == "disk_partition":
            if self.k is None or self.n is None:
                raise ValueError("disk_partition needs k and n")
            if not self.k <= self.n <= self.step:
                raise ValueError("disk_partition needs k <= n <= step")
        if self.family == "sectorial":
            if self.alpha is None or len(self.points) < 2:
                raise ValueError("sectorial needs alpha and at least two points")
            if len(self.parts) != len(self.points) - 1:
                raise ValueError("sectorial needs one part label per polyline piece")
        if self.family == "rectangle" and not (self.upper[0] > self.lower[0] and self.upper[1] > self.lower[1]):
            raise ValueError("rectangle upper corner must lie above and right of the lower one")
        if self.family == "curves" and not self.spec:
            raise ValueError("family 'curves' needs a spec")
        return self


class MeshConfig(_Strict):
    h: float = Field(..., gt=0, le=0.5, description="target edge length")
    levels: int = Field(1, ge=1, le=3, description="meshes h, h/2, ...; two or more enable extrapolation")
    symmetric: bool = True
    seed: int = Field(0, ge=0)


class SolverConfig(_Strict):
    count: int = Field(10, ge=1, le=500)
    tol: float = Field(1e-10, ge=1e-12, le=1e-4)
    method: Literal["auto", "dense", "sparse"] = "auto"
    cluster_tol: float = Field(1e-6, gt=0, le=0.1, description="relative gap below which eigenvalues form one cluster")


class TaskOptions(_Strict):
    """Task-specific knobs; every task ignores the ones it does not use."""

    partners: list[DomainConfig] = Field(default_factory=list)
    transplant: bool = True
    independent: bool = False
    max_n: int = Field(12, ge=1, le=24)
    eigencount: int = Field(3, ge=1, le=50)
    step: int = Field(24, ge=2)
    lam_lo: float | None = Field(None, ge=0)
    lam_hi: float | None = Field(None, gt=0)
    grid: int = Field(200, ge=2, le=20000)
    direct_count: int = Field(5, ge=1, le=50)
    clusters: int = Field(8, ge=1, le=50)
    source: Literal["fe", "bessel"] = "fe"
    fit_area: bool = False
    t_max: float = Field(0.5, gt=0)
    figures: bool = True
    vtk: bool = False
    matrices: bool = False

    @model_validator(mode="after")
    def _window(self) -> TaskOptions:
        if self.lam_lo is not None and self.lam_hi is not None and self.lam_lo >= self.lam_hi:
            raise ValueError("lam_lo must be below lam_hi")
        return self


class Check(_Strict):
    """Expectation on one report entry, addressed by a dotted path (``modes.0.lambda``)."""

    key: str
    value: float | None = None
    rel_tol: float = Field(1e-3, ge=0)
    abs_tol: float = Field(0.0, ge=0)
    min: float | None = None
    max: float | None = None
    expect: bool | None = None

    @model_validator(mode="after")
    def _has_expectation(self) -> Check:
        if self.value is None and self.min is None and self.max is None and self.expect is None:
            raise ValueError("check needs value, min, max or expect")
        return self


class ExperimentConfig(_Strict):
    name: str = Field(..., pattern=r"^[a-z0-9][a-z0-9_-]*$")
    description: str = ""
    task: TaskName
    domain: DomainConfig | None = None
    mesh: MeshConfig
    solver: SolverConfig = Field(default_factory=SolverConfig)
    options: TaskOptions = Field(default_factory=TaskOptions)
    checks: list[Check] = Field(default_factory=list)
    output: str | None = Field(None, description="output directory; defaults to <output root>/<name>")

    @model_validator(mode="after")
    def _task_domain(self) -> ExperimentConfig:
        if self.domain is None and self.task not in DOMAINLESS_TASKS:
            raise ValueError(f"task {self.task} needs a domain")
        if self.task == "symmetry-pair":
            halves = [self.domain, *self.options.partners]
            if any(d is None or d.family not in HALF_FAMILIES for d in halves):
                raise ValueError("symmetry-pair domains must be half domains")
        if self.task == "cover-check" and self.domain is not None and self.domain.family != "double_cover":
            raise ValueError("cover-check needs the double_cover family")
        if self.task == "compare" and self.domain is not None and self.domain.family in HALF_FAMILIES:
            raise ValueError("compare needs a closed domain, not a half")
        return self


def json_schema() -> dict[str, Any]:
    return ExperimentConfig.model_json_schema()


def parse_config(data: dict[str, Any], source: str = "") -> ExperimentConfig:
    """Validate a config mapping.

    Raises:
        ConfigError: With the pydantic error list in ``details``.
    """
    try:
        return ExperimentConfig.model_validate(data)
    except ValidationError as exc:
        errors = [
            {"loc": ".".join(str(p) for p in err["loc"]), "msg": err["msg"]}
            for err in exc.errors()
        ]
        raise ConfigError("invalid experiment config", source=source, errors=errors) from exc


def load_config(path: str | Path) -> ExperimentConfig:
    path = Path(path)
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise ConfigError("cannot read config", source=str(path), reason=str(exc)) from exc
    except json.JSONDecodeError as exc:
        raise ConfigError("config is not valid JSON", source=str(path), line=exc.lineno) from exc
    if not isinstance(data, dict):
        raise ConfigError("config must be a JSON object", source=str(path))
    return parse_config(data, str(path))
