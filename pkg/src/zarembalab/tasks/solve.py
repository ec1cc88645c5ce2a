"""Lowest eigenvalues of one domain and its partners."""

from __future__ import annotations

from typing import TYPE_CHECKING, Any

from ..domains import build_spec
from ..kit import TaskBase
from .base import domain_report, strip_private, write_level_outputs

if TYPE_CHECKING:
    from ..schema import ExperimentConfig
    from ..serialize import Workspace


class SolveTask(TaskBase):
    name = "solve"
    display_name = "Solve"
    description = "Lowest eigenvalues on h, h/2, ... with Richardson extrapolation"

    def execute(self, config: ExperimentConfig, workspace: Workspace) -> dict[str, Any]:
        assert config.domain is not None
        reports = []
        for i, cfg in enumerate([config.domain, *config.options.partners]):
            label = "domain" if i == 0 else f"partner{i}"
            spec = build_spec(cfg)
            report = domain_report(spec, config, label)
            report["files"] = write_level_outputs(workspace, config, label, spec, report["_levels"])
            reports.append(strip_private(report))
        out: dict[str, Any] = {"domain": reports[0], "partners": reports[1:]}
        if reports[1:]:
            out["lambda1_gaps"] = [p["lambda1"] - reports[0]["lambda1"] for p in reports[1:]]
        return out
