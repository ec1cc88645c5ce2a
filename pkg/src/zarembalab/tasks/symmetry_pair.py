"""First eigenvalues of the axisymmetric and centrally symmetric doubles of a half domain."""

from __future__ import annotations

import logging
from typing import TYPE_CHECKING, Any

from ..analysis import symmetry_pair_check
from ..domains import build_domain
from ..geometry import HalfDomain, build_symmetry_pair
from ..kit import TaskBase

if TYPE_CHECKING:
    from ..schema import ExperimentConfig
    from ..serialize import Workspace

logger = logging.getLogger(__name__)


class SymmetryPairTask(TaskBase):
    name = "symmetry-pair"
    display_name = "Symmetry pair"
    description = "lambda_1 of the axisymmetric double never exceeds the central one"

    def execute(self, config: ExperimentConfig, workspace: Workspace) -> dict[str, Any]:
        assert config.domain is not None
        reports = []
        for cfg in [config.domain, *config.options.partners]:
            half = build_domain(cfg)
            assert isinstance(half, HalfDomain)
            report = symmetry_pair_check(half, config.mesh.h)
            reports.append(report.to_dict())
            if config.options.figures:
                from .. import figures

                for spec in build_symmetry_pair(half):
                    figures.plot_domain(spec, workspace.path(f"{spec.name}.svg", "figure"))
        workspace.write_csv(
            "pairs.csv",
            ["lambda_axisymmetric", "lambda_central", "margin", "error"],
            [[r["lambda_axisymmetric"], r["lambda_central"], r["margin"], r["error"]] for r in reports],
        )
        return {
            "pairs": reports,
            "all_passed": all(r["passed"] for r in reports),
            "warnings": [f"{r['name']}: {w}" for r in reports for w in r["warnings"]],
        }
