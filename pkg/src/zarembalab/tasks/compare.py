"""Dirichlet-Neumann swap comparison, with transplantation on four-copy meshes."""

from __future__ import annotations

import logging
from typing import TYPE_CHECKING, Any

from ..analysis import compare_spectra, length_balance
from ..assembly import assemble
from ..domains import build_spec
from ..eigensolve import Spectrum, cluster_multiplicities, solve_lowest
from ..kit import TaskBase
from ..mesh import mesh_symmetric
from ..transplant import build_transplant, verify_transplantation
from .base import domain_report, spectrum_report, strip_private, write_level_outputs

if TYPE_CHECKING:
    from ..geometry import DomainSpec
    from ..schema import ExperimentConfig
    from ..serialize import Workspace

logger = logging.getLogger(__name__)


class CompareTask(TaskBase):
    name = "compare"
    display_name = "Compare"
    description = "Spectra of a mixed problem and its tag-swapped partner"

    def execute(self, config: ExperimentConfig, workspace: Workspace) -> dict[str, Any]:
        assert config.domain is not None
        spec = build_spec(config.domain)
        if config.options.independent or not config.mesh.symmetric:
            return self._independent(spec, config, workspace)
        return self._shared(spec, config, workspace)

    def _shared(self, spec: DomainSpec, config: ExperimentConfig, workspace: Workspace) -> dict[str, Any]:
        """Both problems on one symmetric mesh: the swap only changes the constrained set."""
        mesh = mesh_symmetric(spec, config.mesh.h)
        pair_i = assemble(mesh, spec.weight)
        pair_ii = assemble(mesh.swapped(), spec.weight)
        count = min(config.solver.count, pair_i.dim, pair_ii.dim)
        s_i, b_i = solve_lowest(pair_i, count, config.solver.tol, method=config.solver.method,
                                  cluster_tol=config.solver.cluster_tol)
        s_ii, _ = solve_lowest(pair_ii, count, config.solver.tol, method=config.solver.method,
                                  cluster_tol=config.solver.cluster_tol)
        nu, diffs = compare_spectra(s_i, s_ii, count)
        report: dict[str, Any] = {
            "mode": "shared-mesh",
            "mesh": mesh.descriptor,
            "vertices": mesh.n_vertices,
            "problem_i": spectrum_report(s_i),
            "problem_ii": spectrum_report(s_ii),
            "nu": nu,
            "diffs": diffs,
            "max_relative_diff": _max_relative(s_i, s_ii, count),
            "same_clusters": _same_clusters(s_i, s_ii),
            "length_balance": length_balance(spec),
        }
        if config.options.transplant and len(mesh.copies) == 4:
            tmap = build_transplant(mesh)
            transplant = verify_transplantation(pair_i, pair_ii, s_i, b_i, tmap)
            report["transplant"] = transplant.to_dict()
            report["transplant"]["orthogonal"] = tmap.is_orthogonal()
            report["transplant"]["eighth_power_identity"] = tmap.eighth_power_is_identity()
            report["transplant"]["quarter_map"] = tmap.reduces_to_quarter_map()
        workspace.write_mesh("shared.mesh", mesh)
        rows = [[i, a, b] for i, (a, b) in enumerate(zip(s_i.values, s_ii.values))]
        workspace.write_csv("spectra.csv", ["index", "lambda_I", "lambda_II"], rows)
        if config.options.figures:
            from .. import figures

            figures.plot_domain(spec, workspace.path("problem-i.svg", "figure"))
            figures.plot_domain(spec.swapped(), workspace.path("problem-ii.svg", "figure"))
            first = pair_i.scatter(b_i.vectors[:, 0])
            figures.plot_eigenfunction(mesh, first, workspace.path("problem-i-mode0.svg", "figure"), spec)
        logger.info("%s: nu over %d modes = %.3e", spec.name, count, nu)
        return report

    def _independent(self, spec: DomainSpec, config: ExperimentConfig, workspace: Workspace) -> dict[str, Any]:
        """Separate unstructured meshes per problem, extrapolated."""
        swapped = spec.swapped()
        first = domain_report(spec, config, "problem-i")
        second = domain_report(swapped, config.model_copy(update={"mesh": config.mesh.model_copy(
            update={"seed": config.mesh.seed + 1})}), "problem-ii")
        a, b = first["lambda"], second["lambda"]
        count = min(len(a), len(b))
        rel = [abs(x - y) / max(abs(x), 1e-12) for x, y in zip(a[:count], b[:count])]
        write_level_outputs(workspace, config, "problem-i", spec, first["_levels"])
        write_level_outputs(workspace, config, "problem-ii", swapped, second["_levels"])
        return {
            "mode": "independent-meshes",
            "problem_i": strip_private(first),
            "problem_ii": strip_private(second),
            "relative_diffs": rel,
            "max_relative_diff": max(rel, default=0.0),
            "length_balance": length_balance(spec),
        }


def _max_relative(a: Spectrum, b: Spectrum, count: int) -> float:
    return max(
        (abs(x - y) / max(abs(x), 1e-12) for x, y in zip(a.values[:count], b.values[:count])),
        default=0.0,
    )


def _same_clusters(a: Spectrum, b: Spectrum) -> bool:
    ma = [m for _, m in cluster_multiplicities(a)]
    mb = [m for _, m in cluster_multiplicities(b)]
    # the last cluster may be cut by the requested count
    return ma[:-1] == mb[:-1]
