"""Pipeline pieces shared by the tasks: mesh levels, solves and standard outputs."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import TYPE_CHECKING, Any

import numpy as np
from scipy import sparse

from ..analysis import Extrapolation, length_balance, mode_overlap, richardson
from ..assembly import MatrixPair, assemble
from ..eigensolve import EigenBasis, Spectrum, cluster_multiplicities, solve_lowest
from ..mesh import Mesh, mesh_domain, refine_with_prolongation

if TYPE_CHECKING:
    from ..geometry import DomainSpec
    from ..schema import ExperimentConfig, MeshConfig, SolverConfig
    from ..serialize import Workspace

logger = logging.getLogger(__name__)


@dataclass(eq=False)
class Level:
    """One refinement level: mesh, matrices and the solved eigenpairs."""

    mesh: Mesh
    pair: MatrixPair
    spectrum: Spectrum
    basis: EigenBasis
    prolongation: sparse.csr_matrix | None = None


def mesh_levels(spec: DomainSpec, cfg: MeshConfig, seed_offset: int = 0) -> list[tuple[Mesh, Any]]:
    """Base mesh plus ``levels - 1`` uniform refinements with their prolongations."""
    mesh = mesh_domain(spec, cfg.h, symmetric=cfg.symmetric, seed=cfg.seed + seed_offset)
    out: list[tuple[Mesh, Any]] = [(mesh, None)]
    for _ in range(cfg.levels - 1):
        out.append(refine_with_prolongation(out[-1][0]))
    return out


def solve_on(mesh: Mesh, spec: DomainSpec, solver: SolverConfig, count: int | None = None) -> tuple[MatrixPair, Spectrum, EigenBasis]:
    pair = assemble(mesh, spec.weight)
    wanted = min(count or solver.count, pair.dim)
    spectrum, basis = solve_lowest(pair, wanted, solver.tol, method=solver.method, cluster_tol=solver.cluster_tol)
    return pair, spectrum, basis


def solve_levels(spec: DomainSpec, config: ExperimentConfig, seed_offset: int = 0) -> list[Level]:
    levels = []
    for mesh, prolongation in mesh_levels(spec, config.mesh, seed_offset):
        pair, spectrum, basis = solve_on(mesh, spec, config.solver)
        levels.append(Level(mesh, pair, spectrum, basis, prolongation))
        logger.info("%s level %s: lambda_1 = %.10g", spec.name, mesh.descriptor.get("level"), spectrum.values[0])
    return levels


def extrapolate(levels: list[Level]) -> Extrapolation | None:
    """Richardson on the two finest levels, modes realigned by overlap."""
    if len(levels) < 2:
        return None
    coarse, fine = levels[-2], levels[-1]
    overlap = mode_overlap((coarse.pair, coarse.basis), (fine.pair, fine.basis), fine.prolongation)
    return richardson(coarse.spectrum, fine.spectrum, overlap)


def best_values(levels: list[Level], extrapolation: Extrapolation | None) -> np.ndarray:
    return extrapolation.values if extrapolation is not None else levels[-1].spectrum.values


def spectrum_report(spectrum: Spectrum) -> dict[str, Any]:
    return {
        "values": spectrum.values,
        "residuals": spectrum.residuals,
        "clusters": [{"value": v, "multiplicity": m} for v, m in cluster_multiplicities(spectrum)],
        "method": spectrum.method,
    }


def domain_report(spec: DomainSpec, config: ExperimentConfig, label: str = "domain") -> dict[str, Any]:
    """Solve ``spec`` on every mesh level and describe the result."""
    levels = solve_levels(spec, config)
    extrapolation = extrapolate(levels)
    values = best_values(levels, extrapolation)
    return {
        "label": label,
        "spec": spec.name,
        "levels": [
            {"mesh": lv.mesh.descriptor, "vertices": lv.mesh.n_vertices, **spectrum_report(lv.spectrum)}
            for lv in levels
        ],
        "extrapolated": extrapolation.to_dict() if extrapolation is not None else None,
        "lambda": values,
        "lambda1": float(values[0]),
        "length_balance": length_balance(spec),
        "_levels": levels,
    }


def write_level_outputs(
    workspace: Workspace,
    config: ExperimentConfig,
    label: str,
    spec: DomainSpec,
    levels: list[Level],
) -> list[str]:
    """Mesh files, eigenvalue tables and (optionally) figures and VTK of the finest level."""
    from .. import figures
    from ..serialize import export_matrix, export_vtk

    files = []
    for lv in levels:
        tag = f"{label}-L{lv.mesh.descriptor.get('level', 0)}"
        workspace.write_mesh(f"{tag}.mesh", lv.mesh)
        rows = np.column_stack([np.arange(len(lv.spectrum)), lv.spectrum.values, lv.spectrum.residuals])
        workspace.write_csv(f"{tag}-spectrum.csv", ["index", "lambda", "residual"], rows)
        files += [f"{tag}.mesh", f"{tag}-spectrum.csv"]
        if config.options.matrices:
            export_matrix(lv.pair.stiffness, workspace.path(f"{tag}-stiffness.mtx", "matrix"))
            export_matrix(lv.pair.mass, workspace.path(f"{tag}-mass.mtx", "matrix"))
    finest = levels[-1]
    if config.options.figures:
        figures.plot_domain(spec, workspace.path(f"{label}-domain.svg", "figure"))
        first = finest.pair.scatter(finest.basis.vectors[:, 0])
        figures.plot_eigenfunction(finest.mesh, first, workspace.path(f"{label}-mode0.svg", "figure"), spec,
                                   title=f"lambda = {finest.spectrum.values[0]:.6f}")
        files += [f"{label}-domain.svg", f"{label}-mode0.svg"]
    if config.options.vtk:
        fields = {f"mode{i}": finest.pair.scatter(finest.basis.vectors[:, i]) for i in range(len(finest.spectrum))}
        export_vtk(finest.mesh, workspace.path(f"{label}.vtk", "vtk"), fields)
        files.append(f"{label}.vtk")
    return files


def strip_private(report: dict[str, Any]) -> dict[str, Any]:
    """Drop in-memory entries (keys starting with ``_``) before serialization."""
    return {k: (strip_private(v) if isinstance(v, dict) else v) for k, v in report.items() if not k.startswith("_")}
