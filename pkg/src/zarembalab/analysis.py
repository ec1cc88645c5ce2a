"""Spectrum comparison, extrapolation and the derived checks built on them."""

from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Any

import numpy as np
from scipy import sparse, special

from .assembly import MatrixPair, assemble
from .eigensolve import DEFAULT_TOL, EigenBasis, Spectrum, solve_lowest, solve_matrices
from .errors import LabError, NumericalError
from .geometry import (
    BoundaryTag,
    DomainSpec,
    HalfDomain,
    MetricWeight,
    boundary_lengths,
    build_disk_partition,
    build_symmetry_pair,
    is_trivial_decomposition,
)
from .mesh import Mesh, mesh_symmetric, refine_with_prolongation

if TYPE_CHECKING:
    from collections.abc import Iterable

logger = logging.getLogger(__name__)

OVERLAP_THRESHOLD = 0.8
HEAT_POINTS = 64
HEAT_TAIL = 30.0
HEAT_T_MAX = 0.5
TRUNCATION_LIMIT = 1e-12
SWEEP_STEP = 24
SWEEP_MAX = 12
# half-order heat coefficient: c = (L_N - L_D) / (8 √π)
HALF_ORDER_SCALE = 8.0 * math.sqrt(math.pi)


def compare_spectra(a: Spectrum, b: Spectrum, count: int) -> tuple[float, list[float]]:
    """Euclidean distance ``ν`` between the first ``count`` values and the differences."""
    if len(a) < count or len(b) < count:
        raise NumericalError("spectra shorter than the compared count", count=count, a=len(a), b=len(b))
    diffs = np.asarray(a.values[:count]) - np.asarray(b.values[:count])
    return float(np.linalg.norm(diffs)), diffs.tolist()


# ---------------------------------------------------------------------------
# Richardson extrapolation


@dataclass(frozen=True)
class Extrapolation:
    """Per-mode ``λ* = (4 λ_{h/2} - λ_h) / 3`` with error ``|λ_{h/2} - λ_h| / 3``."""

    values: np.ndarray
    errors: np.ndarray
    coarse: np.ndarray
    fine: np.ndarray
    order: list[int]
    non_monotone: list[int] = field(default_factory=list)

    def to_dict(self) -> dict[str, Any]:
        return {
            "values": self.values.tolist(),
            "errors": self.errors.tolist(),
            "coarse": self.coarse.tolist(),
            "fine": self.fine.tolist(),
            "order": self.order,
            "non_monotone": self.non_monotone,
        }


def mode_overlap(
    coarse: tuple[MatrixPair, EigenBasis],
    fine: tuple[MatrixPair, EigenBasis],
    prolongation: sparse.spmatrix,
) -> np.ndarray:
    """``|V_fineᵀ M P V_coarse|`` with the prolongation restricted to free DOFs."""
    pair_c, basis_c = coarse
    pair_f, basis_f = fine
    p_free = prolongation.tocsr()[pair_f.dof_map][:, pair_c.dof_map]
    return np.abs(basis_f.vectors.T @ (pair_f.mass @ (p_free @ basis_c.vectors)))


def _realign(overlap: np.ndarray, count: int) -> list[int]:
    order: list[int | None] = [None] * count
    used: set[int] = set()
    for j in range(count):
        i = int(np.argmax(overlap[:, j]))
        if overlap[i, j] >= OVERLAP_THRESHOLD and i not in used and i < count:
            order[j] = i
            used.add(i)
    spare = iter(i for i in range(count) if i not in used)
    return [i if i is not None else next(spare) for i in order]


def richardson(s_h: Spectrum, s_h2: Spectrum, overlap: np.ndarray | None = None) -> Extrapolation:
    """Extrapolate two refinement levels assuming O(h²) convergence.

    With ``overlap`` (rows fine modes, columns coarse modes) fine modes are
    reordered to their best-matching coarse mode before extrapolating. Pairs
    with ``λ_{h/2} > λ_h`` are flagged as non-monotone.
    """
    count = min(len(s_h), len(s_h2))
    if count == 0:
        raise NumericalError("nothing to extrapolate")
    order = list(range(count)) if overlap is None else _realign(overlap, count)
    coarse = np.asarray(s_h.values[:count], dtype=float)
    fine = np.asarray(s_h2.values, dtype=float)[order]
    values = (4.0 * fine - coarse) / 3.0
    errors = np.abs(fine - coarse) / 3.0
    scale = np.maximum(1.0, np.abs(coarse))
    flagged = [int(i) for i in np.flatnonzero(fine > coarse + 1e-12 * scale)]
    if flagged:
        logger.warning("non-monotone refinement on modes %s", flagged)
    return Extrapolation(values, errors, coarse, fine, order, flagged)


def extrapolate_lowest(
    mesh: Mesh,
    weight: MetricWeight,
    count: int,
    *,
    tol: float = DEFAULT_TOL,
    realign: bool = True,
) -> tuple[Extrapolation, list[dict[str, Any]]]:
    """Solve on ``mesh`` and its uniform refinement and extrapolate.

    Returns the extrapolation and the two mesh descriptors.
    """
    fine_mesh, prolongation = refine_with_prolongation(mesh)
    pair_c = assemble(mesh, weight)
    pair_f = assemble(fine_mesh, weight)
    s_c, b_c = solve_lowest(pair_c, count, tol)
    s_f, b_f = solve_lowest(pair_f, count, tol)
    overlap = mode_overlap((pair_c, b_c), (pair_f, b_f), prolongation) if realign else None
    return richardson(s_c, s_f, overlap), [dict(mesh.descriptor), dict(fine_mesh.descriptor)]


# ---------------------------------------------------------------------------
# Disk partition sweep


@dataclass
class NuTable:
    """``ν(k, n)`` over angles ``kπ/24 ≤ nπ/24``; cells are keyed, so fill order is irrelevant."""

    max_n: int = SWEEP_MAX
    eigencount: int = 3
    step: int = SWEEP_STEP
    nu: dict[tuple[int, int], float] = field(default_factory=dict)
    trivial: dict[tuple[int, int], str] = field(default_factory=dict)
    failures: dict[tuple[int, int], str] = field(default_factory=dict)
    descriptor: dict[str, Any] = field(default_factory=dict)

    def cells(self) -> list[tuple[int, int]]:
        return [(k, n) for n in range(1, self.max_n + 1) for k in range(1, n + 1)]

    def matrix(self) -> np.ndarray:
        """``(max_n, max_n)`` array with ν at ``[k-1, n-1]`` and NaN elsewhere."""
        out = np.full((self.max_n, self.max_n), np.nan)
        for (k, n), value in self.nu.items():
            out[k - 1, n - 1] = value
        return out

    def diagonal(self) -> dict[int, float]:
        return {k: v for (k, n), v in self.nu.items() if k == n}

    def nontrivial(self) -> dict[tuple[int, int], float]:
        return {cell: v for cell, v in self.nu.items() if cell not in self.trivial}

    def nontrivial_min(self) -> tuple[tuple[int, int], float] | None:
        cells = self.nontrivial()
        if not cells:
            return None
        best = min(cells, key=lambda c: cells[c])
        return best, cells[best]

    def separation(self) -> float:
        """Smallest nontrivial ν over the largest diagonal ν."""
        diag = [v for v in self.diagonal().values()]
        best = self.nontrivial_min()
        if not diag or best is None:
            return float("nan")
        worst = max(diag)
        return math.inf if worst == 0 else best[1] / worst

    def to_dict(self) -> dict[str, Any]:
        best = self.nontrivial_min()
        return {
            "step": f"pi/{self.step}",
            "eigencount": self.eigencount,
            "cells": [
                {"k": k, "n": n, "nu": self.nu.get((k, n)), "trivial": self.trivial.get((k, n)),
                 "failure": self.failures.get((k, n))}
                for k, n in self.cells()
            ],
            "nontrivial_min": None if best is None else {"k": best[0][0], "n": best[0][1], "nu": best[1]},
            "separation": self.separation(),
            "descriptor": self.descriptor,
        }


def sweep_cell(k: int, n: int, h: float, count: int = 3, step: int = SWEEP_STEP) -> tuple[float, str | None]:
    """``ν(k, n)`` on one symmetric mesh shared by both tag layouts.

    Returns the value and, for trivial decompositions, the name of the isometry.
    """
    alpha, beta = k * math.pi / step, n * math.pi / step
    spec, swapped = build_disk_partition(alpha, beta)
    mesh = mesh_symmetric(spec, h)
    flat = MetricWeight.flat()
    s_i, _ = solve_lowest(assemble(mesh, flat), count)
    s_ii, _ = solve_lowest(assemble(mesh.swapped(), flat), count)
    nu, _ = compare_spectra(s_i, s_ii, count)
    iso = is_trivial_decomposition(spec, swapped)
    return nu, (iso.name or "isometry") if iso is not None else None


def sweep_disk(
    h: float,
    eigencount: int = 3,
    max_n: int = SWEEP_MAX,
    step: int = SWEEP_STEP,
    threads: int = 1,
    cells: Iterable[tuple[int, int]] | None = None,
) -> NuTable:
    """Fill the ν table; a failing cell is recorded and the sweep goes on."""
    table = NuTable(max_n=max_n, eigencount=eigencount, step=step,
                    descriptor={"h": h, "kind": "symmetric", "weight": "flat"})
    todo = list(cells) if cells is not None else table.cells()

    def run(cell: tuple[int, int]) -> tuple[tuple[int, int], float | None, str | None, str | None]:
        try:
            nu, trivial = sweep_cell(*cell, h=h, count=eigencount, step=step)
            return cell, nu, trivial, None
        except LabError as exc:
            logger.warning("sweep cell %s failed: %s", cell, exc.message)
            return cell, None, None, f"{exc.kind}: {exc.message}"

    with ThreadPoolExecutor(max_workers=max(1, threads)) as pool:
        for done, (cell, nu, trivial, failure) in enumerate(pool.map(run, todo), start=1):
            if nu is not None:
                table.nu[cell] = nu
            if trivial is not None:
                table.trivial[cell] = trivial
            if failure is not None:
                table.failures[cell] = failure
            logger.debug("sweep %d/%d: cell %s", done, len(todo), cell)
    logger.info("disk sweep: %d cells, %d failures", len(table.nu), len(table.failures))
    return table


# ---------------------------------------------------------------------------
# Heat trace


@dataclass(frozen=True)
class HeatFit:
    """Fit of ``Z(t) ≈ A/(4πt) + c/√t + d`` on a geometric time window."""

    area: float
    c: float
    d: float
    window: tuple[float, float]
    residual: float
    eigencount: int
    area_fitted: bool = False

    @property
    def implied_imbalance(self) -> float:
        """Implied ``L_N - L_D``."""
        return HALF_ORDER_SCALE * self.c

    @property
    def sign(self) -> int:
        return int(np.sign(self.c))

    def to_dict(self) -> dict[str, Any]:
        return {
            "area": self.area,
            "c": self.c,
            "d": self.d,
            "window": list(self.window),
            "residual": self.residual,
            "eigencount": self.eigencount,
            "area_fitted": self.area_fitted,
            "implied_imbalance": self.implied_imbalance,
            "sign": self.sign,
        }


def heat_window(values: np.ndarray, t_max: float = HEAT_T_MAX) -> tuple[float, float]:
    return HEAT_TAIL / float(values[-1]), t_max


def heat_fit(
    values: Any,
    area: float,
    window: tuple[float, float] | None = None,
    *,
    fit_area: bool = False,
    points: int = HEAT_POINTS,
) -> HeatFit:
    """Least-squares fit of the truncated heat trace ``Σ exp(-λ_i t)``.

    The area term is held at ``area`` unless ``fit_area`` is set.

    Raises:
        NumericalError: the truncation tail ``exp(-λ_N t_lo)`` exceeds 1e-12
            or the window is empty.
    """
    lam = np.sort(np.asarray(getattr(values, "values", values), dtype=float))
    if lam.size == 0 or lam[-1] <= 0:
        raise NumericalError("heat fit needs positive eigenvalues", count=int(lam.size))
    t_lo, t_hi = window or heat_window(lam)
    if not 0 < t_lo < t_hi:
        raise NumericalError("heat window is empty; use more eigenvalues or a larger t", window=(t_lo, t_hi))
    tail = math.exp(-lam[-1] * t_lo)
    if tail > TRUNCATION_LIMIT:
        raise NumericalError("truncated heat trace is not converged at the window start; "
                             "use more eigenvalues or a larger t",
                             tail=tail, lambda_max=float(lam[-1]), t_lo=t_lo)
    t = np.geomspace(t_lo, t_hi, points)
    z = np.exp(-np.outer(t, lam)).sum(axis=1)
    columns = [1.0 / np.sqrt(t), np.ones_like(t)]
    target = z
    if fit_area:
        columns.insert(0, 1.0 / (4.0 * math.pi * t))
    else:
        target = z - area / (4.0 * math.pi * t)
    design = np.column_stack(columns)
    coef, *_ = np.linalg.lstsq(design, target, rcond=None)
    residual = float(np.linalg.norm(design @ coef - target) / np.linalg.norm(z))
    if fit_area:
        area, c, d = (float(x) for x in coef)
    else:
        c, d = (float(x) for x in coef)
    fit = HeatFit(area=float(area), c=c, d=d, window=(t_lo, t_hi), residual=residual,
                  eigencount=int(lam.size), area_fitted=fit_area)
    logger.debug("heat fit: c=%.6g implied L_N-L_D=%.6g", c, fit.implied_imbalance)
    return fit


def bessel_disk_spectrum(count: int, tag: BoundaryTag = BoundaryTag.DIRICHLET) -> np.ndarray:
    """Lowest ``count`` unit-disk eigenvalues from Bessel zeros, with multiplicity.

    Angular orders ``m ≥ 1`` count twice; the Neumann spectrum includes 0.
    """
    if count < 1:
        raise NumericalError("count must be positive", count=count)
    zeros = special.jn_zeros if tag is BoundaryTag.DIRICHLET else special.jnp_zeros
    found: list[float] = [0.0] if tag is BoundaryTag.NEUMANN else []
    found += (zeros(0, count) ** 2).tolist()
    m = 1
    while True:
        cutoff = sorted(found)[count - 1] if len(found) >= count else math.inf
        first = zeros(m, 1)[0] ** 2
        if first > cutoff:
            break
        roots = zeros(m, count) ** 2
        for value in roots[roots <= cutoff]:
            found += [float(value), float(value)]
        m += 1
    return np.sort(np.asarray(found))[:count]


# ---------------------------------------------------------------------------
# Double cover


def sheet_swap_basis(pair: MatrixPair, perm: np.ndarray, parity: int = -1) -> sparse.csr_matrix:
    """Orthonormal basis of the ``parity`` eigenspace of a vertex involution, over free DOFs.

    Odd vectors are ``(e_x - e_Tx)/√2`` for ``x < Tx``; the even basis adds
    ``e_x`` for every fixed point.

    Raises:
        NumericalError: the involution sends a free DOF to a constrained one.
    """
    perm = np.asarray(perm, dtype=np.int64)
    if not np.array_equal(perm[perm], np.arange(len(perm))):
        raise NumericalError("sheet swap is not an involution")
    position = np.full(pair.n_vertices, -1)
    position[pair.dof_map] = np.arange(pair.dim)
    images = perm[pair.dof_map]
    if np.any(position[images] < 0):
        raise NumericalError("sheet-swap projector is rank deficient: free DOFs map to constrained ones",
                             count=int(np.sum(position[images] < 0)))
    x = pair.dof_map
    tx = images
    lead = x < tx
    rows, cols, vals = [], [], []
    s = 1.0 / math.sqrt(2.0)
    for col, (a, b) in enumerate(zip(position[x[lead]], position[tx[lead]])):
        rows += [a, b]
        cols += [col, col]
        vals += [s, s * parity]
    ncols = int(lead.sum())
    if parity > 0:
        for a in position[x[x == tx]]:
            rows.append(a)
            cols.append(ncols)
            vals.append(1.0)
            ncols += 1
    return sparse.csr_matrix((vals, (rows, cols)), shape=(pair.dim, ncols))


def cover_odd_spectrum(
    cover: MatrixPair,
    sheet_swap: np.ndarray,
    count: int,
    parity: int = -1,
    tol: float = DEFAULT_TOL,
) -> Spectrum:
    """Spectrum of the cover problem restricted to the sheet-swap ``parity`` subspace."""
    basis = sheet_swap_basis(cover, sheet_swap, parity)
    k = (basis.T @ cover.stiffness @ basis).tocsr()
    m = (basis.T @ cover.mass @ basis).tocsr()
    spectrum, _ = solve_matrices(k, m, count, tol)
    spectrum.descriptor.update({**cover.descriptor, "subspace": "odd" if parity < 0 else "even"})
    return spectrum


# ---------------------------------------------------------------------------
# Necessary condition and symmetry pairs


def length_balance(spec: DomainSpec, tol: float = 1e-9) -> dict[str, Any]:
    """Compare the Dirichlet and Neumann boundary lengths under the domain weight."""
    dirichlet, neumann = boundary_lengths(spec)
    balanced = abs(dirichlet - neumann) <= tol * max(1.0, dirichlet + neumann)
    verdict = "balanced" if balanced else "not isospectral: Dirichlet and Neumann lengths differ"
    return {"dirichlet": dirichlet, "neumann": neumann, "difference": neumann - dirichlet,
            "balanced": balanced, "verdict": verdict}


@dataclass(frozen=True)
class SymmetryPairReport:
    """First eigenvalues of the axisymmetric and centrally symmetric domains of one half."""

    name: str
    axisymmetric: Extrapolation
    central: Extrapolation
    d1_symmetric: bool
    equality_tol: float = 1e-8

    @property
    def margin(self) -> float:
        return float(self.central.values[0] - self.axisymmetric.values[0])

    @property
    def error(self) -> float:
        return float(self.central.errors[0] + self.axisymmetric.errors[0])

    @property
    def status(self) -> str:
        if abs(self.margin) <= max(self.error, self.equality_tol * abs(self.axisymmetric.values[0])):
            return "equal"
        return "strict" if self.margin > 0 else "violated"

    @property
    def passed(self) -> bool:
        if self.d1_symmetric:
            return self.status == "equal"
        return self.margin >= -self.error

    @property
    def warnings(self) -> list[str]:
        """Outcomes that pass but are not expected for this half."""
        if not self.d1_symmetric and self.status == "equal":
            return ["equal eigenvalues without a perpendicular symmetry axis; refine the mesh"]
        return []

    def to_dict(self) -> dict[str, Any]:
        return {
            "name": self.name,
            "lambda_axisymmetric": float(self.axisymmetric.values[0]),
            "lambda_central": float(self.central.values[0]),
            "margin": self.margin,
            "error": self.error,
            "d1_symmetric": self.d1_symmetric,
            "status": self.status,
            "passed": self.passed,
            "warnings": self.warnings,
        }


def symmetry_pair_check(half: HalfDomain, h: float) -> SymmetryPairReport:
    """Compare ``λ₁`` of the two domains generated by ``half`` (extrapolated from h, h/2)."""
    axisymmetric, central = build_symmetry_pair(half)
    results = []
    for spec in (axisymmetric, central):
        extrapolation, _ = extrapolate_lowest(mesh_symmetric(spec, h), spec.weight, 1, realign=False)
        results.append(extrapolation)
    report = SymmetryPairReport(
        name=half.name,
        axisymmetric=results[0],
        central=results[1],
        d1_symmetric=bool(axisymmetric.metadata.get("d1_symmetric")),
    )
    logger.info("symmetry pair %s: margin %.3e (error %.1e), %s", half.name, report.margin, report.error, report.status)
    for warning in report.warnings:
        logger.warning("symmetry pair %s: %s", half.name, warning)
    return report
