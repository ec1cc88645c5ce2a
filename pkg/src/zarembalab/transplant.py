"""Transplantation between the two mixed problems of a four-copy domain.

A half-disk (or sectorial domain) mesh built by reflection consists of four
copies ``K1..K4`` of one fundamental block, ordered by angle. A function is a
stack of four block vectors; the transplantation acts on that stack by the
orthogonal matrix :data:`BLOCK_MATRIX` and is scattered back to the vertices.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Any

import numpy as np
from scipy import sparse

from .errors import TransplantError

if TYPE_CHECKING:
    from .assembly import MatrixPair
    from .eigensolve import EigenBasis, Spectrum
    from .mesh import Mesh

logger = logging.getLogger(__name__)

_S = 1.0 / math.sqrt(2.0)
BLOCK_MATRIX = _S * np.array(
    [
        [0.0, 1.0, -1.0, 0.0],
        [1.0, 0.0, 0.0, -1.0],
        [1.0, 0.0, 0.0, 1.0],
        [0.0, 1.0, 1.0, 0.0],
    ]
)
RESIDUAL_TOL = 1e-9
MATCH_TOL = 1e-12
# two-copy map on the quarter-disk: (u1, u2) -> ((u1 - u2), (u1 + u2)) / √2
QUARTER_MATRIX = _S * np.array([[1.0, -1.0], [1.0, 1.0]])
# quarter-disk pair representation of the source: (u1 on K3, K4; u2 on K2, K1)
PAIR_ORDER = (2, 3, 1, 0)
# the target cut along the rotated symmetry line: (v1 on K1, K2 with sign -1; v2 on K4, K3)
PAIR_TARGET_ORDER = (0, 1, 3, 2)
PAIR_TARGET_SIGNS = (-1.0, -1.0, 1.0, 1.0)


@dataclass(frozen=True, eq=False)
class TransplantMap:
    """Vertex-level transplantation ``v = T u`` over the full vertex set.

    Rows carry at most two nonzeros ``±1/√2``. Shared vertices between copies
    take the formula of the first copy in angular order.
    """

    matrix: sparse.csr_matrix
    block: np.ndarray
    blocks: np.ndarray
    direction: str = "forward"

    @property
    def n_vertices(self) -> int:
        return self.matrix.shape[0]

    def apply(self, u: np.ndarray) -> np.ndarray:
        return self.matrix @ u

    def apply_blocks(self, u: np.ndarray) -> tuple[np.ndarray, float]:
        """Gather, transform, scatter; also returns the largest disagreement on shared vertices."""
        u = np.asarray(u, dtype=float)
        stacked = u[self.blocks]
        image = np.tensordot(self.block, stacked, axes=(1, 0))
        out = np.full(u.shape, np.nan)
        defect = 0.0
        for k in range(4):
            target = self.blocks[k]
            seen = ~np.isnan(out[target])
            if np.any(seen):
                defect = max(defect, float(np.max(np.abs(out[target][seen] - image[k][seen]))))
            fresh = ~seen
            out[target[fresh]] = image[k][fresh]
        return out, defect

    def inverse(self) -> TransplantMap:
        """``T⁻¹ = Tᵀ = T⁷`` on the block level."""
        direction = "inverse" if self.direction == "forward" else "forward"
        return _from_blocks(self.blocks, self.block.T, direction)

    def pair_matrix(self) -> np.ndarray:
        """Block matrix on the quarter-disk two-copy representations of source and target."""
        source = np.eye(4)[list(PAIR_ORDER)]
        target = np.diag(PAIR_TARGET_SIGNS) @ np.eye(4)[list(PAIR_TARGET_ORDER)]
        return target @ self.block @ source.T

    def quarter_map(self, tol: float = 1e-12) -> np.ndarray:
        """The 2×2 map acting pointwise on ``(u1, u2)`` over the quarter-disk.

        Raises:
            TransplantError: The block map does not act copy-wise on the pair.
        """
        pair = self.pair_matrix()
        quarter = pair[::2, ::2]
        if not np.allclose(pair, np.kron(quarter, np.eye(2)), atol=tol):
            raise TransplantError("block map does not reduce to the quarter-disk pair",
                                  direction=self.direction)
        return quarter

    def reduces_to_quarter_map(self, tol: float = 1e-12) -> bool:
        try:
            quarter = self.quarter_map(tol)
        except TransplantError:
            return False
        return bool(np.allclose(quarter, QUARTER_MATRIX, atol=tol))

    def is_orthogonal(self, tol: float = 1e-12) -> bool:
        return bool(np.allclose(self.block.T @ self.block, np.eye(4), atol=tol))

    def eighth_power_is_identity(self, tol: float = 1e-12) -> bool:
        return bool(np.allclose(np.linalg.matrix_power(self.block, 8), np.eye(4), atol=tol))


def _from_blocks(blocks: np.ndarray, block: np.ndarray, direction: str) -> TransplantMap:
    n = int(blocks.max()) + 1
    owner = np.full(n, -1)
    local = np.full(n, -1)
    for k in range(4):
        fresh = owner[blocks[k]] < 0
        owner[blocks[k][fresh]] = k
        local[blocks[k][fresh]] = np.flatnonzero(fresh)
    rows, cols, vals = [], [], []
    for v in range(n):
        k, i = owner[v], local[v]
        for j in range(4):
            if block[k, j] != 0.0:
                rows.append(v)
                cols.append(blocks[j][i])
                vals.append(block[k, j])
    matrix = sparse.csr_matrix((vals, (rows, cols)), shape=(n, n))
    return TransplantMap(matrix=matrix, block=block, blocks=blocks, direction=direction)


def copy_order(mesh: Mesh) -> list[int]:
    """Copies sorted by the mean angle of their triangles about the common apex."""
    if len(mesh.copies) != 4 or mesh.triangle_copy is None:
        raise TransplantError("transplantation needs a mesh made of four reflected copies",
                              copies=len(mesh.copies))
    centroids = mesh.vertices[mesh.triangles].mean(axis=1)
    apex = _common_point(mesh)
    angles = []
    for k in range(4):
        c = centroids[mesh.triangle_copy == k].mean(axis=0) - apex
        angles.append(math.atan2(c[1], c[0]))
    first = angles[0]
    rel = [(a - first) % (2 * math.pi) for a in angles]
    if max(rel) > math.pi:
        # clockwise fan
        rel = [(-r) % (2 * math.pi) for r in rel]
    if max(rel) > math.pi:
        raise TransplantError("copies do not form a fan around the apex", angles=angles)
    return sorted(range(4), key=lambda k: rel[k])


def _common_point(mesh: Mesh) -> np.ndarray:
    shared = set(mesh.copies[0].tolist())
    for c in mesh.copies[1:]:
        shared &= set(c.tolist())
    if len(shared) != 1:
        raise TransplantError("copies do not meet in a single apex vertex", shared=len(shared))
    return mesh.vertices[shared.pop()]


def build_transplant(mesh: Mesh) -> TransplantMap:
    """Transplantation on a four-copy half-disk or sectorial mesh.

    The copy maps recorded by the reflection meshing give, for every
    fundamental vertex, its four images; the map mixes them with ``±1/√2``.
    """
    order = copy_order(mesh)
    blocks = np.stack([mesh.copies[k] for k in order])
    tmap = _from_blocks(blocks, BLOCK_MATRIX, "forward")
    logger.debug("transplant map on %d vertices, copy order %s", mesh.n_vertices, order)
    return tmap


@dataclass(frozen=True)
class TransplantReport:
    """Per-mode residuals of ``v = T u`` in the target problem."""

    values: list[float]
    residuals: list[float]
    norm_defects: list[float]
    constraint_defects: list[float]
    match_defects: list[float]
    tol: float = RESIDUAL_TOL
    details: dict[str, Any] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return not self.failures

    @property
    def failures(self) -> list[int]:
        bad = []
        rows = zip(self.residuals, self.norm_defects, self.constraint_defects, self.match_defects)
        for i, (r, n, c, m) in enumerate(rows):
            if not (r <= self.tol and n <= self.tol and c <= MATCH_TOL and m <= MATCH_TOL):
                bad.append(i)
        return bad

    @property
    def max_residual(self) -> float:
        return max(self.residuals, default=0.0)

    def to_dict(self) -> dict[str, Any]:
        return {
            "passed": self.passed,
            "tol": self.tol,
            "max_residual": self.max_residual,
            "modes": [
                {"index": i, "lambda": lam, "residual": r, "norm_defect": n,
                 "constraint_defect": c, "match_defect": m}
                for i, (lam, r, n, c, m) in enumerate(zip(
                    self.values, self.residuals, self.norm_defects,
                    self.constraint_defects, self.match_defects))
            ],
            "failures": self.failures,
            **self.details,
        }


def verify_transplantation(
    problem_i: MatrixPair,
    problem_ii: MatrixPair,
    spectrum: Spectrum,
    basis: EigenBasis,
    tmap: TransplantMap,
    tol: float = RESIDUAL_TOL,
) -> TransplantReport:
    """Transplant every eigenvector of Problem I and test it in Problem II.

    Residuals are ``‖K_II v - λ M_II v‖ / ‖M_II v‖`` relative to ``max(1, λ)``.
    """
    if problem_i.n_vertices != tmap.n_vertices or problem_ii.n_vertices != tmap.n_vertices:
        raise TransplantError("problems and map live on different meshes")
    residuals, norms, constraints, matches = [], [], [], []
    for lam, u_free in zip(spectrum.values, basis.vectors.T):
        u = problem_i.scatter(u_free)
        v, match = tmap.apply_blocks(u)
        constraint = float(np.max(np.abs(v[problem_ii.constrained]), initial=0.0))
        vf = problem_ii.gather(v)
        mv = problem_ii.mass @ vf
        res = np.linalg.norm(problem_ii.stiffness @ vf - lam * mv) / (np.linalg.norm(mv) * max(1.0, abs(lam)))
        norm_u = math.sqrt(float(u @ (problem_i.full_mass @ u)))
        norm_v = math.sqrt(float(v @ (problem_ii.full_mass @ v)))
        residuals.append(float(res))
        norms.append(abs(norm_v - norm_u) / norm_u)
        constraints.append(constraint)
        matches.append(match)
    report = TransplantReport(
        values=[float(x) for x in spectrum.values],
        residuals=residuals,
        norm_defects=norms,
        constraint_defects=constraints,
        match_defects=matches,
        tol=tol,
    )
    if report.passed:
        logger.info("transplantation verified on %d modes (max residual %.2e)", len(residuals), report.max_residual)
    else:
        logger.warning("transplantation failed on modes %s", report.failures)
    return report
