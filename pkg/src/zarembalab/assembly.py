"""Piecewise-linear stiffness and weighted mass matrices.

Element matrices follow the cotangent form of the P1 Laplacian. The weighted
mass uses the three-point edge-midpoint rule, which is exact for the flat case.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Any

import numpy as np
from scipy import linalg, sparse
from scipy.sparse.linalg import splu

from .errors import NumericalError, SingularShiftError

if TYPE_CHECKING:
    from .geometry import MetricWeight
    from .mesh import Mesh

logger = logging.getLogger(__name__)

SINGULAR_RTOL = 1e-13


@dataclass(frozen=True, eq=False)
class MatrixPair:
    """Free-DOF generalized eigenproblem ``K u = λ M u``.

    ``full_stiffness`` and ``full_mass`` keep the unconstrained matrices over
    every mesh vertex so other constraint sets can be derived without
    reassembling.
    """

    stiffness: sparse.csr_matrix
    mass: sparse.csr_matrix
    dof_map: np.ndarray
    constrained: np.ndarray
    full_stiffness: sparse.csr_matrix
    full_mass: sparse.csr_matrix
    descriptor: dict[str, Any] = field(default_factory=dict)

    @property
    def dim(self) -> int:
        return len(self.dof_map)

    @property
    def n_vertices(self) -> int:
        return self.full_stiffness.shape[0]

    def scatter(self, values: np.ndarray) -> np.ndarray:
        """Free-DOF vector(s) to full vertex vector(s), zero on constrained vertices."""
        values = np.asarray(values)
        out = np.zeros((self.n_vertices, *values.shape[1:]), dtype=values.dtype)
        out[self.dof_map] = values
        return out

    def gather(self, values: np.ndarray) -> np.ndarray:
        return np.asarray(values)[self.dof_map]

    def with_constraints(self, constrained: np.ndarray) -> MatrixPair:
        """Same full matrices with another Dirichlet vertex set."""
        return _restrict(self.full_stiffness, self.full_mass, constrained, self.descriptor)


def _element_geometry(vertices: np.ndarray, triangles: np.ndarray) -> tuple[np.ndarray, ...]:
    v1, v2, v3 = (vertices[triangles[:, k]] for k in range(3))
    e1, e2, e3 = v3 - v2, v1 - v3, v2 - v1
    area = 0.5 * (e3[:, 0] * (-e2[:, 1]) - e3[:, 1] * (-e2[:, 0]))
    return e1, e2, e3, area


def stiffness_matrix(vertices: np.ndarray, triangles: np.ndarray) -> sparse.csr_matrix:
    """P1 stiffness over all vertices (no boundary conditions)."""
    e1, e2, e3, area = _element_geometry(vertices, triangles)
    if np.any(area <= 0):
        raise NumericalError("inverted or degenerate triangle in stiffness assembly",
                             triangle=int(np.argmin(area)))
    vol = 4.0 * area
    a12 = np.sum(e1 * e2, axis=1) / vol
    a23 = np.sum(e2 * e3, axis=1) / vol
    a31 = np.sum(e3 * e1, axis=1) / vol
    a11, a22, a33 = -a12 - a31, -a12 - a23, -a31 - a23
    t = triangles
    rows = np.concatenate([t[:, 0], t[:, 1], t[:, 1], t[:, 2], t[:, 2], t[:, 0], t[:, 0], t[:, 1], t[:, 2]])
    cols = np.concatenate([t[:, 1], t[:, 0], t[:, 2], t[:, 1], t[:, 0], t[:, 2], t[:, 0], t[:, 1], t[:, 2]])
    vals = np.concatenate([a12, a12, a23, a23, a31, a31, a11, a22, a33])
    n = len(vertices)
    return sparse.csr_matrix((vals, (rows, cols)), shape=(n, n))


def mass_matrix(vertices: np.ndarray, triangles: np.ndarray, weight: MetricWeight) -> sparse.csr_matrix:
    """Weighted P1 mass ``∫ f(|z|) φ_i φ_j`` by the edge-midpoint rule.

    At the midpoint of edge ``ab`` both ``φ_a`` and ``φ_b`` equal 1/2, so with
    flat weight the rule reproduces ``area/6`` on the diagonal and ``area/12``
    off it.
    """
    *_, area = _element_geometry(vertices, triangles)
    p = vertices[triangles]
    # midpoints of the edges opposite to local vertex 0, 1, 2
    w = np.column_stack([weight.at_points(0.5 * (p[:, (k + 1) % 3] + p[:, (k + 2) % 3])) for k in range(3)])
    if np.any(w <= 0) or np.any(area <= 0):
        raise NumericalError("mass matrix is not positive definite",
                             min_weight=float(w.min()), min_area=float(area.min()))
    scale = area / 12.0
    rows, cols, vals = [], [], []
    for i in range(3):
        for j in range(3):
            if i == j:
                # both edges through vertex i: opposite to the other two vertices
                value = scale * (w[:, (i + 1) % 3] + w[:, (i + 2) % 3])
            else:
                value = scale * w[:, 3 - i - j]
            rows.append(triangles[:, i])
            cols.append(triangles[:, j])
            vals.append(value)
    n = len(vertices)
    return sparse.csr_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(n, n)
    )


def assemble_full(mesh: Mesh, weight: MetricWeight) -> tuple[sparse.csr_matrix, sparse.csr_matrix]:
    return stiffness_matrix(mesh.vertices, mesh.triangles), mass_matrix(mesh.vertices, mesh.triangles, weight)


def _restrict(
    stiffness: sparse.csr_matrix,
    mass: sparse.csr_matrix,
    constrained: np.ndarray,
    descriptor: dict[str, Any],
) -> MatrixPair:
    n = stiffness.shape[0]
    constrained = np.unique(np.asarray(constrained, dtype=np.int64))
    free_mask = np.ones(n, dtype=bool)
    free_mask[constrained] = False
    dof_map = np.flatnonzero(free_mask)
    return MatrixPair(
        stiffness=stiffness[dof_map][:, dof_map].tocsr(),
        mass=mass[dof_map][:, dof_map].tocsr(),
        dof_map=dof_map,
        constrained=constrained,
        full_stiffness=stiffness,
        full_mass=mass,
        descriptor=descriptor,
    )


def assemble(mesh: Mesh, weight: MetricWeight, constrained: np.ndarray | None = None) -> MatrixPair:
    """Assemble ``(K, M)`` and eliminate the Dirichlet vertices.

    Dirichlet vertices default to every vertex of a Dirichlet-tagged edge, so
    junction vertices are constrained.
    """
    stiffness, mass = assemble_full(mesh, weight)
    if constrained is None:
        constrained = mesh.dirichlet_vertices()
    pair = _restrict(stiffness, mass, constrained, {**mesh.descriptor, "weight": weight.kind})
    logger.debug("assembled %d free of %d vertices", pair.dim, mesh.n_vertices)
    return pair


def boundary_lumped_mass(vertices: np.ndarray, edges: np.ndarray) -> np.ndarray:
    """Trapezoidal boundary mass per vertex: half the length of each incident edge."""
    lengths = np.linalg.norm(vertices[edges[:, 0]] - vertices[edges[:, 1]], axis=1)
    lumped = np.zeros(len(vertices))
    np.add.at(lumped, edges[:, 0], 0.5 * lengths)
    np.add.at(lumped, edges[:, 1], 0.5 * lengths)
    return lumped


def boundary_load(vertices: np.ndarray, edges: np.ndarray, values: np.ndarray) -> np.ndarray:
    """Weak Neumann load ``∫ g φ_i`` for nodal data ``g`` by the trapezoidal rule."""
    lumped = boundary_lumped_mass(vertices, edges)
    values = np.asarray(values, dtype=float)
    return lumped[:, None] * values if values.ndim == 2 else lumped * values


class ShiftedOperator:
    """Factorized ``K - λM`` with a prescribed-value vertex set.

    The factorization is a symmetric-mode LU whose pivots give the inertia,
    i.e. the number of eigenvalues of the homogeneous problem below ``λ``.
    """

    def __init__(
        self,
        stiffness: sparse.csr_matrix,
        mass: sparse.csr_matrix,
        lam: float,
        prescribed: np.ndarray,
        problem: str = "",
    ) -> None:
        self.lam = float(lam)
        self.problem = problem
        self.operator = (stiffness - self.lam * mass).tocsr()
        n = self.operator.shape[0]
        self.prescribed = np.unique(np.asarray(prescribed, dtype=np.int64))
        mask = np.ones(n, dtype=bool)
        mask[self.prescribed] = False
        self.free = np.flatnonzero(mask)
        block = self.operator[self.free][:, self.free].tocsc()
        self._mass_block = mass[self.free][:, self.free]
        try:
            self._lu = splu(block, permc_spec="MMD_AT_PLUS_A", diag_pivot_thresh=0.0,
                            options={"SymmetricMode": True})
        except RuntimeError as exc:
            raise self._singular(block, reason=str(exc)) from exc
        pivots = self._lu.U.diagonal()
        ratio = float(np.min(np.abs(pivots)) / np.max(np.abs(pivots)))
        if ratio < SINGULAR_RTOL:
            raise self._singular(block, pivot_ratio=ratio)
        if np.array_equal(self._lu.perm_r, self._lu.perm_c):
            self.inertia = int(np.sum(pivots < 0))
        else:
            _, d, _ = linalg.ldl(block.toarray())
            self.inertia = int(np.sum(np.linalg.eigvalsh(d) < 0))

    def _singular(self, block: sparse.csc_matrix, **details: Any) -> SingularShiftError:
        distance = nearest_eigenvalue_distance(block, self._mass_block)
        return SingularShiftError(
            f"shifted operator is singular for the {self.problem or 'homogeneous'} problem",
            problem=self.problem, lam=self.lam, distance=distance, **details,
        )

    def solve(self, values: np.ndarray | None = None, load: np.ndarray | None = None) -> np.ndarray:
        """Full-vertex solution(s) with ``values`` on the prescribed vertices and weak ``load``."""
        n = self.operator.shape[0]
        columns = 1
        for arr in (values, load):
            if arr is not None and np.ndim(arr) == 2:
                columns = np.shape(arr)[1]
        w = np.zeros((n, columns))
        if values is not None:
            w[self.prescribed] = np.asarray(values, dtype=float).reshape(len(self.prescribed), -1)
        rhs = -(self.operator @ w)[self.free]
        if load is not None:
            rhs += np.asarray(load, dtype=float).reshape(n, -1)[self.free]
        w[self.free] = self._lu.solve(rhs)
        return w

    def residual(self, w: np.ndarray) -> np.ndarray:
        """Weak boundary flux ``(K - λM) w``."""
        return self.operator @ w


def nearest_eigenvalue_distance(shifted: Any, mass: Any) -> float:
    """Smallest |μ - λ| over eigenvalues μ, given ``K - λM`` and ``M`` (dense, small systems)."""
    if shifted.shape[0] > 1500:
        return float("nan")
    values = linalg.eigh(shifted.toarray(), mass.toarray(), eigvals_only=True)
    return float(np.min(np.abs(values)))


def solve_with_boundary_data(
    pair: MatrixPair,
    lam: float,
    data_vertices: np.ndarray,
    data: np.ndarray,
    neumann_load: np.ndarray | None = None,
    problem: str = "",
) -> np.ndarray:
    """Solve ``(K - λM) w = load`` with ``w = data`` on ``data_vertices``.

    The homogeneous Dirichlet set of ``pair`` stays at zero. Returns the field
    over every vertex.
    """
    data_vertices = np.asarray(data_vertices, dtype=np.int64)
    prescribed = np.concatenate([pair.constrained, data_vertices])
    values = np.concatenate([np.zeros(len(pair.constrained)), np.asarray(data, dtype=float)])
    order = np.argsort(prescribed, kind="stable")
    prescribed, values = prescribed[order], values[order]
    keep = np.concatenate([[True], np.diff(prescribed) != 0])
    op = ShiftedOperator(pair.full_stiffness, pair.full_mass, lam, prescribed[keep], problem)
    return op.solve(values[keep], neumann_load)[:, 0]
