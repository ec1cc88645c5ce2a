"""Lowest eigenpairs of ``K u = λ M u``."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Any

import numpy as np
from scipy import linalg, sparse
from scipy.sparse.linalg import ArpackNoConvergence, LinearOperator, eigsh, splu
from scipy.sparse.linalg import norm as sparse_norm

from .errors import ConvergenceError, NumericalError
from .kit.package import optional_module

if TYPE_CHECKING:
    from .assembly import MatrixPair

logger = logging.getLogger(__name__)

DENSE_LIMIT = 500
DEFAULT_TOL = 1e-10
DEFAULT_CLUSTER_TOL = 1e-6
DEFAULT_SHIFT = -0.01
START_SEED = 20070101


@dataclass(frozen=True)
class Spectrum:
    """Ascending eigenvalues with relative residuals ``‖Ku-λMu‖/(‖Mu‖ max(1, |λ|))``."""

    values: np.ndarray
    residuals: np.ndarray
    cluster_tol: float = DEFAULT_CLUSTER_TOL
    method: str = ""
    descriptor: dict[str, Any] = field(default_factory=dict, compare=False)

    def __len__(self) -> int:
        return len(self.values)

    def head(self, count: int) -> Spectrum:
        return Spectrum(self.values[:count], self.residuals[:count], self.cluster_tol, self.method,
                        self.descriptor)


@dataclass(frozen=True, eq=False)
class EigenBasis:
    """M-orthonormal eigenvectors over the free DOFs, one column per value."""

    vectors: np.ndarray


def _start_vector(n: int, seed: int) -> np.ndarray:
    return np.random.default_rng(seed).standard_normal(n)


def _shift_invert_operator(stiffness: sparse.spmatrix, mass: sparse.spmatrix, sigma: float) -> tuple[LinearOperator, str]:
    shifted = (stiffness - sigma * mass).tocsc()
    cholmod = optional_module("sksparse.cholmod")
    if cholmod is not None:
        factor = cholmod.cholesky(shifted)
        return LinearOperator(matvec=factor, shape=shifted.shape, dtype=shifted.dtype), "cholmod"
    lu = splu(shifted)
    return LinearOperator(matvec=lu.solve, shape=shifted.shape, dtype=shifted.dtype), "splu"


def solve_matrices(
    stiffness: sparse.spmatrix,
    mass: sparse.spmatrix,
    count: int,
    tol: float = DEFAULT_TOL,
    *,
    method: str = "auto",
    sigma: float = DEFAULT_SHIFT,
    seed: int = START_SEED,
    cluster_tol: float = DEFAULT_CLUSTER_TOL,
) -> tuple[Spectrum, EigenBasis]:
    """Core solver on explicit matrices; see :func:`solve_lowest`."""
    n = stiffness.shape[0]
    if count < 1 or count > n:
        raise NumericalError("requested eigenpair count out of range", count=count, dim=n)
    if tol < 1e-12:
        raise NumericalError("tolerance below 1e-12 is not attainable", tol=tol)
    if method == "auto":
        method = "dense" if n <= DENSE_LIMIT else "sparse"
    if method == "sparse" and count >= n - 1:
        method = "dense"
    if method == "dense":
        values, vectors = linalg.eigh(
            stiffness.toarray(), mass.toarray(), subset_by_index=[0, count - 1]
        )
        backend = "dense"
    else:
        op_inv, backend = _shift_invert_operator(stiffness, mass, sigma)
        try:
            values, vectors = eigsh(stiffness, count, mass, sigma=sigma, OPinv=op_inv,
                                    v0=_start_vector(n, seed), tol=0.0)
        except ArpackNoConvergence as exc:
            raise ConvergenceError("shift-invert iteration did not converge",
                                   converged=len(exc.eigenvalues), requested=count) from exc
    order = np.argsort(values, kind="stable")
    values, vectors = values[order], vectors[:, order]
    # M-orthonormalize: Cholesky of the Gram matrix V^T M V
    gram = vectors.T @ (mass @ vectors)
    chol = np.linalg.cholesky(0.5 * (gram + gram.T))
    vectors = linalg.solve_triangular(chol, vectors.T, lower=True).T
    mv = mass @ vectors
    residual = np.linalg.norm(stiffness @ vectors - mv * values, axis=0)
    residual = residual / (np.linalg.norm(mv, axis=0) * np.maximum(1.0, np.abs(values)))
    if np.any(residual > tol):
        raise ConvergenceError("eigenpair residuals above tolerance", residuals=residual.tolist(), tol=tol)
    # ‖K‖ measured against the smallest mass diagonal, i.e. in eigenvalue units
    norm_k = float(sparse_norm(stiffness, 1)) / float(np.min(mass.diagonal()))
    floor = -10.0 * np.finfo(float).eps * norm_k
    if np.any(values < floor):
        raise NumericalError("spurious negative eigenvalue", value=float(values.min()), floor=floor)
    logger.debug("%s solve: %d of %d (%s)", method, count, n, backend)
    return (
        Spectrum(values, residual, cluster_tol, f"{method}:{backend}"),
        EigenBasis(vectors),
    )


def solve_lowest(
    pair: MatrixPair,
    count: int,
    tol: float = DEFAULT_TOL,
    *,
    method: str = "auto",
    sigma: float = DEFAULT_SHIFT,
    seed: int = START_SEED,
    cluster_tol: float = DEFAULT_CLUSTER_TOL,
) -> tuple[Spectrum, EigenBasis]:
    """The ``count`` smallest eigenpairs of ``pair``.

    Dense ``eigh`` up to 500 DOFs, otherwise shift-invert Lanczos (``eigsh``)
    around ``sigma`` with a sparse factorization of ``K - σM`` (CHOLMOD when
    scikit-sparse is installed, SuperLU otherwise) and a seeded start vector.

    Raises:
        ConvergenceError: residuals above ``tol`` or ARPACK stalled.
        NumericalError: bad arguments or eigenvalues below the round-off floor.
    """
    spectrum, basis = solve_matrices(
        pair.stiffness, pair.mass, count, tol,
        method=method, sigma=sigma, seed=seed, cluster_tol=cluster_tol,
    )
    spectrum.descriptor.update(pair.descriptor)
    return spectrum, basis


def cluster_multiplicities(spectrum: Spectrum) -> list[tuple[float, int]]:
    """Group consecutive eigenvalues closer than ``cluster_tol`` (relative).

    Each cluster is reported by its mean value and size.
    """
    groups: list[list[float]] = []
    for value in spectrum.values:
        if groups:
            last = groups[-1][-1]
            scale = max(abs(last), abs(value), 1e-12)
            if abs(value - last) <= spectrum.cluster_tol * scale:
                groups[-1].append(float(value))
                continue
        groups.append([float(value)])
    return [(float(np.mean(g)), len(g)) for g in groups]


def cluster_ids(spectrum: Spectrum) -> np.ndarray:
    """Cluster index of every value, consistent with :func:`cluster_multiplicities`."""
    sizes = [m for _, m in cluster_multiplicities(spectrum)]
    return np.repeat(np.arange(len(sizes)), sizes)
