"""Test the generalized eigensolver and cluster bookkeeping."""

from __future__ import annotations

import math

import numpy as np
import pytest

from zarembalab.assembly import assemble
from zarembalab.eigensolve import Spectrum, cluster_ids, cluster_multiplicities, solve_lowest, solve_matrices
from zarembalab.errors import NumericalError
from zarembalab.geometry import MetricWeight, build_rectangle, build_half_disk
from zarembalab.mesh import mesh_symmetric, mesh_unstructured


@pytest.fixture(scope="module")
def square_pair():
    mesh = mesh_unstructured(build_rectangle((0.0, 0.0), (math.pi, math.pi)), 0.2)
    return assemble(mesh, MetricWeight.flat())


@pytest.fixture(scope="module")
def half_disk_pair():
    return assemble(mesh_symmetric(build_half_disk("I"), 0.1), MetricWeight.flat())


def test_dirichlet_square(square_pair) -> None:
    """Test the lowest Dirichlet eigenvalues of [0, π]² against 2, 5, 5, 8."""
    spectrum, _ = solve_lowest(square_pair, 4)

    assert np.allclose(spectrum.values, [2.0, 5.0, 5.0, 8.0], rtol=0.05), f"Got {spectrum.values}"
    assert np.all(spectrum.values[1:] >= spectrum.values[:-1])


def test_residuals_and_orthonormality(half_disk_pair) -> None:
    """Test that returned pairs meet the tolerance and are M-orthonormal."""
    spectrum, basis = solve_lowest(half_disk_pair, 6, 1e-10)
    gram = basis.vectors.T @ (half_disk_pair.mass @ basis.vectors)

    assert np.all(spectrum.residuals <= 1e-10), f"Residuals {spectrum.residuals}"
    assert np.allclose(gram, np.eye(6), atol=1e-10)


def test_dense_and_sparse_agree(half_disk_pair) -> None:
    """Test that both solver routes give the same eigenvalues."""
    dense, _ = solve_lowest(half_disk_pair, 5, method="dense")
    sparse, _ = solve_lowest(half_disk_pair, 5, method="sparse")

    assert dense.method.startswith("dense")
    assert sparse.method.startswith("sparse")
    assert np.allclose(dense.values, sparse.values, rtol=1e-9)


def test_sparse_solve_is_reproducible(half_disk_pair) -> None:
    """Test that the seeded start vector makes repeated solves identical."""
    first, _ = solve_lowest(half_disk_pair, 4, method="sparse")
    second, _ = solve_lowest(half_disk_pair, 4, method="sparse")

    assert np.array_equal(first.values, second.values)


def test_relabelled_dofs_give_same_spectrum(half_disk_pair) -> None:
    """Test invariance under the similarity K -> PᵀKP, M -> PᵀMP of a DOF permutation."""
    perm = np.random.default_rng(3).permutation(half_disk_pair.dim)
    k, m = half_disk_pair.stiffness, half_disk_pair.mass
    base, _ = solve_matrices(k, m, 5, method="sparse")
    moved, _ = solve_matrices(k[perm][:, perm], m[perm][:, perm], 5, method="sparse")

    assert np.allclose(moved.values, base.values, rtol=10 * 1e-10), f"{moved.values} vs {base.values}"


@pytest.mark.parametrize("sigma", [-1.0, -0.01, 0.5])
def test_shift_does_not_change_values(half_disk_pair, sigma: float) -> None:
    """Test that different shifts below λ₁ give the same eigenvalues within 10·tol."""
    tol = 1e-10
    reference, _ = solve_lowest(half_disk_pair, 5, tol, method="dense")
    shifted, _ = solve_lowest(half_disk_pair, 5, tol, method="sparse", sigma=sigma)

    assert np.allclose(shifted.values, reference.values, rtol=10 * tol), f"sigma={sigma}: {shifted.values}"


def test_pure_neumann_has_zero_mode() -> None:
    """Test that the all-Neumann problem starts at zero without a negative value."""
    mesh = mesh_symmetric(build_half_disk("I"), 0.2)
    pair = assemble(mesh, MetricWeight.flat(), constrained=np.array([], dtype=np.int64))
    spectrum, basis = solve_lowest(pair, 2)

    assert abs(spectrum.values[0]) < 1e-8
    assert spectrum.values[1] > 1.0
    assert np.ptp(basis.vectors[:, 0]) < 1e-8, "Ground state must be constant"


def test_invalid_requests(half_disk_pair) -> None:
    """Test that bad counts and tolerances raise NumericalError."""
    with pytest.raises(NumericalError):
        solve_lowest(half_disk_pair, 0)
    with pytest.raises(NumericalError):
        solve_lowest(half_disk_pair, half_disk_pair.dim + 1)
    with pytest.raises(NumericalError):
        solve_lowest(half_disk_pair, 3, 1e-14)


def test_cluster_multiplicities() -> None:
    """Test grouping by relative gap."""
    spectrum = Spectrum(np.array([1.0, 1.0 + 1e-9, 2.0, 3.0, 3.0]), np.zeros(5))

    clusters = cluster_multiplicities(spectrum)
    assert [m for _, m in clusters] == [2, 1, 2]
    assert clusters[0][0] == pytest.approx(1.0)
    assert cluster_ids(spectrum).tolist() == [0, 0, 1, 2, 2]


def test_cluster_tolerance_is_honoured() -> None:
    """Test that a looser tolerance merges nearby values."""
    values = np.array([5.0, 5.01, 8.0])

    assert len(cluster_multiplicities(Spectrum(values, np.zeros(3)))) == 3
    assert len(cluster_multiplicities(Spectrum(values, np.zeros(3), cluster_tol=0.01))) == 2
