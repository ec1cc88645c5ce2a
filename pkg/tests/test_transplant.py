"""Test the transplantation map between a mixed problem and its swapped partner."""

from __future__ import annotations

import math

import numpy as np
import pytest

from zarembalab.assembly import assemble, mass_matrix, stiffness_matrix
from zarembalab.eigensolve import solve_lowest
from zarembalab.errors import TransplantError
from zarembalab.geometry import MetricWeight, SectorialBlock, build_half_disk, build_sectorial_domain
from zarembalab.mesh import mesh_symmetric, mesh_unstructured, perturb_vertex
from zarembalab.transplant import (
    BLOCK_MATRIX,
    MATCH_TOL,
    QUARTER_MATRIX,
    TransplantReport,
    build_transplant,
    copy_order,
    verify_transplantation,
)

COUNT = 6


def _pairs(spec, weight=None):
    mesh = mesh_symmetric(spec, 0.2)
    weight = weight or spec.weight
    return mesh, assemble(mesh, weight), assemble(mesh.swapped(), weight)


def test_block_matrix_properties() -> None:
    """Test orthogonality, the eighth power and the ±1/√2 pattern."""
    assert np.allclose(BLOCK_MATRIX.T @ BLOCK_MATRIX, np.eye(4))
    assert np.allclose(np.linalg.matrix_power(BLOCK_MATRIX, 8), np.eye(4))
    assert not np.allclose(np.linalg.matrix_power(BLOCK_MATRIX, 4), np.eye(4))
    nonzero = np.abs(BLOCK_MATRIX[BLOCK_MATRIX != 0])
    assert np.allclose(nonzero, 1 / math.sqrt(2))
    assert np.all(np.count_nonzero(BLOCK_MATRIX, axis=1) == 2)


@pytest.mark.parametrize("weight", [MetricWeight.flat(), MetricWeight.spherical()])
def test_half_disk_transplantation(weight: MetricWeight) -> None:
    """Test that transplanted Problem I modes solve Problem II on the same mesh."""
    mesh, pair_i, pair_ii = _pairs(build_half_disk("I", weight))
    tmap = build_transplant(mesh)
    s_i, b_i = solve_lowest(pair_i, COUNT)
    report = verify_transplantation(pair_i, pair_ii, s_i, b_i, tmap)

    assert report.passed, f"Failures on modes {report.failures}: {report.residuals}"
    assert report.max_residual < 1e-9
    assert tmap.is_orthogonal() and tmap.eighth_power_is_identity()
    assert max(report.match_defects) < 1e-10, "Shared vertices must get one value"


def test_half_disk_spectra_coincide() -> None:
    """Test that both problems share their eigenvalues on a symmetric mesh."""
    _, pair_i, pair_ii = _pairs(build_half_disk("I"))
    s_i, _ = solve_lowest(pair_i, COUNT)
    s_ii, _ = solve_lowest(pair_ii, COUNT)

    assert np.allclose(s_i.values, s_ii.values, rtol=1e-9), f"{s_i.values} vs {s_ii.values}"


def test_inverse_map_goes_back() -> None:
    """Test that the inverse map carries Problem II modes to Problem I."""
    mesh, pair_i, pair_ii = _pairs(build_half_disk("I"))
    tmap = build_transplant(mesh)
    s_ii, b_ii = solve_lowest(pair_ii, COUNT)
    report = verify_transplantation(pair_ii, pair_i, s_ii, b_ii, tmap.inverse())

    assert tmap.inverse().direction == "inverse"
    assert report.passed, f"Failures on modes {report.failures}"


def test_sectorial_transplantation() -> None:
    """Test the transplantation on a four-copy sectorial domain."""
    block = SectorialBlock.polyline(math.pi / 4, [(1.0, 0.0), (0.5, 0.5)], ["gamma12"])
    mesh, pair_i, pair_ii = _pairs(build_sectorial_domain(block))
    tmap = build_transplant(mesh)
    s_i, b_i = solve_lowest(pair_i, 4)
    report = verify_transplantation(pair_i, pair_ii, s_i, b_i, tmap)

    assert sorted(copy_order(mesh)) == [0, 1, 2, 3]
    assert report.passed, f"Failures on modes {report.failures}"


def test_transplant_needs_four_copies() -> None:
    """Test that a mesh without reflected copies raises TransplantError."""
    mesh = mesh_unstructured(build_half_disk("I"), 0.2)

    with pytest.raises(TransplantError):
        build_transplant(mesh)


def test_report_dict() -> None:
    """Test the serialized form of a transplantation report."""
    mesh, pair_i, pair_ii = _pairs(build_half_disk("I"))
    s_i, b_i = solve_lowest(pair_i, 2)
    data = verify_transplantation(pair_i, pair_ii, s_i, b_i, build_transplant(mesh)).to_dict()

    assert data["passed"] is True
    assert len(data["modes"]) == 2
    assert data["max_residual"] == max(m["residual"] for m in data["modes"])


def test_match_defect_fails_report() -> None:
    """Test that branches disagreeing on shared vertices fail the report."""
    report = TransplantReport(
        values=[1.0], residuals=[0.0], norm_defects=[0.0], constraint_defects=[0.0], match_defects=[0.5]
    )

    assert not report.passed, "A match defect above MATCH_TOL must fail"
    assert report.failures == [0]
    assert TransplantReport([1.0], [0.0], [0.0], [0.0], [MATCH_TOL / 2]).passed


def test_block_map_reduces_to_quarter_map() -> None:
    """Test that the four-copy map is the two-copy quarter-disk map applied to both halves."""
    mesh = mesh_symmetric(build_half_disk("I"), 0.2)
    tmap = build_transplant(mesh)

    assert np.allclose(tmap.pair_matrix(), np.kron(QUARTER_MATRIX, np.eye(2)))
    assert np.allclose(tmap.quarter_map(), QUARTER_MATRIX)
    assert np.allclose(QUARTER_MATRIX.T @ QUARTER_MATRIX, np.eye(2))
    assert np.allclose(np.linalg.matrix_power(QUARTER_MATRIX, 8), np.eye(2))
    assert tmap.reduces_to_quarter_map()
    assert not tmap.inverse().reduces_to_quarter_map(), "Tᵀ is the quarter map's inverse"


def test_map_preserves_norms_of_arbitrary_functions() -> None:
    """Test ‖T u‖ = ‖u‖ in mass and energy for random u, not only eigenvectors."""
    spec = build_half_disk("I", MetricWeight.spherical())
    mesh = mesh_symmetric(spec, 0.2)
    tmap = build_transplant(mesh)
    order = copy_order(mesh)
    rng = np.random.default_rng(11)

    # per-copy blocks: any u, including values that disagree on shared vertices
    stacked = rng.standard_normal(tmap.blocks.shape)
    image = BLOCK_MATRIX @ stacked
    for build in (lambda tri: mass_matrix(mesh.vertices, tri, spec.weight),
                  lambda tri: stiffness_matrix(mesh.vertices, tri)):
        local = [build(mesh.triangles[mesh.triangle_copy == order[k]]) for k in range(4)]
        blocks = [m[tmap.blocks[k]][:, tmap.blocks[k]] for k, m in enumerate(local)]
        before = sum(x @ (m @ x) for x, m in zip(stacked, blocks))
        after = sum(x @ (m @ x) for x, m in zip(image, blocks))
        assert after == pytest.approx(before, rel=1e-10)

    # vertex level: any u admissible for Problem I
    pair_i, pair_ii = assemble(mesh, spec.weight), assemble(mesh.swapped(), spec.weight)
    u = pair_i.scatter(rng.standard_normal(pair_i.dim))
    v, defect = tmap.apply_blocks(u)
    assert defect <= MATCH_TOL
    assert np.max(np.abs(v[pair_ii.constrained]), initial=0.0) <= MATCH_TOL
    assert v @ (pair_ii.full_mass @ v) == pytest.approx(u @ (pair_i.full_mass @ u), rel=1e-10)
    assert v @ (pair_ii.full_stiffness @ v) == pytest.approx(u @ (pair_i.full_stiffness @ u), rel=1e-10)


def test_perturbed_mesh_fails_transplantation() -> None:
    """Test that moving one interior vertex by 1e-3 breaks the residual check."""
    spec = build_half_disk("I")
    symmetric = mesh_symmetric(spec, 0.2)
    centre = symmetric.vertices.mean(axis=0)
    vertex = int(np.argmin(np.linalg.norm(symmetric.vertices - centre, axis=1)))
    mesh = perturb_vertex(symmetric, vertex, (1e-3, 1e-3))
    pair_i, pair_ii = assemble(mesh, spec.weight), assemble(mesh.swapped(), spec.weight)
    s_i, b_i = solve_lowest(pair_i, COUNT)
    report = verify_transplantation(pair_i, pair_ii, s_i, b_i, build_transplant(mesh))

    assert not report.passed, "A non-symmetric mesh must not pass"
    assert report.max_residual > 1e-6, f"max residual {report.max_residual}"
