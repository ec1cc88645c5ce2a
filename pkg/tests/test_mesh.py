"""Test symmetric, unstructured and double-cover meshing."""

from __future__ import annotations

import math

import numpy as np
import pytest

from zarembalab.domains import double_cover_base
from zarembalab.errors import MeshError
from zarembalab.geometry import BoundaryTag, build_double_cover, build_half_disk, build_rectangle
from zarembalab.mesh import (
    mesh_domain,
    mesh_double_cover,
    mesh_fundamental,
    mesh_symmetric,
    mesh_unstructured,
    perturb_vertex,
    refine_with_prolongation,
    validate_mesh,
)

H = 0.2


@pytest.fixture(scope="module")
def half_disk_mesh():
    return mesh_symmetric(build_half_disk("I"), H)


def test_symmetric_mesh_structure(half_disk_mesh) -> None:
    """Test that the half-disk mesh is a valid disk made of four copies."""
    mesh = half_disk_mesh
    validate_mesh(mesh)

    assert mesh.euler_characteristic() == 1
    assert len(mesh.copies) == 4, f"Expected 4 copies, got {len(mesh.copies)}"
    assert mesh.triangle_copy is not None
    assert np.bincount(mesh.triangle_copy).tolist() == [mesh.n_triangles // 4] * 4
    assert mesh.descriptor["kind"] == "symmetric"


def test_symmetric_mesh_area(half_disk_mesh) -> None:
    """Test that the triangles fill the half-disk up to the chord defect."""
    area = float(half_disk_mesh.signed_areas().sum())

    assert area < math.pi / 2
    assert area > math.pi / 2 - 0.05, f"Area {area} too far below π/2"


def test_mirror_permutation(half_disk_mesh) -> None:
    """Test that the mirror across the y-axis is a vertex permutation of the mesh."""
    mesh = half_disk_mesh
    perms = [p for p in mesh.symmetry_perms.values()
             if np.allclose(mesh.vertices[p], mesh.vertices * np.array([-1.0, 1.0]), atol=1e-12)]

    assert perms, f"No mirror permutation among {list(mesh.symmetry_perms)}"


def test_edge_tags_follow_spec(half_disk_mesh) -> None:
    """Test that both endpoints of every tagged edge lie on a curve with that tag."""
    mesh = half_disk_mesh
    spec = build_half_disk("I")
    for (a, b), tag in zip(mesh.boundary_edges, mesh.edge_tags):
        owners = [c for c in spec.curves if c.tag.value == tag and c.contains(mesh.vertices[[a, b]]).all()]
        assert owners, f"Edge {(a, b)} tagged {tag} lies on no curve with that tag"


def test_junction_vertices_are_dirichlet(half_disk_mesh) -> None:
    """Test that the D/N junction points count as Dirichlet vertices."""
    mesh = half_disk_mesh
    dirichlet = mesh.vertices[mesh.dirichlet_vertices()]
    for junction in [(0.0, 0.0), (math.sqrt(0.5), math.sqrt(0.5)), (-math.sqrt(0.5), math.sqrt(0.5))]:
        assert np.min(np.linalg.norm(dirichlet - np.asarray(junction), axis=1)) < 1e-12


def test_swapped_mesh(half_disk_mesh) -> None:
    """Test that swapping exchanges the Dirichlet and Neumann edge sets."""
    mesh = half_disk_mesh
    swapped = mesh.swapped()

    assert len(swapped.tagged_edges(BoundaryTag.DIRICHLET)) == len(mesh.tagged_edges(BoundaryTag.NEUMANN))
    assert np.array_equal(swapped.vertices, mesh.vertices)


def test_refinement(half_disk_mesh) -> None:
    """Test red refinement: counts, prolongation and snapped boundary midpoints."""
    mesh = half_disk_mesh
    fine, prolongation = refine_with_prolongation(mesh)

    assert fine.n_vertices == mesh.n_vertices + len(mesh.edges())
    assert fine.n_triangles == 4 * mesh.n_triangles
    assert prolongation.shape == (fine.n_vertices, mesh.n_vertices)
    assert np.allclose(prolongation @ np.ones(mesh.n_vertices), 1.0)
    assert fine.descriptor["level"] == 1
    assert len(fine.copies) == 4
    arc = fine.boundary_vertices()
    arc = arc[fine.vertices[arc, 1] > 1e-9]
    assert np.allclose(np.linalg.norm(fine.vertices[arc], axis=1), 1.0)


def test_unstructured_mesh_is_seeded() -> None:
    """Test that the same seed reproduces the same unstructured mesh."""
    spec = build_half_disk("I")
    first = mesh_unstructured(spec, H, seed=3)
    second = mesh_unstructured(spec, H, seed=3)

    assert np.array_equal(first.vertices, second.vertices)
    assert first.copies == ()
    assert first.euler_characteristic() == 1


def test_mesh_domain_routes() -> None:
    """Test that mesh_domain picks the route from the domain."""
    spec = build_half_disk("I")
    rectangle = build_rectangle((0.0, 0.0), (1.0, 1.0))

    assert mesh_domain(spec, H).descriptor["kind"] == "symmetric"
    assert mesh_domain(spec, H, symmetric=False).descriptor["kind"] == "unstructured"
    assert mesh_domain(rectangle, H).descriptor["kind"] == "unstructured"


def test_invalid_mesh_requests() -> None:
    """Test that bad edge lengths and missing plans raise MeshError."""
    spec = build_half_disk("I")
    with pytest.raises(MeshError):
        mesh_fundamental(spec, None, 0.0)
    with pytest.raises(MeshError):
        mesh_symmetric(build_rectangle(), H)
    with pytest.raises(MeshError):
        mesh_double_cover(spec, H)


def test_flipped_triangle_is_rejected(half_disk_mesh) -> None:
    """Test that a reversed triangle fails validation."""
    mesh = half_disk_mesh
    triangles = mesh.triangles.copy()
    triangles[0] = triangles[0, [0, 2, 1]]
    broken = type(mesh)(mesh.vertices, triangles, mesh.boundary_edges, mesh.edge_tags, mesh.edge_curves)

    with pytest.raises(MeshError):
        validate_mesh(broken)


def test_perturbation_drops_symmetry(half_disk_mesh) -> None:
    """Test that moving one vertex removes the symmetry permutations."""
    mesh = half_disk_mesh
    interior = np.setdiff1d(np.arange(mesh.n_vertices), mesh.boundary_vertices())
    moved = perturb_vertex(mesh, int(interior[0]), (1e-3, 0.0))

    assert moved.symmetry_perms == {}
    assert np.allclose(moved.vertices[interior[0]] - mesh.vertices[interior[0]], (1e-3, 0.0))
    assert moved.descriptor["perturbed"] == int(interior[0])


def test_double_cover_mesh() -> None:
    """Test the sheet permutations of the double-cover mesh."""
    cover = build_double_cover(double_cover_base())
    mesh = mesh_double_cover(cover, H)
    validate_mesh(mesh)

    assert set(mesh.symmetry_perms) == {"T", "U", "V"}
    assert mesh.sheet_of_vertex is not None
    assert set(mesh.sheet_of_vertex.tolist()) == {0, 1}
    t = mesh.symmetry_perms["T"]
    assert np.array_equal(t[t], np.arange(mesh.n_vertices)), "Sheet swap must be an involution"
    assert np.allclose(mesh.vertices[t], mesh.vertices)
    # the branch point is the only vertex fixed by T
    assert int(np.sum(t == np.arange(mesh.n_vertices))) == 1
