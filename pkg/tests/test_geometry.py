"""Test tagged curves, domain specs and the domain builders."""

from __future__ import annotations

import math

import numpy as np
import pytest

from zarembalab.errors import GeometryError
from zarembalab.geometry import (
    BoundaryTag,
    Curve,
    DomainSpec,
    Isometry,
    MetricWeight,
    SectorialBlock,
    boundary_lengths,
    build_disk_partition,
    build_double_cover,
    build_half_disk,
    build_lens_half,
    build_rectangle,
    build_rectangle_half,
    build_sectorial_domain,
    build_symmetry_pair,
    is_trivial_decomposition,
    same_tagged_boundary,
    sheet_map_preserves,
    tag_components,
)
from zarembalab.domains import double_cover_base

D, N = BoundaryTag.DIRICHLET, BoundaryTag.NEUMANN


def test_reflections_compose_to_rotation() -> None:
    """Test that two reflections through the origin compose to a rotation."""
    first = Isometry.reflection(0.0)
    second = Isometry.reflection(math.pi / 4)
    composed = second.compose(first)

    assert not composed.is_reflection, "Product of two reflections must preserve orientation"
    assert np.allclose(composed.apply((1.0, 0.0)), (0.0, 1.0))
    assert np.allclose(composed.apply([[0.0, 1.0]]), Isometry.rotation(math.pi / 2).apply([[0.0, 1.0]]))


def test_reflection_matrix_is_exact_on_axes() -> None:
    """Test that reflections across the diagonals carry no trigonometric noise."""
    iso = Isometry.reflection(math.pi / 4)

    assert iso.matrix == ((0.0, 1.0), (1.0, 0.0)), f"Unexpected matrix {iso.matrix}"


def test_curve_lengths_and_containment() -> None:
    """Test arc and segment lengths and point membership."""
    arc = Curve.arc((0.0, 0.0), 2.0, 0.0, math.pi / 2, D, "arc")
    segment = Curve.segment((0.0, 0.0), (3.0, 4.0), N, "segment")

    assert arc.length == pytest.approx(math.pi)
    assert segment.length == pytest.approx(5.0)
    assert arc.contains([[0.0, 2.0]])[0]
    assert not arc.contains([[0.0, -2.0]])[0]
    assert segment.contains([[1.5, 2.0]])[0]


def test_degenerate_curves_are_rejected() -> None:
    """Test that zero-length segments and empty arcs raise GeometryError."""
    with pytest.raises(GeometryError):
        Curve.segment((1.0, 1.0), (1.0, 1.0), D)
    with pytest.raises(GeometryError):
        Curve.arc((0.0, 0.0), 1.0, 1.0, 1.0, D)


def test_open_boundary_is_rejected() -> None:
    """Test that curves not closing into one loop raise GeometryError."""
    curves = (
        Curve.segment((0.0, 0.0), (1.0, 0.0), D),
        Curve.segment((1.0, 0.0), (1.0, 1.0), N),
    )
    with pytest.raises(GeometryError):
        DomainSpec(curves=curves)


def test_half_disk_tags() -> None:
    """Test the tag layout of the half-disk variants."""
    problem_i = build_half_disk("I")
    problem_ii = build_half_disk("II")

    assert [c.tag for c in problem_i.curves] == [D, N, N, D, N]
    assert [c.tag for c in problem_ii.curves] == [N, D, D, N, D]
    assert same_tagged_boundary(problem_i.swapped(), problem_ii), "Swapping I must give II"
    assert problem_i.tag_at((0.0, 1.0)) is D
    assert problem_i.tag_at((0.5, 0.0)) is N


def test_unknown_half_disk_variant() -> None:
    """Test that an unknown variant raises GeometryError."""
    with pytest.raises(GeometryError):
        build_half_disk("III")


def test_half_disk_lengths_are_balanced() -> None:
    """Test that both conditions cover 1 + π/2 of the half-disk boundary."""
    dirichlet, neumann = boundary_lengths(build_half_disk("I"))

    assert dirichlet == pytest.approx(1 + math.pi / 2)
    assert neumann == pytest.approx(1 + math.pi / 2)


def test_half_disk_components() -> None:
    """Test that the loop splits into four alternating tag runs."""
    runs = tag_components(build_half_disk("I"))

    assert len(runs) == 4, f"Expected 4 runs, got {runs}"
    assert sum(length for _, length in runs) == pytest.approx(2 + math.pi)
    assert all(a[0] is not b[0] for a, b in zip(runs, runs[1:]))


def test_spherical_weight_lengthens_boundary() -> None:
    """Test that the spherical weight keeps the balance and stretches the diameter."""
    dirichlet, neumann = boundary_lengths(build_half_disk("I", MetricWeight.spherical()))

    # on |z| = 1 the spherical factor sqrt(4/(1+r²)²) is 1
    assert dirichlet - neumann == pytest.approx(0.0, abs=1e-8)
    assert dirichlet > 1 + math.pi / 2, "Diameter pieces must be longer in the spherical metric"


def test_invalid_weight() -> None:
    """Test that unknown or non-positive weights raise GeometryError."""
    with pytest.raises(GeometryError):
        MetricWeight("hyperbolic")
    with pytest.raises(GeometryError):
        MetricWeight("radial", (1.0, -2.0))


def test_spec_dict_round_trip() -> None:
    """Test that a spec survives to_dict/from_dict unchanged."""
    spec = build_half_disk("I", MetricWeight.spherical())
    restored = DomainSpec.from_dict(spec.to_dict())

    assert restored == spec
    assert restored.plan is not None and len(restored.plan.maps) == 2


def test_half_disk_pair_is_not_trivial() -> None:
    """Test that no isometry carries the half-disk I onto II."""
    assert is_trivial_decomposition(build_half_disk("I"), build_half_disk("II")) is None


def test_quarter_partition_is_trivial() -> None:
    """Test that equal quarter arcs give a partner related by a rotation."""
    spec, partner = build_disk_partition(math.pi / 2, math.pi / 2)
    iso = is_trivial_decomposition(spec, partner)

    assert iso is not None, "Quarter partition must be a trivial decomposition"


def test_unequal_partition_is_not_trivial() -> None:
    """Test that alpha=π/4, beta=π/2 has no isometric partner."""
    spec, partner = build_disk_partition(math.pi / 4, math.pi / 2)

    assert is_trivial_decomposition(spec, partner) is None
    assert len(spec.curves) == 4
    assert boundary_lengths(spec) == pytest.approx((math.pi, math.pi))


def test_rectangle_tags() -> None:
    """Test that rectangle sides default to Dirichlet."""
    spec = build_rectangle((0.0, 0.0), (2.0, 1.0), {"left": N})

    assert [c.tag for c in spec.curves] == [D, D, D, N]
    assert boundary_lengths(spec) == pytest.approx((5.0, 1.0))


def test_sectorial_block_validation() -> None:
    """Test that a chain leaving the sector is rejected."""
    alpha = math.pi / 4
    z2 = (math.cos(alpha), math.sin(alpha))
    block = SectorialBlock.polyline(alpha, [(1.0, 0.0), (1.0, 0.3), z2], ["gamma11", "gamma12"])

    assert len(block.gamma1) == 2
    with pytest.raises(GeometryError):
        SectorialBlock.polyline(alpha, [(1.0, 0.0), (0.2, 1.5), z2], ["gamma11", "gamma12"])
    with pytest.raises(GeometryError):
        SectorialBlock.polyline(alpha, [(1.0, 0.0), z2], ["gamma13"])


def test_sectorial_domain_glues_four_copies() -> None:
    """Test the curve count and tags of a four-copy sectorial domain."""
    alpha = math.pi / 4
    z2 = (math.cos(alpha), math.sin(alpha))
    block = SectorialBlock.polyline(alpha, [(1.0, 0.0), (1.0, 0.3), z2], ["gamma11", "gamma12"])
    spec = build_sectorial_domain(block)

    # two radii plus two pieces per copy
    assert len(spec.curves) == 10
    assert spec.curves[0].tag is N and spec.curves[-1].tag is D
    assert build_sectorial_domain(block, swapped=True).curves[0].tag is D


def test_double_cover_sheet_maps() -> None:
    """Test that every declared sheet map preserves the cover tags."""
    for top in (D, N):
        cover = build_double_cover(double_cover_base(top))

        assert cover.sheets == 2
        assert len(cover.curves) == 9
        assert len(cover.symmetry_hints) == 3
        for hint in cover.symmetry_hints:
            assert sheet_map_preserves(cover, hint), f"{hint.name} must preserve tags (top {top.value})"


def test_double_cover_needs_alternating_base() -> None:
    """Test that a single-tag disk is not accepted as a cover base."""
    q = math.pi / 4
    curves = tuple(Curve.arc((0.0, 0.0), 1.0, (2 * k - 1) * q, (2 * k + 1) * q, D) for k in range(4))
    with pytest.raises(GeometryError):
        build_double_cover(DomainSpec(curves=curves))


def test_rectangle_half_symmetry_pair() -> None:
    """Test the d1 symmetry flag of rectangle halves."""
    top = build_rectangle_half("top", 1.0, 0.5)
    left = build_rectangle_half("left", 1.0, 0.5)

    axisymmetric, central = build_symmetry_pair(top)
    assert axisymmetric.metadata["d1_symmetric"] is True
    assert central.metadata["d1_symmetric"] is True
    assert build_symmetry_pair(left)[0].metadata["d1_symmetric"] is False
    assert boundary_lengths(axisymmetric) == pytest.approx(boundary_lengths(central))


def test_lens_half_axes() -> None:
    """Test that both lens halves are built and an unknown axis fails."""
    for axis in ("x", "y"):
        half = build_lens_half(axis)
        assert half.weight.kind == "spherical"
        assert len(half.as_spec().curves) == 3
    with pytest.raises(GeometryError):
        build_lens_half("z")
