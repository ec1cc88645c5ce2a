"""Test spectrum comparison, extrapolation, sweeps, heat fits and cover projections."""

from __future__ import annotations

import math

import numpy as np
import pytest

from zarembalab.analysis import (
    Extrapolation,
    NuTable,
    SymmetryPairReport,
    bessel_disk_spectrum,
    compare_spectra,
    cover_odd_spectrum,
    heat_fit,
    length_balance,
    richardson,
    sheet_swap_basis,
    sweep_disk,
    symmetry_pair_check,
)
from zarembalab.assembly import assemble
from zarembalab.domains import double_cover_base
from zarembalab.eigensolve import Spectrum
from zarembalab.errors import NumericalError
from zarembalab.geometry import (
    BoundaryTag,
    MetricWeight,
    build_double_cover,
    build_half_disk,
    build_rectangle,
    build_rectangle_half,
)
from zarembalab.mesh import mesh_double_cover


def _spectrum(values: list[float]) -> Spectrum:
    return Spectrum(np.asarray(values, dtype=float), np.zeros(len(values)))


def test_compare_spectra() -> None:
    """Test the Euclidean distance between two spectra."""
    nu, diffs = compare_spectra(_spectrum([1.0, 2.0, 3.0]), _spectrum([1.0, 2.0, 7.0]), 3)

    assert nu == pytest.approx(4.0)
    assert diffs == [0.0, 0.0, -4.0]
    with pytest.raises(NumericalError):
        compare_spectra(_spectrum([1.0]), _spectrum([1.0, 2.0]), 2)


def test_richardson() -> None:
    """Test second-order extrapolation and its error estimate."""
    result = richardson(_spectrum([2.1, 5.2]), _spectrum([2.025, 5.05]))

    assert np.allclose(result.values, [2.0, 5.0])
    assert np.allclose(result.errors, [0.025, 0.05])
    assert result.non_monotone == []


def test_richardson_flags_non_monotone() -> None:
    """Test that a fine value above the coarse one is flagged."""
    result = richardson(_spectrum([2.0, 5.0]), _spectrum([2.1, 4.9]))

    assert result.non_monotone == [0]


def test_richardson_realigns_by_overlap() -> None:
    """Test that modes are paired by overlap rather than by index."""
    overlap = np.array([[0.05, 0.99], [0.99, 0.05]])
    result = richardson(_spectrum([5.0, 5.1]), _spectrum([5.08, 4.99]), overlap)

    assert result.order == [1, 0]
    assert result.fine.tolist() == [4.99, 5.08]


def test_nu_table_summary() -> None:
    """Test the ν table bookkeeping."""
    table = NuTable(max_n=3)
    table.nu.update({(1, 1): 1e-12, (2, 2): 2e-12, (1, 2): 0.3, (2, 3): 0.1})
    table.trivial.update({(1, 1): "mirror", (2, 2): "mirror"})

    assert len(table.cells()) == 6
    assert table.nontrivial_min() == ((2, 3), 0.1)
    assert table.separation() == pytest.approx(0.1 / 2e-12)
    assert np.isnan(table.matrix()[2, 0])
    data = table.to_dict()
    assert data["nontrivial_min"] == {"k": 2, "n": 3, "nu": 0.1}
    assert data["step"] == "pi/24"


def test_sweep_diagonal_cell_is_trivial() -> None:
    """Test that a k = n partition is trivial with vanishing ν."""
    table = sweep_disk(0.2, eigencount=3, max_n=6, cells=[(6, 6)])

    assert table.failures == {}
    assert (6, 6) in table.trivial
    assert table.nu[(6, 6)] < 1e-8


def test_bessel_spectra() -> None:
    """Test the disk spectra built from Bessel zeros."""
    dirichlet = bessel_disk_spectrum(3)
    neumann = bessel_disk_spectrum(3, BoundaryTag.NEUMANN)

    assert dirichlet[0] == pytest.approx(5.783185962946784)
    assert dirichlet[1] == pytest.approx(14.681970642123893)
    assert dirichlet[2] == pytest.approx(dirichlet[1])
    assert neumann[0] == 0.0
    assert neumann[1] == pytest.approx(1.8411837813406593 ** 2)
    assert neumann[2] == pytest.approx(neumann[1])


@pytest.mark.parametrize("tag, expected", [(BoundaryTag.DIRICHLET, -2 * math.pi), (BoundaryTag.NEUMANN, 2 * math.pi)])
def test_heat_fit_on_disk(tag: BoundaryTag, expected: float) -> None:
    """Test that the half-order coefficient recovers ±2π for the unit disk."""
    fit = heat_fit(bessel_disk_spectrum(400, tag), math.pi)

    assert fit.sign == int(np.sign(expected))
    assert fit.implied_imbalance == pytest.approx(expected, rel=0.25)
    assert fit.to_dict()["area_fitted"] is False


def test_heat_fit_truncation() -> None:
    """Test that a window the eigenvalues cannot resolve raises NumericalError."""
    values = bessel_disk_spectrum(20)
    with pytest.raises(NumericalError):
        heat_fit(values, math.pi, window=(1e-4, 0.5))
    with pytest.raises(NumericalError):
        heat_fit([], math.pi)


def test_length_balance() -> None:
    """Test the balanced and unbalanced verdicts."""
    balanced = length_balance(build_half_disk("I"))
    dirichlet_square = length_balance(build_rectangle())

    assert balanced["balanced"] is True
    assert dirichlet_square["balanced"] is False
    assert dirichlet_square["difference"] == pytest.approx(-4.0)
    assert "not isospectral" in dirichlet_square["verdict"]


def test_sheet_swap_subspaces() -> None:
    """Test that odd and even sheet-swap bases split the cover DOFs orthonormally."""
    cover = build_double_cover(double_cover_base())
    mesh = mesh_double_cover(cover, 0.25)
    pair = assemble(mesh, MetricWeight.flat())
    perm = mesh.symmetry_perms["T"]
    odd = sheet_swap_basis(pair, perm, -1)
    even = sheet_swap_basis(pair, perm, 1)

    assert odd.shape[1] + even.shape[1] == pair.dim
    assert np.allclose((odd.T @ odd).toarray(), np.eye(odd.shape[1]))
    assert np.allclose((odd.T @ even).toarray(), 0.0)
    spectrum = cover_odd_spectrum(pair, perm, 4)
    assert len(spectrum) == 4
    assert spectrum.values[0] > 0
    assert spectrum.descriptor["subspace"] == "odd"


def test_symmetry_pair_equality() -> None:
    """Test that a d1-symmetric rectangle half gives equal first eigenvalues."""
    report = symmetry_pair_check(build_rectangle_half("top", 1.0, 0.5), 0.25)

    assert report.d1_symmetric
    assert report.status == "equal"
    assert report.passed
    assert set(report.to_dict()) >= {"lambda_axisymmetric", "lambda_central", "margin", "status"}


def test_compare_spectra_is_a_pseudometric() -> None:
    """Test symmetry, zero self-distance and the triangle inequality on random triples."""
    rng = np.random.default_rng(17)
    for _ in range(25):
        a, b, c = (_spectrum(sorted(rng.uniform(0.0, 50.0, 6))) for _ in range(3))
        ab, ab_diffs = compare_spectra(a, b, 5)
        ba, ba_diffs = compare_spectra(b, a, 5)

        assert ab == ba
        assert ab_diffs == [-d for d in ba_diffs]
        assert compare_spectra(a, a, 5)[0] == 0.0
        assert ab <= compare_spectra(a, c, 5)[0] + compare_spectra(c, b, 5)[0] + 1e-12


def _extrapolation(value: float, error: float) -> Extrapolation:
    values = np.array([value])
    return Extrapolation(values=values, errors=np.array([error]), coarse=values, fine=values, order=[0])


@pytest.mark.parametrize(
    ("d1_symmetric", "central", "warned"),
    [(False, 10.0, True), (True, 10.0, False), (False, 10.5, False)],
)
def test_unexpected_equality_is_flagged(d1_symmetric: bool, central: float, warned: bool) -> None:
    """Test that equality on a half without a perpendicular axis passes with a warning."""
    report = SymmetryPairReport(
        name="half", axisymmetric=_extrapolation(10.0, 1e-4), central=_extrapolation(central, 1e-4),
        d1_symmetric=d1_symmetric,
    )

    assert report.passed
    assert bool(report.warnings) is warned
    assert report.to_dict()["warnings"] == report.warnings
