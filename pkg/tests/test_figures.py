"""Test the SVG figures."""

from __future__ import annotations

from pathlib import Path

import numpy as np

from zarembalab import figures
from zarembalab.analysis import NuTable
from zarembalab.dtn import ScanResult
from zarembalab.geometry import build_half_disk
from zarembalab.mesh import mesh_symmetric


def test_domain_figure(tmp_path: Path) -> None:
    """Test that both tag styles reach the SVG."""
    path = tmp_path / "domain.svg"
    figures.plot_domain(build_half_disk("I"), path)
    text = path.read_text()

    assert text.lstrip().startswith("<?xml")
    assert "curve-D" in text and "curve-N" in text


def test_domain_figure_is_reproducible(tmp_path: Path) -> None:
    """Test that drawing twice gives identical SVG text."""
    spec = build_half_disk("II")
    figures.plot_domain(spec, tmp_path / "a.svg")
    figures.plot_domain(spec, tmp_path / "b.svg")

    assert (tmp_path / "a.svg").read_text() == (tmp_path / "b.svg").read_text()


def test_mesh_and_eigenfunction_figures(tmp_path: Path) -> None:
    """Test the mesh and nodal-field figures."""
    spec = build_half_disk("I")
    mesh = mesh_symmetric(spec, 0.25)
    figures.plot_mesh(mesh, tmp_path / "mesh.svg")
    figures.plot_eigenfunction(mesh, mesh.vertices[:, 0], tmp_path / "mode.svg", spec, title="x")

    assert (tmp_path / "mesh.svg").stat().st_size > 0
    assert (tmp_path / "mode.svg").stat().st_size > 0


def test_nu_table_figure(tmp_path: Path) -> None:
    """Test the ν heat map with a trivial cell and an empty cell."""
    table = NuTable(max_n=2)
    table.nu.update({(1, 1): 0.0, (1, 2): 0.2})
    table.trivial[(1, 1)] = "mirror"
    figures.plot_nu_table(table, tmp_path / "nu.svg")

    assert (tmp_path / "nu.svg").exists()


def test_scan_figure(tmp_path: Path) -> None:
    """Test the scan plot with crossings, poles and a gap."""
    samples = [{"lambda": float(x), "admissible": True, "sign": float(np.sign(x - 5)), "logabs": 1.0}
               for x in np.linspace(1, 9, 9)]
    samples[3]["admissible"] = False
    scan = ScanResult(samples=samples, crossings=[5.0], poles=[7.5], gaps=[(3.0, 5.0)])
    figures.plot_scan(scan, tmp_path / "scan.svg", reference=[5.0])

    assert (tmp_path / "scan.svg").exists()
