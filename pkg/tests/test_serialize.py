"""Test result files: JSON, CSV, the mesh text format and the workspace."""

from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np
import pytest
from scipy import io as scipy_io

from zarembalab.assembly import assemble
from zarembalab.errors import MeshError
from zarembalab.geometry import MetricWeight, build_half_disk
from zarembalab.mesh import mesh_symmetric
from zarembalab.serialize import (
    MESH_MAGIC,
    Workspace,
    dump_json,
    export_matrix,
    export_vtk,
    format_csv,
    mesh_from_text,
    mesh_to_text,
    read_mesh,
    to_jsonable,
    write_mesh,
)


@pytest.fixture(scope="module")
def mesh():
    return mesh_symmetric(build_half_disk("I"), 0.25)


def test_to_jsonable() -> None:
    """Test conversion of numpy values, tuples and non-finite floats."""
    data = to_jsonable({"a": np.arange(3), "b": (np.float64(0.5), np.bool_(True)), 3: math.inf, "n": math.nan})

    assert data == {"a": [0, 1, 2], "b": [0.5, True], "3": "inf", "n": "nan"}


def test_dump_json_is_sorted_and_exact() -> None:
    """Test that floats keep their shortest round-trip form."""
    text = dump_json({"b": 0.1 + 0.2, "a": 1})

    assert text.index('"a"') < text.index('"b"')
    assert json.loads(text)["b"] == 0.1 + 0.2


def test_format_csv() -> None:
    """Test the header line and 17 significant digits."""
    text = format_csv(["k", "lambda"], [[0, 1.0 / 3.0]])
    lines = text.splitlines()

    assert lines[0] == "k,lambda"
    assert float(lines[1].split(",")[1]) == 1.0 / 3.0


def test_mesh_text_round_trip(mesh) -> None:
    """Test that a mesh file restores coordinates, tags, copies and permutations."""
    text = mesh_to_text(mesh)
    restored = mesh_from_text(text)

    assert text.startswith(MESH_MAGIC)
    assert np.array_equal(restored.vertices, mesh.vertices)
    assert np.array_equal(restored.triangles, mesh.triangles)
    assert restored.edge_tags.tolist() == mesh.edge_tags.tolist()
    assert len(restored.copies) == len(mesh.copies)
    assert set(restored.symmetry_perms) == set(mesh.symmetry_perms)
    assert mesh_to_text(restored) == text, "Re-serialization must be byte identical"


def test_mesh_file(tmp_path: Path, mesh) -> None:
    """Test writing and reading a mesh file."""
    path = write_mesh(mesh, tmp_path / "half.mesh")

    assert read_mesh(path).n_vertices == mesh.n_vertices


def test_bad_mesh_text() -> None:
    """Test that foreign or truncated files raise MeshError."""
    with pytest.raises(MeshError):
        mesh_from_text("something else\n")
    with pytest.raises(MeshError):
        mesh_from_text(f"{MESH_MAGIC}\nvertices 3\n0 0\n")


def test_exports(tmp_path: Path, mesh) -> None:
    """Test the VTK grid and Matrix Market exports."""
    pair = assemble(mesh, MetricWeight.flat())
    vtk = export_vtk(mesh, tmp_path / "mesh.vtk", {"mode0": np.ones(mesh.n_vertices)})
    mtx = export_matrix(pair.stiffness, tmp_path / "k.mtx")

    assert "mode0" in vtk.read_text()
    assert scipy_io.mmread(str(mtx)).shape == pair.stiffness.shape


def test_workspace_commit(tmp_path: Path) -> None:
    """Test that files appear in the target only after commit."""
    target = tmp_path / "run"
    workspace = Workspace(target)
    workspace.write_json("report.json", {"x": 1})
    workspace.write_csv("table.csv", ["a"], [[1.0]])

    assert not target.exists()
    workspace.commit()
    assert (target / "report.json").exists()
    assert workspace.files == {"report.json": "json", "table.csv": "csv"}


def test_workspace_discard(tmp_path: Path) -> None:
    """Test that a discarded workspace leaves nothing behind."""
    workspace = Workspace(tmp_path / "run")
    workspace.write_text("partial.txt", "x")
    workspace.discard()

    assert list(tmp_path.iterdir()) == []
