"""Result files: JSON bundles, CSV tables, mesh text files and grid exports.

Numbers go to CSV with 17 significant digits and to JSON with Python's
shortest round-trip representation, so re-running a config reproduces every
numeric payload byte for byte.
"""

from __future__ import annotations

import io
import json
import logging
import math
import os
import shutil
import tempfile
from pathlib import Path
from typing import TYPE_CHECKING, Any

import numpy as np
from scipy import io as scipy_io

from .errors import MeshError
from .geometry import Curve
from .kit.package import optional_module
from .mesh import Mesh, validate_mesh

if TYPE_CHECKING:
    from scipy import sparse

logger = logging.getLogger(__name__)

MESH_MAGIC = "zarembalab-mesh 1"
CSV_FORMAT = "%.17g"


def to_jsonable(value: Any) -> Any:
    """Plain JSON types for numpy scalars/arrays, tuples and objects with ``to_dict``."""
    if hasattr(value, "to_dict"):
        return to_jsonable(value.to_dict())
    if isinstance(value, dict):
        return {str(k): to_jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return to_jsonable(value.tolist())
    if isinstance(value, np.bool_):
        return bool(value)
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        # JSON has no NaN/inf
        return value if math.isfinite(value) else str(value)
    if isinstance(value, Path):
        return value.as_posix()
    return value


def dump_json(payload: Any) -> str:
    return json.dumps(to_jsonable(payload), indent=2, sort_keys=True, ensure_ascii=False) + "\n"


def format_csv(header: list[str], rows: Any) -> str:
    """CSV text with a header line and 17-digit floats."""
    data = np.atleast_2d(np.asarray(rows, dtype=float))
    buffer = io.StringIO()
    np.savetxt(buffer, data, fmt=CSV_FORMAT, delimiter=",", header=",".join(header), comments="")
    return buffer.getvalue()


# ---------------------------------------------------------------------------
# Mesh text format


def mesh_to_text(mesh: Mesh) -> str:
    """Plain-text mesh with curves, tags, copy maps and symmetry permutations."""
    out = [MESH_MAGIC]
    out.append("descriptor " + json.dumps(to_jsonable(mesh.descriptor), sort_keys=True))
    out.append("curves " + json.dumps([c.to_dict() for c in mesh.curves], sort_keys=True))
    out.append(f"vertices {mesh.n_vertices}")
    out += [f"{x:.17g} {y:.17g}" for x, y in mesh.vertices]
    out.append(f"triangles {mesh.n_triangles}")
    out += [" ".join(map(str, t)) for t in mesh.triangles.tolist()]
    out.append(f"boundary {len(mesh.boundary_edges)}")
    out += [
        f"{a} {b} {tag} {curve}"
        for (a, b), tag, curve in zip(mesh.boundary_edges.tolist(), mesh.edge_tags, mesh.edge_curves.tolist())
    ]
    if mesh.sheet_of_vertex is not None:
        out.append("sheets " + " ".join(map(str, mesh.sheet_of_vertex.tolist())))
    for k, copy in enumerate(mesh.copies):
        out.append(f"copy {k} " + " ".join(map(str, copy.tolist())))
    if mesh.triangle_copy is not None:
        out.append("triangle_copy " + " ".join(map(str, mesh.triangle_copy.tolist())))
    for name in sorted(mesh.symmetry_perms):
        out.append(f"perm {name} " + " ".join(map(str, mesh.symmetry_perms[name].tolist())))
    return "\n".join(out) + "\n"


def _ints(words: list[str]) -> np.ndarray:
    return np.asarray([int(w) for w in words], dtype=np.int64)


def mesh_from_text(text: str) -> Mesh:
    """Inverse of :func:`mesh_to_text`; the result is validated."""
    lines = text.splitlines()
    if not lines or lines[0] != MESH_MAGIC:
        raise MeshError("not a mesh file", header=lines[0] if lines else "")
    fields: dict[str, Any] = {"copies": [], "symmetry_perms": {}}
    i = 1
    try:
        while i < len(lines):
            key, _, rest = lines[i].partition(" ")
            i += 1
            if key == "descriptor":
                fields["descriptor"] = json.loads(rest)
            elif key == "curves":
                fields["curves"] = tuple(Curve.from_dict(c) for c in json.loads(rest))
            elif key in ("vertices", "triangles", "boundary"):
                count = int(rest)
                block = [line.split() for line in lines[i:i + count]]
                i += count
                if key == "vertices":
                    fields["vertices"] = np.asarray(block, dtype=float).reshape(count, 2)
                elif key == "triangles":
                    fields["triangles"] = np.asarray(block, dtype=np.int64).reshape(count, 3)
                else:
                    fields["boundary_edges"] = np.asarray([r[:2] for r in block], dtype=np.int64).reshape(count, 2)
                    fields["edge_tags"] = np.asarray([r[2] for r in block], dtype="<U1")
                    fields["edge_curves"] = np.asarray([r[3] for r in block], dtype=np.int64)
            elif key == "sheets":
                fields["sheet_of_vertex"] = _ints(rest.split())
            elif key == "copy":
                fields["copies"].append(_ints(rest.split()[1:]))
            elif key == "triangle_copy":
                fields["triangle_copy"] = _ints(rest.split())
            elif key == "perm":
                name, *words = rest.split()
                fields["symmetry_perms"][name] = _ints(words)
            elif key:
                raise MeshError("unknown mesh file section", section=key, line=i)
    except (ValueError, IndexError) as exc:
        raise MeshError("malformed mesh file", line=i, reason=str(exc)) from exc
    fields["copies"] = tuple(fields["copies"])
    mesh = Mesh(**fields)
    validate_mesh(mesh)
    return mesh


def write_mesh(mesh: Mesh, path: str | Path) -> Path:
    path = Path(path)
    path.write_text(mesh_to_text(mesh), encoding="utf-8")
    return path


def read_mesh(path: str | Path) -> Mesh:
    return mesh_from_text(Path(path).read_text(encoding="utf-8"))


# ---------------------------------------------------------------------------
# Third-party exports


def export_vtk(mesh: Mesh, path: str | Path, point_data: dict[str, np.ndarray] | None = None) -> Path:
    """Legacy VTK unstructured grid with optional nodal fields (eigenfunctions)."""
    meshio = optional_module("meshio")
    if meshio is None:
        raise MeshError("VTK export needs the meshio package")
    points = np.column_stack([mesh.vertices, np.zeros(mesh.n_vertices)])
    data = {name: np.asarray(values, dtype=float) for name, values in (point_data or {}).items()}
    path = Path(path)
    meshio.write_points_cells(str(path), points, [("triangle", mesh.triangles)], point_data=data,
                              file_format="vtk", binary=False)
    return path


def export_matrix(matrix: sparse.spmatrix, path: str | Path) -> Path:
    """Matrix Market coordinate file with 17-digit values."""
    path = Path(path)
    scipy_io.mmwrite(str(path), matrix, precision=17)
    return path


# ---------------------------------------------------------------------------
# Result directory


class Workspace:
    """Collects the files of one result bundle and publishes them atomically.

    Files are written into a temporary sibling directory; :meth:`commit`
    renames it into place, so a failed run leaves no partial output.
    """

    def __init__(self, target: str | Path) -> None:
        self.target = Path(target)
        self.target.parent.mkdir(parents=True, exist_ok=True)
        self.staging = Path(tempfile.mkdtemp(prefix=f".{self.target.name}-", dir=self.target.parent))
        self.files: dict[str, str] = {}

    def path(self, name: str, kind: str = "data") -> Path:
        self.files[name] = kind
        return self.staging / name

    def write_text(self, name: str, text: str, kind: str = "data") -> Path:
        path = self.path(name, kind)
        path.write_text(text, encoding="utf-8")
        return path

    def write_json(self, name: str, payload: Any) -> Path:
        return self.write_text(name, dump_json(payload), "json")

    def write_csv(self, name: str, header: list[str], rows: Any) -> Path:
        return self.write_text(name, format_csv(header, rows), "csv")

    def write_mesh(self, name: str, mesh: Mesh) -> Path:
        return self.write_text(name, mesh_to_text(mesh), "mesh")

    def commit(self) -> Path:
        if self.target.exists():
            shutil.rmtree(self.target)
        os.replace(self.staging, self.target)
        logger.info("results written to %s", self.target)
        return self.target

    def discard(self) -> None:
        shutil.rmtree(self.staging, ignore_errors=True)
