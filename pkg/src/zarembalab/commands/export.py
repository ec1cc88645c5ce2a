"""Export command: figures, VTK grids and mesh files for a config or a saved mesh."""

from __future__ import annotations

import sys
from pathlib import Path
from typing import Any

from qualitybase.commands.base import Command

from ..assembly import assemble  # noqa: TID252
from ..domains import build_spec  # noqa: TID252
from ..eigensolve import solve_lowest  # noqa: TID252
from ..errors import ConfigError  # noqa: TID252
from ..geometry import MetricWeight  # noqa: TID252
from ..helpers import load_experiment, parse_number  # noqa: TID252
from ..mesh import mesh_domain  # noqa: TID252
from ..serialize import export_vtk, read_mesh, write_mesh  # noqa: TID252


def _eigenfields(mesh: Any, weight: MetricWeight, count: int) -> tuple[list[float], list[Any]]:
    pair = assemble(mesh, weight)
    spectrum, basis = solve_lowest(pair, min(count, pair.dim))
    fields = [pair.scatter(basis.vectors[:, i]) for i in range(len(spectrum))]
    return spectrum.values.tolist(), fields


def _export_command(args: list[str]) -> bool:  # noqa: C901
    """Export a domain figure, mesh figure, eigenfunction figure, VTK grid or mesh file.

    Args:
        args: Command arguments.

    Returns:
        True if command executed successfully, False otherwise.
    """
    source: str | None = None
    h: float | None = None
    weight_name: str | None = None
    mode = 0
    modes = 6
    outputs: dict[str, str] = {}

    i = 0
    while i < len(args):
        arg = args[i]
        if arg in ("--domain", "--mesh-figure", "--eigen", "--vtk", "--mesh") and i + 1 < len(args):
            outputs[arg[2:]] = args[i + 1]
            i += 2
        elif arg == "--h" and i + 1 < len(args):
            h = parse_number(arg, args[i + 1], float)
            if h is None:
                return False
            i += 2
        elif arg == "--weight" and i + 1 < len(args):
            weight_name = args[i + 1]
            i += 2
        elif arg == "--mode" and i + 1 < len(args):
            parsed = parse_number(arg, args[i + 1], int)
            if parsed is None:
                return False
            mode = int(parsed)
            i += 2
        elif arg == "--modes" and i + 1 < len(args):
            parsed = parse_number(arg, args[i + 1], int)
            if parsed is None:
                return False
            modes = int(parsed)
            i += 2
        elif not arg.startswith("--") and source is None:
            source = arg
            i += 1
        else:
            print(f"Unknown argument: {arg}", file=sys.stderr)
            return False

    if source is None or not outputs:
        print("Usage: export SOURCE [--domain|--mesh-figure|--eigen|--vtk|--mesh PATH] ...", file=sys.stderr)
        return False

    from .. import figures  # noqa: TID252

    spec = None
    if source.endswith(".mesh"):
        mesh = read_mesh(source)
        weight = MetricWeight.from_dict(weight_name or "flat")
    else:
        config = load_experiment(source)
        if config.domain is None:
            raise ConfigError("export needs a config with a domain", source=source)
        spec = build_spec(config.domain)
        weight = MetricWeight.from_dict(weight_name) if weight_name else spec.weight
        mesh = mesh_domain(spec, h or config.mesh.h, symmetric=config.mesh.symmetric, seed=config.mesh.seed)

    if "domain" in outputs:
        if spec is None:
            raise ConfigError("domain figures need a config, not a mesh file", source=source)
        figures.plot_domain(spec, outputs["domain"])
    if "mesh-figure" in outputs:
        figures.plot_mesh(mesh, outputs["mesh-figure"])
    if "mesh" in outputs:
        write_mesh(mesh, outputs["mesh"])
    if "eigen" in outputs or "vtk" in outputs:
        values, fields = _eigenfields(mesh, weight, max(modes, mode + 1))
        if "eigen" in outputs:
            figures.plot_eigenfunction(mesh, fields[mode], outputs["eigen"], spec,
                                       title=f"lambda = {values[mode]:.6f}")
        if "vtk" in outputs:
            export_vtk(mesh, outputs["vtk"], {f"mode{k}": f for k, f in enumerate(fields)})
    for kind, path in outputs.items():
        print(f"{kind}: {Path(path)}")
    return True


export_command = Command(_export_command, "Export figures, VTK grids or mesh files (SOURCE --domain/--eigen/--vtk/--mesh PATH)")
