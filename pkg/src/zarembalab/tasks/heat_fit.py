"""Heat-trace fit: the 1/sqrt(t) coefficient against the boundary-length imbalance."""

from __future__ import annotations

import math
from typing import TYPE_CHECKING, Any

import numpy as np

from ..analysis import bessel_disk_spectrum, heat_fit, heat_window, length_balance
from ..assembly import assemble_full
from ..domains import build_spec
from ..errors import ConfigError
from ..geometry import BoundaryTag
from ..kit import TaskBase
from ..mesh import mesh_domain
from .base import solve_on

if TYPE_CHECKING:
    from ..schema import ExperimentConfig
    from ..serialize import Workspace


class HeatFitTask(TaskBase):
    name = "heat-fit"
    display_name = "Heat-trace fit"
    description = "Fit Z(t) = A/(4 pi t) + c/sqrt(t) + d and read off L_N - L_D"

    def execute(self, config: ExperimentConfig, workspace: Workspace) -> dict[str, Any]:
        assert config.domain is not None
        opts = config.options
        spec = build_spec(config.domain)
        if opts.source == "bessel":
            if config.domain.family != "disk":
                raise ConfigError("bessel source needs the disk family", family=config.domain.family)
            radius = config.domain.radius
            values = bessel_disk_spectrum(config.solver.count, BoundaryTag(config.domain.tag)) / radius**2
            area = math.pi * radius**2
        else:
            mesh = mesh_domain(spec, config.mesh.h, symmetric=config.mesh.symmetric, seed=config.mesh.seed)
            _, mass = assemble_full(mesh, spec.weight)
            area = float(mass.sum())
            _, spectrum, _ = solve_on(mesh, spec, config.solver)
            values = spectrum.values
            workspace.write_mesh("domain.mesh", mesh)
        window = heat_window(values, opts.t_max)
        fit = heat_fit(values, area, window, fit_area=opts.fit_area)
        balance = length_balance(spec)
        expected = balance["difference"]
        error = abs(fit.implied_imbalance - expected)
        perimeter = balance["dirichlet"] + balance["neumann"]
        t = np.geomspace(window[0], window[1], 32)
        z = np.exp(-np.outer(t, values)).sum(axis=1)
        model = fit.area / (4 * math.pi * t) + fit.c / np.sqrt(t) + fit.d
        workspace.write_csv("heat-trace.csv", ["t", "trace", "model"], np.column_stack([t, z, model]))
        return {
            "source": opts.source,
            "fit": fit.to_dict(),
            "length_balance": balance,
            "expected_imbalance": expected,
            "absolute_error": error,
            "relative_error": error / abs(expected) if expected else None,
            "perimeter": perimeter,
            "error_over_perimeter": error / perimeter,
            "sign_matches": fit.sign == int(np.sign(expected)) if expected else abs(fit.c) < 1e-2,
        }
