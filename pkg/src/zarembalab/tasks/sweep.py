"""ν table over the two-parameter disk partitions."""

from __future__ import annotations

from typing import TYPE_CHECKING, Any

import numpy as np

from ..analysis import sweep_disk
from ..kit import TaskBase

if TYPE_CHECKING:
    from ..schema import ExperimentConfig
    from ..serialize import Workspace


class SweepTask(TaskBase):
    name = "sweep"
    display_name = "Disk sweep"
    description = "nu(k, n) for disk partitions (k pi/24, n pi/24), k <= n"

    def execute(self, config: ExperimentConfig, workspace: Workspace) -> dict[str, Any]:
        opts = config.options
        table = sweep_disk(config.mesh.h, opts.eigencount, opts.max_n, opts.step, threads=self.threads)
        rows = [
            [k, n, table.nu.get((k, n), np.nan), float((k, n) in table.trivial)]
            for k, n in table.cells()
        ]
        workspace.write_csv("nu-cells.csv", ["k", "n", "nu", "trivial"], rows)
        workspace.write_csv("nu-matrix.csv", [f"n{n}" for n in range(1, opts.max_n + 1)], table.matrix())
        workspace.write_json("nu-table.json", table)
        if opts.figures:
            from .. import figures

            figures.plot_nu_table(table, workspace.path("nu-table.svg", "figure"))
        report = table.to_dict()
        best = table.nontrivial_min()
        diagonal = table.diagonal()
        report["diagonal_max"] = max(diagonal.values(), default=None)
        report["argmin"] = None if best is None else f"{best[0][0]},{best[0][1]}"
        report["separated"] = (
            best is not None and bool(diagonal) and 10.0 * max(diagonal.values()) <= best[1]
        )
        report["failures"] = {f"{k},{n}": msg for (k, n), msg in table.failures.items()}
        return report
