"""Crossing scan of det(C + I) on the quarter-disk against direct eigenvalues."""

from __future__ import annotations

import logging
from typing import TYPE_CHECKING, Any

import numpy as np

from ..assembly import assemble
from ..dtn import build_quarter_geometry, problem_i_pair, scan_crossings
from ..eigensolve import cluster_multiplicities, solve_lowest
from ..geometry import MetricWeight
from ..kit import TaskBase

if TYPE_CHECKING:
    from ..schema import ExperimentConfig
    from ..serialize import Workspace

logger = logging.getLogger(__name__)

MATCH_RTOL = 1e-3


def match_crossings(crossings: list[float], direct: Any, rtol: float = MATCH_RTOL) -> dict[str, Any]:
    """Pair every direct eigenvalue with the nearest unused crossing within ``rtol``."""
    unused = list(crossings)
    matched, missing = [], []
    for value in np.asarray(direct, dtype=float):
        if unused:
            j = int(np.argmin([abs(c - value) for c in unused]))
            if abs(unused[j] - value) <= rtol * abs(value):
                crossing = unused.pop(j)
                matched.append({"direct": float(value), "crossing": crossing,
                                "relative": abs(crossing - value) / abs(value)})
                continue
        missing.append(float(value))
    return {"matched": matched, "missing": missing, "extra": unused,
            "one_to_one": not missing and not unused}


class DtnScanTask(TaskBase):
    name = "dtn-scan"
    display_name = "Trace-operator scan"
    description = "Sign changes of det(C_lambda + I) versus direct mixed eigenvalues"

    def execute(self, config: ExperimentConfig, workspace: Workspace) -> dict[str, Any]:
        opts = config.options
        geometry = build_quarter_geometry(config.mesh.h)
        half, pair_i = problem_i_pair(geometry)
        pair_ii = assemble(half.swapped(), MetricWeight.flat())
        wanted = min(opts.direct_count + 1, pair_i.dim)
        s_i, _ = solve_lowest(pair_i, wanted, config.solver.tol)
        s_ii, _ = solve_lowest(pair_ii, wanted, config.solver.tol)
        # distinct values only; the scan sees each eigenvalue once
        direct = np.array([v for v, _ in cluster_multiplicities(s_i)])
        lam_lo = opts.lam_lo if opts.lam_lo is not None else 0.5 * float(direct[0])
        if opts.lam_hi is not None:
            lam_hi = opts.lam_hi
        elif len(direct) > opts.direct_count:
            lam_hi = 0.5 * float(direct[opts.direct_count - 1] + direct[opts.direct_count])
        else:
            lam_hi = 1.05 * float(direct[-1])
        window = direct[(direct >= lam_lo) & (direct <= lam_hi)]
        scan = scan_crossings(geometry, lam_lo, lam_hi, opts.grid)
        against_i = match_crossings(scan.crossings, window)
        window_ii = s_ii.values[(s_ii.values >= lam_lo) & (s_ii.values <= lam_hi)]
        against_ii = match_crossings(scan.crossings, window_ii)
        rows = [
            [s["lambda"], s.get("sign", np.nan), s.get("logabs", np.nan), float(s["admissible"])]
            for s in scan.samples
        ]
        workspace.write_csv("scan.csv", ["lambda", "sign", "log_abs_det", "admissible"], rows)
        workspace.write_mesh("quarter.mesh", geometry.mesh)
        if opts.figures:
            from .. import figures

            figures.plot_scan(scan, workspace.path("scan.svg", "figure"), reference=window.tolist())
        if not against_i["one_to_one"]:
            logger.warning("crossings and direct eigenvalues disagree: missing %s, extra %s",
                           against_i["missing"], against_i["extra"])
        return {
            "window": [lam_lo, lam_hi],
            "trace_dimension": geometry.dim,
            "piece_lengths": geometry.piece_lengths(),
            "direct_problem_i": window,
            "direct_problem_ii": window_ii,
            "crossings": scan.crossings,
            "poles": scan.poles,
            "gaps": scan.gaps,
            "match_problem_i": against_i,
            "match_problem_ii": against_ii,
        }
