"""Boundary-trace operators on the quarter-disk and the crossing scan.

The quarter-disk ``{|z|<1, Re z<0, Im z>0}`` has four labelled pieces: the
Dirichlet arc ``∂₁``, the Neumann arc ``∂₂``, the horizontal radius ``∂₃``
and the vertical radius ``∂₄``. For data on ``∂₄`` (a value ``ξ`` or a flux
``η``) and a condition on ``∂₃`` (``q = 0`` or ``p = 0``) the responses on
``∂₃`` define ``DD, DN, ND, NN``; the composite ``C = DD⁻¹ ND NN⁻¹ DN`` has
eigenvalue ``-1`` exactly at eigenvalues of the mixed half-disk problem.

Traces exclude the corners ``O``, ``i`` and ``-1``. ``O`` is Dirichlet in
every auxiliary problem, as it is a Dirichlet junction of the half-disk.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .assembly import MatrixPair, ShiftedOperator, assemble, assemble_full, boundary_lumped_mass
from .eigensolve import solve_matrices
from .errors import NumericalError, SingularShiftError
from .geometry import Isometry, MetricWeight, build_half_disk, build_quarter_disk
from .mesh import SNAP_TOL, Mesh, mesh_by_reflection, mesh_symmetric

logger = logging.getLogger(__name__)

KINDS = ("DD", "DN", "ND", "NN")
BISECT_TOL = 1e-8
POLE_RTOL = 1e-6
# (data on ∂₄ is Dirichlet, ∂₃ is Dirichlet) for each operator
_CONDITIONS = {"DD": (True, False), "DN": (True, True), "ND": (False, False), "NN": (False, True)}


@dataclass(frozen=True, eq=False)
class QuarterGeometry:
    """Quarter-disk mesh with its piece tables and ordered trace nodes."""

    mesh: Mesh
    pieces: dict[int, np.ndarray]
    trace3: np.ndarray
    trace4: np.ndarray
    lumped3: np.ndarray
    lumped4: np.ndarray
    radius3: np.ndarray
    radius4: np.ndarray
    origin: int
    stiffness: Any
    mass: Any

    @property
    def dim(self) -> int:
        return len(self.trace4)

    def piece_lengths(self) -> tuple[float, ...]:
        return tuple(c.length for c in self.mesh.curves)

    def prescribed(self, dirichlet4: bool, dirichlet3: bool) -> np.ndarray:
        """Homogeneous Dirichlet set of an auxiliary problem, trace data included."""
        parts = [self.pieces[1], np.array([self.origin])]
        if dirichlet4:
            parts.append(self.radius4)
        if dirichlet3:
            parts.append(self.radius3)
        return np.unique(np.concatenate(parts))


def build_quarter_geometry(h: float, weight: MetricWeight | None = None) -> QuarterGeometry:
    """Symmetric quarter-disk mesh; the mirror about ``arg z = 3π/4`` pairs ``∂₃`` with ``∂₄``."""
    if h <= 0:
        raise NumericalError("target edge length must be positive", h=h)
    spec = build_quarter_disk()
    mesh = mesh_symmetric(spec, h)
    labels = [c.label for c in spec.curves]
    v = mesh.vertices
    on = {label: spec.curves[k].contains(v, SNAP_TOL) for k, label in enumerate(labels)}
    origin = int(np.argmin(np.linalg.norm(v, axis=1)))
    top = int(np.argmin(np.linalg.norm(v - np.array([0.0, 1.0]), axis=1)))
    left = int(np.argmin(np.linalg.norm(v - np.array([-1.0, 0.0]), axis=1)))
    p1 = np.flatnonzero(on["arc-dirichlet"])
    p2 = np.setdiff1d(np.flatnonzero(on["arc-neumann"]), p1)
    radius3 = np.flatnonzero(on["horizontal"])
    radius4 = np.flatnonzero(on["vertical"])
    p3 = np.setdiff1d(radius3, [left])
    p4 = np.setdiff1d(radius4, [origin, top])
    trace3 = np.setdiff1d(p3, [origin])
    trace3 = trace3[np.argsort(-v[trace3, 0])]
    trace4 = p4[np.argsort(v[p4, 1])]
    if len(trace3) != len(trace4):
        raise NumericalError("radii carry different node counts; mesh is not mirror symmetric",
                             horizontal=len(trace3), vertical=len(trace4))
    edges = mesh.boundary_edges
    labels_e = mesh.edge_labels
    edges3 = edges[[lab == "horizontal" for lab in labels_e]]
    edges4 = edges[[lab == "vertical" for lab in labels_e]]
    stiffness, mass = assemble_full(mesh, weight or MetricWeight.flat())
    return QuarterGeometry(
        mesh=mesh,
        pieces={1: p1, 2: p2, 3: p3, 4: p4},
        trace3=trace3,
        trace4=trace4,
        lumped3=boundary_lumped_mass(v, edges3)[trace3],
        lumped4=boundary_lumped_mass(v, edges4)[trace4],
        radius3=radius3,
        radius4=radius4,
        origin=origin,
        stiffness=stiffness,
        mass=mass,
    )


def _operator(geometry: QuarterGeometry, kind: str, lam: float) -> tuple[ShiftedOperator, bool, bool]:
    d4, d3 = _CONDITIONS[kind]
    prescribed = geometry.prescribed(d4, d3)
    problem = f"{'D' if d4 else 'N'} on the vertical radius, {'D' if d3 else 'N'} on the horizontal radius"
    return ShiftedOperator(geometry.stiffness, geometry.mass, lam, prescribed, problem), d4, d3


def trace_operator(geometry: QuarterGeometry, kind: str, lam: float) -> np.ndarray:
    """Dense matrix of one trace operator at ``lam``.

    Column ``j`` is the response on ``∂₃`` (value ``p`` or nodal flux ``q``)
    to the ``j``-th nodal datum on ``∂₄``. Fluxes are recovered from the
    weak residual and divided by the trapezoidal boundary mass.

    Raises:
        SingularShiftError: ``lam`` is (numerically) an eigenvalue of the
            auxiliary problem.
    """
    if kind not in KINDS:
        raise NumericalError(f"unknown trace operator: {kind}", allowed=KINDS)
    op, d4, d3 = _operator(geometry, kind, lam)
    m = geometry.dim
    n = geometry.mesh.n_vertices
    identity = np.eye(m)
    if d4:
        values = np.zeros((len(op.prescribed), m))
        position = np.searchsorted(op.prescribed, geometry.trace4)
        values[position] = identity
        w = op.solve(values=values)
    else:
        load = np.zeros((n, m))
        load[geometry.trace4] = geometry.lumped4[:, None] * identity
        w = op.solve(load=load)
    if d3:
        return op.residual(w)[geometry.trace3] / geometry.lumped3[:, None]
    return w[geometry.trace3]


@dataclass(frozen=True, eq=False)
class DtNSet:
    """The four operators at one ``λ`` and their composite."""

    lam: float
    DD: np.ndarray
    DN: np.ndarray
    ND: np.ndarray
    NN: np.ndarray

    @property
    def composite(self) -> np.ndarray:
        return np.linalg.solve(self.DD, self.ND @ np.linalg.solve(self.NN, self.DN))

    def crossing_function(self) -> tuple[float, float]:
        """Sign and log-magnitude of ``det(C + I)``."""
        sign, logabs = np.linalg.slogdet(self.composite + np.eye(len(self.DD)))
        return float(sign), float(logabs)


def build_dtn_set(geometry: QuarterGeometry, lam: float) -> DtNSet:
    ops = {kind: trace_operator(geometry, kind, lam) for kind in KINDS}
    return DtNSet(lam=float(lam), **ops)


def auxiliary_spectra(geometry: QuarterGeometry, lam_hi: float) -> dict[str, np.ndarray]:
    """Eigenvalues below ``lam_hi`` of the four homogeneous auxiliary problems."""
    out: dict[str, np.ndarray] = {}
    n = geometry.mesh.n_vertices
    for kind in KINDS:
        d4, d3 = _CONDITIONS[kind]
        fixed = geometry.prescribed(d4, d3)
        free = np.setdiff1d(np.arange(n), fixed)
        k = geometry.stiffness[free][:, free]
        m = geometry.mass[free][:, free]
        count = min(len(free), 8)
        while True:
            spectrum, _ = solve_matrices(k, m, count)
            if spectrum.values[-1] > lam_hi or count == len(free):
                break
            count = min(len(free), 2 * count)
        out[kind] = spectrum.values[spectrum.values <= lam_hi * (1 + POLE_RTOL)]
    return out


def problem_i_pair(geometry: QuarterGeometry, weight: MetricWeight | None = None) -> tuple[Mesh, MatrixPair]:
    """Half-disk Problem I on the quarter mesh and its mirror about the imaginary axis."""
    half = mesh_by_reflection(
        geometry.mesh, [Isometry.reflection(math.pi / 2, name="mirror-y")], build_half_disk("I")
    )
    return half, assemble(half, weight or MetricWeight.flat())


@dataclass
class ScanResult:
    """Samples of ``det(C_λ + I)`` and the refined crossings."""

    samples: list[dict[str, Any]] = field(default_factory=list)
    crossings: list[float] = field(default_factory=list)
    poles: list[float] = field(default_factory=list)
    gaps: list[tuple[float, float]] = field(default_factory=list)

    def to_dict(self) -> dict[str, Any]:
        return {
            "crossings": self.crossings,
            "poles": self.poles,
            "gaps": [list(g) for g in self.gaps],
            "samples": self.samples,
        }


def _evaluate(geometry: QuarterGeometry, lam: float) -> tuple[float, float] | None:
    try:
        return build_dtn_set(geometry, lam).crossing_function()
    except (SingularShiftError, np.linalg.LinAlgError):
        return None


def _bisect(geometry: QuarterGeometry, lo: float, hi: float, s_lo: float) -> tuple[float, float] | None:
    while hi - lo > BISECT_TOL * max(1.0, abs(lo)):
        mid = 0.5 * (lo + hi)
        value = _evaluate(geometry, mid)
        if value is None:
            return None
        if value[0] == s_lo:
            lo = mid
        else:
            hi = mid
    value = _evaluate(geometry, 0.5 * (lo + hi))
    return 0.5 * (lo + hi), (value[1] if value is not None else math.inf)


def scan_crossings(
    geometry: QuarterGeometry,
    lam_lo: float,
    lam_hi: float,
    grid: int = 200,
) -> ScanResult:
    """Sign changes of ``det(C_λ + I)`` on ``[lam_lo, lam_hi]``.

    Grid points within relative 1e-6 of an auxiliary eigenvalue are skipped.
    Every sign change is bisected to 1e-8; a change whose log-magnitude blows
    up rather than down is a pole and is reported separately.

    Raises:
        NumericalError: bad interval or no admissible grid point.
    """
    if not lam_lo < lam_hi or grid < 2:
        raise NumericalError("scan needs lam_lo < lam_hi and at least two grid points",
                             lam_lo=lam_lo, lam_hi=lam_hi, grid=grid)
    aux = auxiliary_spectra(geometry, lam_hi)
    poles = np.sort(np.concatenate(list(aux.values())))
    result = ScanResult()
    previous: tuple[float, float, float] | None = None
    for lam in np.linspace(lam_lo, lam_hi, grid):
        near = poles[np.abs(poles - lam) <= POLE_RTOL * max(1.0, abs(lam))]
        value = None if len(near) else _evaluate(geometry, float(lam))
        sample: dict[str, Any] = {"lambda": float(lam), "admissible": value is not None}
        if value is None:
            result.samples.append(sample)
            if previous is not None:
                result.gaps.append((previous[0], float(lam)))
            previous = None
            continue
        sample.update(sign=value[0], logabs=value[1])
        result.samples.append(sample)
        if previous is not None and value[0] != previous[1]:
            found = _bisect(geometry, previous[0], float(lam), previous[1])
            if found is None:
                result.gaps.append((previous[0], float(lam)))
            elif found[1] < min(previous[2], value[1]):
                result.crossings.append(found[0])
            else:
                result.poles.append(found[0])
        previous = (float(lam), value[0], value[1])
    if not any(s["admissible"] for s in result.samples):
        raise NumericalError("scan interval is entirely inadmissible", lam_lo=lam_lo, lam_hi=lam_hi)
    logger.info("scan [%g, %g]: %d crossings, %d poles", lam_lo, lam_hi, len(result.crossings), len(result.poles))
    return result
