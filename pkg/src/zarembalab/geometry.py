"""Exact domain descriptions: tagged boundary curves, radial metrics and domain builders.

Every builder returns an immutable :class:`DomainSpec` whose boundary is a single
closed loop of tagged curves. Builders that know a reflection structure attach a
:class:`ReflectionPlan` so the mesh module can produce symmetry-respecting meshes.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Any, Union

import numpy as np
from scipy.integrate import quad

from .errors import GeometryError

logger = logging.getLogger(__name__)

LOOP_TOL = 1e-12
ISOMETRY_TOL = 1e-9
QUAD_EPSABS = 1e-10
TWO_PI = 2.0 * math.pi

Point = tuple[float, float]


def _clean(value: float) -> float:
    """Round trigonometric noise so axis-aligned maps are exact."""
    for exact in (0.0, 1.0, -1.0):
        if abs(value - exact) < 1e-15:
            return exact
    return value


def _as_point(p: Any) -> Point:
    return (float(p[0]), float(p[1]))


class BoundaryTag(str, Enum):
    """Boundary condition carried by a curve."""

    DIRICHLET = "D"
    NEUMANN = "N"

    def swapped(self) -> BoundaryTag:
        """Return the other condition."""
        return BoundaryTag.NEUMANN if self is BoundaryTag.DIRICHLET else BoundaryTag.DIRICHLET


@dataclass(frozen=True)
class Isometry:
    """Planar isometry ``x -> matrix @ x + offset``."""

    matrix: tuple[tuple[float, float], tuple[float, float]]
    offset: Point = (0.0, 0.0)
    name: str = ""
    axis_point: Point | None = None
    axis_angle: float | None = None

    @classmethod
    def identity(cls) -> Isometry:
        return cls(((1.0, 0.0), (0.0, 1.0)), name="id")

    @classmethod
    def reflection(cls, angle: float, point: Point = (0.0, 0.0), name: str = "") -> Isometry:
        """Reflection across the line through ``point`` with direction ``angle``."""
        c, s = _clean(math.cos(2 * angle)), _clean(math.sin(2 * angle))
        matrix = ((c, s), (s, -c))
        px, py = _as_point(point)
        offset = (px - (c * px + s * py), py - (s * px - c * py))
        return cls(matrix, offset, name or f"reflect({angle:.6g})", _as_point(point), float(angle))

    @classmethod
    def rotation(cls, angle: float, point: Point = (0.0, 0.0), name: str = "") -> Isometry:
        """Rotation by ``angle`` about ``point``."""
        c, s = _clean(math.cos(angle)), _clean(math.sin(angle))
        matrix = ((c, -s), (s, c))
        px, py = _as_point(point)
        offset = (px - (c * px - s * py), py - (s * px + c * py))
        return cls(matrix, offset, name or f"rotate({angle:.6g})")

    @classmethod
    def point_reflection(cls, point: Point, name: str = "") -> Isometry:
        """Central symmetry about ``point``."""
        px, py = _as_point(point)
        return cls(((-1.0, 0.0), (0.0, -1.0)), (2 * px, 2 * py), name or "central")

    @property
    def is_reflection(self) -> bool:
        (a, b), (c, d) = self.matrix
        return a * d - b * c < 0

    def apply(self, points: Any) -> np.ndarray:
        """Map a point ``(2,)`` or an array of points ``(n, 2)``."""
        pts = np.asarray(points, dtype=float)
        return pts @ np.asarray(self.matrix).T + np.asarray(self.offset)

    def compose(self, other: Isometry) -> Isometry:
        """Return ``self ∘ other``."""
        m = np.asarray(self.matrix) @ np.asarray(other.matrix)
        o = np.asarray(self.matrix) @ np.asarray(other.offset) + np.asarray(self.offset)
        return Isometry(
            ((float(m[0, 0]), float(m[0, 1])), (float(m[1, 0]), float(m[1, 1]))),
            (float(o[0]), float(o[1])),
            f"{self.name}*{other.name}",
        )

    def map_angle(self, theta: float) -> float:
        """Image of a direction angle."""
        phase = math.atan2(self.matrix[1][0], self.matrix[0][0])
        return phase - theta if self.is_reflection else phase + theta

    def project_to_axis(self, points: np.ndarray) -> np.ndarray:
        """Snap points onto the mirror line of a reflection."""
        if self.axis_point is None or self.axis_angle is None:
            return points
        d = np.array([_clean(math.cos(self.axis_angle)), _clean(math.sin(self.axis_angle))])
        q = np.asarray(self.axis_point)
        t = (points - q) @ d
        return q + np.outer(t, d)

    def axis_distance(self, points: np.ndarray) -> np.ndarray:
        """Distance of points to the mirror line (zeros for non-reflections)."""
        if self.axis_point is None or self.axis_angle is None:
            return np.zeros(len(points))
        n = np.array([-math.sin(self.axis_angle), math.cos(self.axis_angle)])
        return np.abs((np.asarray(points) - np.asarray(self.axis_point)) @ n)

    def to_dict(self) -> dict[str, Any]:
        data: dict[str, Any] = {"matrix": [list(r) for r in self.matrix], "offset": list(self.offset), "name": self.name}
        if self.axis_angle is not None:
            data["axis_point"] = list(self.axis_point or (0.0, 0.0))
            data["axis_angle"] = self.axis_angle
        return data

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> Isometry:
        m = data["matrix"]
        axis_point = data.get("axis_point")
        return cls(
            ((float(m[0][0]), float(m[0][1])), (float(m[1][0]), float(m[1][1]))),
            _as_point(data.get("offset", (0.0, 0.0))),
            data.get("name", ""),
            _as_point(axis_point) if axis_point is not None else None,
            data.get("axis_angle"),
        )


@dataclass(frozen=True)
class SheetMap:
    """Angular map ``phi -> flip * phi + shift (mod 4π)`` on the double cover."""

    name: str
    flip: int
    shift: float

    def __call__(self, phi: float) -> float:
        return (self.flip * phi + self.shift) % (2 * TWO_PI)

    def to_dict(self) -> dict[str, Any]:
        return {"name": self.name, "flip": self.flip, "shift": self.shift}


SymmetryHint = Union[Isometry, SheetMap]


def sheet_of_angle(angle: float, sheets: int = 2) -> int:
    """Sheet index of a cover angle; exact multiples of 2π start the next sheet."""
    q = angle / TWO_PI
    k = round(q) if abs(q - round(q)) < 1e-9 else math.floor(q)
    return int(k) % sheets


@dataclass(frozen=True)
class Curve:
    """Tagged boundary piece: a straight segment or a circular arc.

    Arcs are stored with ``angle0 < angle1``; ``reverse`` records traversal
    from ``angle1`` to ``angle0`` inside a boundary loop.
    """

    kind: str
    tag: BoundaryTag
    p0: Point = (0.0, 0.0)
    p1: Point = (0.0, 0.0)
    center: Point = (0.0, 0.0)
    radius: float = 0.0
    angle0: float = 0.0
    angle1: float = 0.0
    reverse: bool = False
    label: str = ""
    sheet: int = 0

    def __post_init__(self) -> None:
        if self.kind == "segment":
            if math.dist(self.p0, self.p1) <= LOOP_TOL:
                raise GeometryError("segment has zero length", p0=self.p0, p1=self.p1)
        elif self.kind == "arc":
            if self.radius <= 0 or not self.angle0 < self.angle1:
                raise GeometryError(
                    "arc needs positive radius and angle0 < angle1",
                    radius=self.radius, angle0=self.angle0, angle1=self.angle1,
                )
        else:
            raise GeometryError(f"unknown curve kind: {self.kind}")
        if not isinstance(self.tag, BoundaryTag):
            object.__setattr__(self, "tag", BoundaryTag(self.tag))

    @classmethod
    def segment(cls, p0: Any, p1: Any, tag: BoundaryTag, label: str = "", sheet: int = 0) -> Curve:
        return cls("segment", tag, p0=_as_point(p0), p1=_as_point(p1), label=label, sheet=sheet)

    @classmethod
    def arc(
        cls,
        center: Any,
        radius: float,
        angle0: float,
        angle1: float,
        tag: BoundaryTag,
        label: str = "",
        reverse: bool = False,
    ) -> Curve:
        return cls(
            "arc", tag, center=_as_point(center), radius=float(radius),
            angle0=float(angle0), angle1=float(angle1), reverse=reverse, label=label,
        )

    @property
    def is_arc(self) -> bool:
        return self.kind == "arc"

    def angle_at(self, s: Any) -> Any:
        """Arc angle at traversal parameter ``s`` in [0, 1]."""
        span = self.angle1 - self.angle0
        s = np.asarray(s, dtype=float)
        return self.angle1 - s * span if self.reverse else self.angle0 + s * span

    def points(self, s: Any) -> np.ndarray:
        """Points at traversal parameters ``s`` (array ``(n, 2)``)."""
        s = np.atleast_1d(np.asarray(s, dtype=float))
        if self.is_arc:
            t = self.angle_at(s)
            return np.column_stack(
                (self.center[0] + self.radius * np.cos(t), self.center[1] + self.radius * np.sin(t))
            )
        p0, p1 = np.asarray(self.p0), np.asarray(self.p1)
        return p0 + np.outer(s, p1 - p0)

    @property
    def start(self) -> np.ndarray:
        return self.points(0.0)[0]

    @property
    def end(self) -> np.ndarray:
        return self.points(1.0)[0]

    @property
    def midpoint(self) -> np.ndarray:
        return self.points(0.5)[0]

    @property
    def length(self) -> float:
        if self.is_arc:
            return self.radius * (self.angle1 - self.angle0)
        return math.dist(self.p0, self.p1)

    def endpoint_sheets(self, sheets: int) -> tuple[int, int]:
        """Sheet index of the start and end points."""
        if sheets == 1:
            return (0, 0)
        if not self.is_arc:
            return (self.sheet, self.sheet)
        a, b = (self.angle1, self.angle0) if self.reverse else (self.angle0, self.angle1)
        return (sheet_of_angle(a, sheets), sheet_of_angle(b, sheets))

    def discretize(self, h: float) -> np.ndarray:
        """Equally spaced points (arcs: equal angles) with spacing at most ``h``."""
        n = max(1, math.ceil(self.length / h - 1e-9))
        return self.points(np.linspace(0.0, 1.0, n + 1))

    def project(self, points: Any) -> np.ndarray:
        """Closest points on the supporting line or circle."""
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        if self.is_arc:
            c = np.asarray(self.center)
            d = pts - c
            r = np.linalg.norm(d, axis=1)
            r[r == 0] = 1.0
            return c + self.radius * d / r[:, None]
        p0, p1 = np.asarray(self.p0), np.asarray(self.p1)
        e = p1 - p0
        t = (pts - p0) @ e / (e @ e)
        return p0 + np.outer(t, e)

    def parameter_of(self, point: Any) -> float:
        """Traversal parameter of a point lying on the curve."""
        p = np.asarray(point, dtype=float)
        if self.is_arc:
            theta = math.atan2(p[1] - self.center[1], p[0] - self.center[0])
            theta = self.angle0 + (theta - self.angle0) % TWO_PI
            if theta > self.angle1 + 1e-9 and abs(theta - TWO_PI - self.angle0) < 1e-9:
                theta -= TWO_PI
            s = (theta - self.angle0) / (self.angle1 - self.angle0)
            return 1.0 - s if self.reverse else s
        p0, p1 = np.asarray(self.p0), np.asarray(self.p1)
        e = p1 - p0
        return float((p - p0) @ e / (e @ e))

    def contains(self, points: Any, tol: float = 1e-9) -> np.ndarray:
        """Mask of points lying on this curve (within ``tol``)."""
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        on_support = np.linalg.norm(self.project(pts) - pts, axis=1) <= tol * max(1.0, self.radius)
        inside = np.array([-tol <= self.parameter_of(p) <= 1 + tol for p in pts])
        return on_support & inside

    def split(self, params: list[float]) -> list[Curve]:
        """Split at interior traversal parameters."""
        cuts = sorted(s for s in params if 1e-9 < s < 1 - 1e-9)
        if not cuts:
            return [self]
        bounds = [0.0, *cuts, 1.0]
        pieces = []
        for a, b in zip(bounds[:-1], bounds[1:]):
            if self.is_arc:
                t0, t1 = sorted((float(self.angle_at(a)), float(self.angle_at(b))))
                pieces.append(replace(self, angle0=t0, angle1=t1))
            else:
                pts = self.points([a, b])
                pieces.append(replace(self, p0=_as_point(pts[0]), p1=_as_point(pts[1])))
        return pieces

    def reversed(self) -> Curve:
        if self.is_arc:
            return replace(self, reverse=not self.reverse)
        return replace(self, p0=self.p1, p1=self.p0)

    def with_tag(self, tag: BoundaryTag) -> Curve:
        return replace(self, tag=tag)

    def swapped(self) -> Curve:
        return replace(self, tag=self.tag.swapped())

    def transformed(self, iso: Isometry, label: str | None = None) -> Curve:
        """Image under a planar isometry, same traversal order."""
        new_label = self.label if label is None else label
        if not self.is_arc:
            q0, q1 = iso.apply(self.p0), iso.apply(self.p1)
            return replace(self, p0=_as_point(q0), p1=_as_point(q1), label=new_label)
        center = _as_point(iso.apply(self.center))
        if iso.is_reflection:
            a0, a1 = iso.map_angle(self.angle1), iso.map_angle(self.angle0)
            reverse = not self.reverse
        else:
            a0, a1 = iso.map_angle(self.angle0), iso.map_angle(self.angle1)
            reverse = self.reverse
        shift = math.floor(a0 / TWO_PI + 1e-12) * TWO_PI
        return replace(
            self, center=center, angle0=a0 - shift, angle1=a1 - shift, reverse=reverse, label=new_label
        )

    def weighted_length(self, weight: MetricWeight) -> float:
        """Arclength in the metric ``f(|z|) |dz|²``."""
        if weight.is_flat:
            return self.length
        if self.is_arc:
            cx, cy = self.center

            def integrand(t: float) -> float:
                r = math.hypot(cx + self.radius * math.cos(t), cy + self.radius * math.sin(t))
                return math.sqrt(float(weight(r))) * self.radius

            value, _ = quad(integrand, self.angle0, self.angle1, epsabs=QUAD_EPSABS, limit=200)
            return float(value)
        p0, p1 = np.asarray(self.p0), np.asarray(self.p1)
        span = self.length

        def integrand_s(s: float) -> float:
            x, y = p0 + s * (p1 - p0)
            return math.sqrt(float(weight(math.hypot(x, y)))) * span

        value, _ = quad(integrand_s, 0.0, 1.0, epsabs=QUAD_EPSABS, limit=200)
        return float(value)

    def to_dict(self) -> dict[str, Any]:
        data: dict[str, Any] = {"kind": self.kind, "tag": self.tag.value, "label": self.label}
        if self.is_arc:
            data.update(center=list(self.center), radius=self.radius,
                        angle0=self.angle0, angle1=self.angle1, reverse=self.reverse)
        else:
            data.update(p0=list(self.p0), p1=list(self.p1))
            if self.sheet:
                data["sheet"] = self.sheet
        return data

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> Curve:
        tag = BoundaryTag(data["tag"])
        if data["kind"] == "arc":
            return cls.arc(data["center"], data["radius"], data["angle0"], data["angle1"], tag,
                           data.get("label", ""), bool(data.get("reverse", False)))
        return cls.segment(data["p0"], data["p1"], tag, data.get("label", ""), int(data.get("sheet", 0)))


@dataclass(frozen=True)
class MetricWeight:
    """Conformal factor ``f(|z|)`` of the metric ``f(|z|) dz dz̄``.

    ``radial`` weights are power series in ``r²``: ``f(r) = Σ c_k r^(2k)``.
    """

    kind: str = "flat"
    coefficients: tuple[float, ...] = ()

    def __post_init__(self) -> None:
        if self.kind not in ("flat", "spherical", "radial"):
            raise GeometryError(f"unknown metric weight: {self.kind}")
        if self.kind == "radial" and not self.coefficients:
            raise GeometryError("radial weight needs coefficients")
        r = np.linspace(0.0, 1.0, 257)
        if np.any(self(r) <= 0):
            raise GeometryError("metric weight must be positive on (0, 1]", kind=self.kind)

    @classmethod
    def flat(cls) -> MetricWeight:
        return cls("flat")

    @classmethod
    def spherical(cls) -> MetricWeight:
        return cls("spherical")

    @property
    def is_flat(self) -> bool:
        return self.kind == "flat"

    def __call__(self, r: Any) -> np.ndarray:
        r = np.asarray(r, dtype=float)
        if self.kind == "flat":
            return np.ones_like(r)
        if self.kind == "spherical":
            return 4.0 / (1.0 + r * r) ** 2
        return np.polynomial.polynomial.polyval(r * r, self.coefficients)

    def at_points(self, points: np.ndarray) -> np.ndarray:
        return self(np.linalg.norm(np.asarray(points, dtype=float), axis=-1))

    def to_dict(self) -> dict[str, Any]:
        data: dict[str, Any] = {"kind": self.kind}
        if self.coefficients:
            data["coefficients"] = list(self.coefficients)
        return data

    @classmethod
    def from_dict(cls, data: dict[str, Any] | str) -> MetricWeight:
        if isinstance(data, str):
            return cls(data)
        return cls(data.get("kind", "flat"), tuple(float(c) for c in data.get("coefficients", ())))


@dataclass(frozen=True)
class Wedge:
    """Angular sector ``angle_lo <= arg(z - apex) <= angle_hi``."""

    apex: Point
    angle_lo: float
    angle_hi: float

    def __post_init__(self) -> None:
        if not 0 < self.angle_hi - self.angle_lo <= math.pi + 1e-12:
            raise GeometryError("degenerate wedge", angle_lo=self.angle_lo, angle_hi=self.angle_hi)

    def contains(self, point: Any, tol: float = 1e-9) -> bool:
        p = np.asarray(point, dtype=float) - np.asarray(self.apex)
        if math.hypot(*p) <= tol:
            return True
        delta = (math.atan2(p[1], p[0]) - self.angle_lo) % TWO_PI
        return delta <= self.angle_hi - self.angle_lo + tol or delta >= TWO_PI - tol

    def to_dict(self) -> dict[str, Any]:
        return {"apex": list(self.apex), "angle_lo": self.angle_lo, "angle_hi": self.angle_hi}


@dataclass(frozen=True)
class ReflectionPlan:
    """Fundamental wedge plus the isometries that rebuild the domain from it.

    The maps are applied in order, each to the union built so far.
    """

    wedge: Wedge | None
    maps: tuple[Isometry, ...]

    def to_dict(self) -> dict[str, Any]:
        return {
            "wedge": self.wedge.to_dict() if self.wedge else None,
            "maps": [m.to_dict() for m in self.maps],
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> ReflectionPlan:
        w = data.get("wedge")
        wedge = Wedge(_as_point(w["apex"]), float(w["angle_lo"]), float(w["angle_hi"])) if w else None
        return cls(wedge, tuple(Isometry.from_dict(m) for m in data.get("maps", ())))


@dataclass(frozen=True)
class DomainSpec:
    """One mixed boundary-value problem before meshing."""

    curves: tuple[Curve, ...]
    weight: MetricWeight = field(default_factory=MetricWeight)
    sheets: int = 1
    slit: tuple[Point, Point] | None = None
    symmetry_hints: tuple[SymmetryHint, ...] = ()
    plan: ReflectionPlan | None = None
    name: str = ""
    metadata: dict[str, Any] = field(default_factory=dict, compare=False, hash=False)

    def __post_init__(self) -> None:
        if self.sheets not in (1, 2):
            raise GeometryError("sheets must be 1 or 2", sheets=self.sheets)
        if not self.curves:
            raise GeometryError("domain has no boundary curves")
        for curve in self.curves:
            if not isinstance(curve.tag, BoundaryTag):
                raise GeometryError("curve without boundary tag", label=curve.label)
        self.loop()
        if self.sheets == 2:
            if self.slit is None:
                raise GeometryError("double cover needs a slit")
            for p in self.slit:
                on_boundary = any(c.contains(p, 1e-9)[0] for c in self.curves)
                if not on_boundary and math.hypot(*p) > LOOP_TOL:
                    raise GeometryError("slit endpoint must lie on the boundary or at O", point=p)

    def _endpoint_keys(self) -> list[tuple[np.ndarray, int]]:
        keys = []
        for curve in self.curves:
            s0, s1 = curve.endpoint_sheets(self.sheets)
            keys.append((curve.start, s0))
            keys.append((curve.end, s1))
        return keys

    def loop(self) -> list[Curve]:
        """Curves in traversal order, each oriented along the loop."""
        return [curve for _, curve in self.oriented_loop()]

    def oriented_loop(self) -> list[tuple[int, Curve]]:
        """Pairs ``(index into curves, oriented curve)`` in traversal order."""
        keys = self._endpoint_keys()
        for i, (p, s) in enumerate(keys):
            shared = sum(
                1 for j, (q, t) in enumerate(keys)
                if j != i and t == s and np.max(np.abs(p - q)) <= LOOP_TOL
            )
            if shared != 1:
                raise GeometryError(
                    "boundary curves do not form a closed loop", point=p.tolist(), shared=shared
                )
        ordered = [(0, self.curves[0])]
        used = {0}
        current_end, current_sheet = keys[1]
        while len(used) < len(self.curves):
            for idx, curve in enumerate(self.curves):
                if idx in used:
                    continue
                (p0, s0), (p1, s1) = keys[2 * idx], keys[2 * idx + 1]
                if s0 == current_sheet and np.max(np.abs(p0 - current_end)) <= LOOP_TOL:
                    ordered.append((idx, curve))
                    current_end, current_sheet = p1, s1
                elif s1 == current_sheet and np.max(np.abs(p1 - current_end)) <= LOOP_TOL:
                    ordered.append((idx, curve.reversed()))
                    current_end, current_sheet = p0, s0
                else:
                    continue
                used.add(idx)
                break
            else:
                raise GeometryError("boundary splits into several loops", visited=len(used))
        return ordered

    def swapped(self) -> DomainSpec:
        """Same geometry with every tag exchanged."""
        return replace(
            self,
            curves=tuple(c.swapped() for c in self.curves),
            name=f"{self.name}~swapped" if self.name else "",
            metadata={**self.metadata, "swapped": not self.metadata.get("swapped", False)},
        )

    def with_weight(self, weight: MetricWeight) -> DomainSpec:
        return replace(self, weight=weight)

    def curves_tagged(self, tag: BoundaryTag) -> list[Curve]:
        return [c for c in self.curves if c.tag is tag]

    def tag_at(self, point: Any, tol: float = 1e-9) -> BoundaryTag | None:
        """Tag of the curve containing ``point`` (planar domains only)."""
        for curve in self.curves:
            if curve.contains(point, tol)[0]:
                return curve.tag
        return None

    def vertices(self) -> np.ndarray:
        """Curve endpoints in loop order."""
        return np.array([c.start for c in self.loop()])

    def to_dict(self) -> dict[str, Any]:
        data: dict[str, Any] = {
            "name": self.name,
            "curves": [c.to_dict() for c in self.curves],
            "weight": self.weight.to_dict(),
            "sheets": self.sheets,
        }
        if self.slit is not None:
            data["slit"] = [list(p) for p in self.slit]
        if self.symmetry_hints:
            data["symmetry_hints"] = [h.to_dict() for h in self.symmetry_hints]
        if self.plan is not None:
            data["plan"] = self.plan.to_dict()
        return data

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> DomainSpec:
        hints: list[SymmetryHint] = []
        for h in data.get("symmetry_hints", ()):
            if "flip" in h:
                hints.append(SheetMap(h["name"], int(h["flip"]), float(h["shift"])))
            else:
                hints.append(Isometry.from_dict(h))
        slit = data.get("slit")
        return cls(
            curves=tuple(Curve.from_dict(c) for c in data["curves"]),
            weight=MetricWeight.from_dict(data.get("weight", "flat")),
            sheets=int(data.get("sheets", 1)),
            slit=(_as_point(slit[0]), _as_point(slit[1])) if slit else None,
            symmetry_hints=tuple(hints),
            plan=ReflectionPlan.from_dict(data["plan"]) if data.get("plan") else None,
            name=data.get("name", ""),
        )


@dataclass(frozen=True)
class SectorialBlock:
    """Region between the rays ``arg z = 0``, ``arg z = alpha`` and a chain ``gamma1``.

    Every piece of ``gamma1`` is labelled ``gamma11`` or ``gamma12``; the chain
    runs from ``z1`` (on the ray ``arg z = 0``) to ``z2`` (on ``arg z = alpha``).
    """

    alpha: float
    z1: Point
    z2: Point
    gamma1: tuple[Curve, ...]

    def __post_init__(self) -> None:
        if not 0 < self.alpha < math.pi / 2:
            raise GeometryError("sector angle must lie in (0, π/2)", alpha=self.alpha)
        if abs(self.z1[1]) > LOOP_TOL or self.z1[0] <= 0:
            raise GeometryError("z1 must lie on the positive real axis", z1=self.z1)
        if math.hypot(*self.z2) <= LOOP_TOL or abs(math.atan2(self.z2[1], self.z2[0]) - self.alpha) > 1e-9:
            raise GeometryError("z2 must have argument alpha", z2=self.z2)
        if not self.gamma1:
            raise GeometryError("gamma1 is empty")
        for piece in self.gamma1:
            if piece.label not in ("gamma11", "gamma12"):
                raise GeometryError("gamma1 pieces must be labelled gamma11 or gamma12", label=piece.label)
        chain = [self.gamma1[0].start]
        for piece in self.gamma1:
            if np.max(np.abs(piece.start - chain[-1])) > LOOP_TOL:
                raise GeometryError("gamma1 is not a connected chain", at=piece.start.tolist())
            chain.append(piece.end)
        if np.max(np.abs(chain[0] - np.asarray(self.z1))) > LOOP_TOL:
            raise GeometryError("gamma1 must start at z1")
        if np.max(np.abs(chain[-1] - np.asarray(self.z2))) > LOOP_TOL:
            raise GeometryError("gamma1 must end at z2")
        samples = np.vstack([p.points(np.linspace(0, 1, 17)) for p in self.gamma1])
        for v in samples:
            if math.hypot(*v) <= LOOP_TOL:
                raise GeometryError("gamma1 passes through the origin")
            arg = math.atan2(v[1], v[0])
            if arg < -1e-12 or arg > self.alpha + 1e-12:
                raise GeometryError("gamma1 leaves the sector", vertex=v.tolist())
        self._check_simple()

    def _check_simple(self) -> None:
        polyline = np.vstack(
            [p.points(np.linspace(0, 1, 17 if p.is_arc else 2))[:-1] for p in self.gamma1]
            + [self.gamma1[-1].end[None, :]]
        )
        segs = list(zip(polyline[:-1], polyline[1:]))
        for i in range(len(segs)):
            for j in range(i + 2, len(segs)):
                if _segments_cross(*segs[i], *segs[j]):
                    raise GeometryError("gamma1 self-intersects", pieces=(i, j))

    @classmethod
    def polyline(cls, alpha: float, points: list[Any], parts: list[str]) -> SectorialBlock:
        """Block whose ``gamma1`` is the polyline through ``points``."""
        if len(parts) != len(points) - 1:
            raise GeometryError("one part label per polyline piece is required")
        pieces = tuple(
            Curve.segment(p, q, BoundaryTag.NEUMANN, label=part)
            for p, q, part in zip(points[:-1], points[1:], parts)
        )
        return cls(alpha, _as_point(points[0]), _as_point(points[-1]), pieces)


def _segments_cross(a: np.ndarray, b: np.ndarray, c: np.ndarray, d: np.ndarray) -> bool:
    def orient(p: np.ndarray, q: np.ndarray, r: np.ndarray) -> float:
        return float((q[0] - p[0]) * (r[1] - p[1]) - (q[1] - p[1]) * (r[0] - p[0]))

    o1, o2, o3, o4 = orient(a, b, c), orient(a, b, d), orient(c, d, a), orient(c, d, b)
    return o1 * o2 < 0 and o3 * o4 < 0


@dataclass(frozen=True)
class HalfDomain:
    """One side of an axis: an open tagged chain whose endpoints lie on the axis.

    The closing piece along the axis carries no boundary condition; it becomes
    interior once the half is glued to its image.
    """

    chain: tuple[Curve, ...]
    axis: Isometry
    weight: MetricWeight = field(default_factory=MetricWeight)
    name: str = ""

    def __post_init__(self) -> None:
        if not self.axis.is_reflection or self.axis.axis_angle is None:
            raise GeometryError("half domain needs a reflection axis")
        ends = np.array([self.chain[0].start, self.chain[-1].end])
        if np.max(self.axis.axis_distance(ends)) > LOOP_TOL:
            raise GeometryError("chain endpoints must lie on the axis", ends=ends.tolist())
        samples = np.vstack([c.points(np.linspace(0, 1, 33)[1:-1]) for c in self.chain])
        n = np.array([-math.sin(self.axis.axis_angle), math.cos(self.axis.axis_angle)])
        side = (samples - np.asarray(self.axis.axis_point)) @ n
        if np.any(np.abs(side) <= LOOP_TOL):
            raise GeometryError("chain meets the axis outside its endpoints")
        if np.any(side > 0) and np.any(side < 0):
            raise GeometryError("chain crosses the axis; reflected copies would overlap")

    @property
    def side(self) -> float:
        """+1 if the chain lies to the left of the axis direction, -1 otherwise."""
        mid = self.chain[0].midpoint
        n = np.array([-math.sin(self.axis.axis_angle or 0.0), math.cos(self.axis.axis_angle or 0.0)])
        return 1.0 if (mid - np.asarray(self.axis.axis_point)) @ n > 0 else -1.0

    @property
    def center(self) -> np.ndarray:
        """Midpoint O of the axis interval."""
        return 0.5 * (self.chain[0].start + self.chain[-1].end)

    def closing_segment(self) -> Curve:
        return Curve.segment(self.chain[-1].end, self.chain[0].start, BoundaryTag.NEUMANN, label="axis")

    def as_spec(self) -> DomainSpec:
        return DomainSpec(curves=(*self.chain, self.closing_segment()), weight=self.weight,
                          name=self.name, metadata={"family": "half"})

    def perpendicular_axis(self) -> Isometry:
        """Line through O perpendicular to the axis."""
        angle = (self.axis.axis_angle or 0.0) + math.pi / 2
        return Isometry.reflection(angle, _as_point(self.center), name="d1")


# ---------------------------------------------------------------------------
# Builders


def _origin_plan(angle_lo: float, angle_hi: float, *axis_angles: float) -> ReflectionPlan:
    return ReflectionPlan(
        Wedge((0.0, 0.0), angle_lo, angle_hi),
        tuple(Isometry.reflection(a) for a in axis_angles),
    )


HALF_DISK_VARIANTS = ("I", "II", "D-diameter", "N-diameter")


def build_half_disk(variant: str = "I", weight: MetricWeight | None = None) -> DomainSpec:
    """Unit upper half-disk with the tag layout of ``variant``.

    Variant I puts Dirichlet on ``[-1, 0]`` and on the middle arc
    ``|arg z - π/2| < π/4``; variant II swaps every tag.
    """
    if variant not in HALF_DISK_VARIANTS:
        raise GeometryError(f"unknown half-disk variant: {variant}", allowed=HALF_DISK_VARIANTS)
    d, n = BoundaryTag.DIRICHLET, BoundaryTag.NEUMANN
    q = math.pi / 4
    if variant in ("I", "II"):
        tags = (d, n, n, d, n)
    else:
        tags = (d, d, n, n, n)
    if variant in ("II", "N-diameter"):
        tags = tuple(t.swapped() for t in tags)
    curves = (
        Curve.segment((-1.0, 0.0), (0.0, 0.0), tags[0], "diameter-left"),
        Curve.segment((0.0, 0.0), (1.0, 0.0), tags[1], "diameter-right"),
        Curve.arc((0.0, 0.0), 1.0, 0.0, q, tags[2], "arc-right"),
        Curve.arc((0.0, 0.0), 1.0, q, 3 * q, tags[3], "arc-middle"),
        Curve.arc((0.0, 0.0), 1.0, 3 * q, math.pi, tags[4], "arc-left"),
    )
    weight = weight or MetricWeight.flat()
    return DomainSpec(
        curves=curves,
        weight=weight,
        symmetry_hints=(Isometry.reflection(math.pi / 2, name="mirror-y"),),
        plan=_origin_plan(0.0, q, q, 2 * q),
        name=f"half-disk-{variant}-{weight.kind}",
        metadata={"family": "half_disk", "variant": variant},
    )


def build_disk(tag: BoundaryTag = BoundaryTag.DIRICHLET, radius: float = 1.0) -> DomainSpec:
    """Disk of the given radius with a single boundary condition."""
    h = math.pi / 2
    curves = tuple(Curve.arc((0.0, 0.0), radius, k * h, (k + 1) * h, tag, f"arc-{k + 1}") for k in range(4))
    return DomainSpec(curves=curves, name=f"disk-{tag.value}", metadata={"family": "disk", "tag": tag.value})


def build_disk_partition(alpha: float, beta: float) -> tuple[DomainSpec, DomainSpec]:
    """Unit disk with arcs ``(alpha:D, beta:N, π-alpha:D, π-beta:N)`` from angle 0.

    Returns the domain and its tag-swapped partner, both carrying a reflection
    plan about the line ``arg z = alpha``.
    """
    if not (0 < alpha <= math.pi and 0 < beta <= math.pi):
        raise GeometryError("partition angles must lie in (0, π]", alpha=alpha, beta=beta)
    d, n = BoundaryTag.DIRICHLET, BoundaryTag.NEUMANN
    bounds = [0.0, alpha, alpha + beta, math.pi + beta, TWO_PI]
    tags = [d, n, d, n]
    curves = tuple(
        Curve.arc((0.0, 0.0), 1.0, a, b, t, f"arc-{k + 1}")
        for k, (a, b, t) in enumerate(zip(bounds[:-1], bounds[1:], tags))
        if b - a > 1e-14
    )
    plan = ReflectionPlan(Wedge((0.0, 0.0), alpha, alpha + math.pi), (Isometry.reflection(alpha),))
    meta = {"family": "disk_partition", "alpha": alpha, "beta": beta, "arrangement": "D,N,D,N from angle 0"}
    spec = DomainSpec(curves=curves, plan=plan, name=f"disk-partition({alpha:.6g},{beta:.6g})", metadata=meta)
    return spec, spec.swapped()


def build_rectangle(
    lower: Point = (0.0, 0.0),
    upper: Point = (1.0, 1.0),
    tags: dict[str, BoundaryTag] | None = None,
) -> DomainSpec:
    """Axis-aligned rectangle; ``tags`` maps bottom/right/top/left to conditions."""
    tags = tags or {}
    (x0, y0), (x1, y1) = lower, upper
    corners = [(x0, y0), (x1, y0), (x1, y1), (x0, y1)]
    sides = ("bottom", "right", "top", "left")
    curves = tuple(
        Curve.segment(corners[k], corners[(k + 1) % 4], tags.get(side, BoundaryTag.DIRICHLET), side)
        for k, side in enumerate(sides)
    )
    return DomainSpec(curves=curves, name="rectangle", metadata={"family": "rectangle"})


def build_quarter_disk() -> DomainSpec:
    """Quarter-disk ``{|z|<1, Re z<0, Im z>0}`` with its four labelled pieces."""
    d, n = BoundaryTag.DIRICHLET, BoundaryTag.NEUMANN
    q = math.pi / 4
    curves = (
        Curve.segment((0.0, 0.0), (0.0, 1.0), n, "vertical"),
        Curve.arc((0.0, 0.0), 1.0, 2 * q, 3 * q, d, "arc-dirichlet"),
        Curve.arc((0.0, 0.0), 1.0, 3 * q, 4 * q, n, "arc-neumann"),
        Curve.segment((-1.0, 0.0), (0.0, 0.0), n, "horizontal"),
    )
    plan = ReflectionPlan(Wedge((0.0, 0.0), 2 * q, 3 * q), (Isometry.reflection(3 * q),))
    return DomainSpec(curves=curves, plan=plan, name="quarter-disk", metadata={"family": "quarter_disk"})


def build_sectorial_domain(block: SectorialBlock, swapped: bool = False) -> DomainSpec:
    """Glue four reflected copies of a sectorial block.

    Copy ``K1`` is the block, ``K2 = S_α K1``, ``K3 = S_2α K2`` and
    ``K4 = S_2α K1``. Dirichlet parts are ``Γ11, Γ22, Γ32, Γ41`` and the
    closing radius ``[0, S_2α z1]``.
    """
    alpha = block.alpha
    s_a = Isometry.reflection(alpha, name="S_a")
    s_2a = Isometry.reflection(2 * alpha, name="S_2a")
    d, n = BoundaryTag.DIRICHLET, BoundaryTag.NEUMANN
    dirichlet_part = {1: "gamma11", 2: "gamma12", 3: "gamma12", 4: "gamma11"}

    def copy(index: int, iso: Isometry | None, reverse: bool) -> list[Curve]:
        pieces = list(block.gamma1)
        if reverse:
            pieces = [p.reversed() for p in reversed(pieces)]
        out = []
        for p in pieces:
            image = p if iso is None else p.transformed(iso)
            tag = d if p.label == dirichlet_part[index] else n
            out.append(replace(image, tag=tag, label=f"gamma{index}{p.label[-1]}"))
        return out

    z1 = np.asarray(block.z1)
    end = s_2a.apply(z1)
    curves = [
        Curve.segment((0.0, 0.0), z1, n, "radius-start"),
        *copy(1, None, False),
        *copy(2, s_a, True),
        *copy(3, s_2a.compose(s_a), False),
        *copy(4, s_2a, True),
        Curve.segment(end, (0.0, 0.0), d, "radius-end"),
    ]
    spec = DomainSpec(
        curves=tuple(curves),
        plan=_origin_plan(0.0, alpha, alpha, 2 * alpha),
        name=f"sectorial(alpha={alpha:.6g})",
        metadata={"family": "sectorial", "alpha": alpha},
    )
    return spec.swapped() if swapped else spec


def build_symmetry_pair(half: HalfDomain) -> tuple[DomainSpec, DomainSpec]:
    """Axisymmetric and centrally symmetric domains generated by ``half``.

    ``Ξ_a`` glues the mirror image across the axis, ``Ξ_c`` the point
    reflection about the midpoint O of the axis interval.
    """
    mirror = half.axis
    center = _as_point(half.center)
    central = Isometry.point_reflection(center, name="central")
    mirrored = [c.transformed(mirror) for c in reversed(half.chain)]
    rotated = [c.transformed(central) for c in half.chain]
    axis_angle = mirror.axis_angle or 0.0
    lo = axis_angle if half.side > 0 else axis_angle - math.pi
    d1_symmetric = has_perpendicular_symmetry(half)
    if d1_symmetric:
        d1 = half.perpendicular_axis()
        point = half.chain[0].points(0.25)[0]
        wedge = Wedge(center, lo, lo + math.pi / 2)
        if not wedge.contains(point, tol=0.0):
            wedge = Wedge(center, lo + math.pi / 2, lo + math.pi)
        plan_a = ReflectionPlan(wedge, (d1, mirror))
        plan_c = ReflectionPlan(wedge, (d1, central))
    else:
        wedge = Wedge(center, lo, lo + math.pi)
        plan_a = ReflectionPlan(wedge, (mirror,))
        plan_c = ReflectionPlan(wedge, (central,))
    meta = {"family": "symmetry_pair", "d1_symmetric": d1_symmetric, "half": half.name}
    axisymmetric = DomainSpec(
        curves=(*half.chain, *mirrored), weight=half.weight, plan=plan_a,
        symmetry_hints=(mirror,), name=f"{half.name}-axisymmetric", metadata={**meta, "kind": "a"},
    )
    central_spec = DomainSpec(
        curves=(*half.chain, *rotated), weight=half.weight, plan=plan_c,
        symmetry_hints=(central,), name=f"{half.name}-central", metadata={**meta, "kind": "c"},
    )
    return axisymmetric, central_spec


def build_double_cover(base: DomainSpec) -> DomainSpec:
    """Branched double cover of the unit disk slit along the real diameter.

    ``base`` must be the unit disk split into four alternating quarter arcs
    whose endpoints sit at odd multiples of π/4. The cover boundary runs over
    ``φ ∈ [0, 4π)`` and repeats the base pattern on both sheets.
    """
    arcs = sorted(base.curves, key=lambda c: c.angle0 % TWO_PI if c.is_arc else 0.0)
    for c in arcs:
        if not c.is_arc or c.radius != 1.0 or math.hypot(*c.center) > LOOP_TOL:
            raise GeometryError("double cover base must be the unit disk", curve=c.label)

    def base_tag(phi: float) -> BoundaryTag:
        phi %= TWO_PI
        for c in arcs:
            lo = c.angle0 % TWO_PI
            if (phi - lo) % TWO_PI < c.angle1 - c.angle0:
                return c.tag
        raise GeometryError("base arcs do not cover the circle", phi=phi)

    q = math.pi / 4
    centers = [(2 * k) * q for k in range(4)]
    pattern = [base_tag(c) for c in centers]
    for k in range(4):
        for offset in (-0.999 * q, 0.999 * q):
            if base_tag(centers[k] + offset) is not pattern[k]:
                raise GeometryError("base tags must change exactly at odd multiples of π/4")
        if pattern[k] is pattern[(k + 1) % 4]:
            raise GeometryError("base tags must alternate on quarter arcs", pattern=[t.value for t in pattern])
    breaks = [0.0] + [(2 * k + 1) * q for k in range(8)] + [4 * math.pi]
    curves = tuple(
        Curve.arc((0.0, 0.0), 1.0, a, b, base_tag(0.5 * (a + b)), f"cover-arc-{k}")
        for k, (a, b) in enumerate(zip(breaks[:-1], breaks[1:]))
    )
    hints = (
        SheetMap("T", 1, TWO_PI),
        SheetMap("U", -1, 2 * TWO_PI),
        SheetMap("V", -1, TWO_PI),
    )
    return DomainSpec(
        curves=curves,
        weight=base.weight,
        sheets=2,
        slit=((-1.0, 0.0), (1.0, 0.0)),
        symmetry_hints=hints,
        name="double-cover",
        metadata={"family": "double_cover", "top_tag": pattern[1].value},
    )


LENS_TOP = math.sqrt(2.0) - 1.0


def _lens_upper(a0: float, a1: float, tag: BoundaryTag, label: str, reverse: bool = False) -> Curve:
    return Curve.arc((0.0, -1.0), math.sqrt(2.0), a0, a1, tag, label, reverse)


def _lens_lower(a0: float, a1: float, tag: BoundaryTag, label: str, reverse: bool = False) -> Curve:
    return Curve.arc((0.0, 1.0), math.sqrt(2.0), a0, a1, tag, label, reverse)


def build_lens_half(axis: str = "y", weight: MetricWeight | None = None) -> HalfDomain:
    """Half of the quarter-sphere in the stereographic chart centred on it.

    The quarter-sphere is the lens ``{|z-i|<√2} ∩ {|z+i|<√2}`` with corners
    ``±1``; each arc is a great semicircle. ``axis="y"`` gives the right half
    (Dirichlet on the upper arc, generating ``Q_a2``), ``axis="x"`` the upper
    half (Dirichlet on its left arc, generating ``Q_a1``).
    """
    weight = weight or MetricWeight.spherical()
    d, n = BoundaryTag.DIRICHLET, BoundaryTag.NEUMANN
    q = math.pi / 4
    if axis == "y":
        chain = (
            _lens_lower(-2 * q, -q, n, "lower-right"),
            _lens_upper(q, 2 * q, d, "upper-right"),
        )
        mirror = Isometry.reflection(math.pi / 2, name="d")
    elif axis == "x":
        chain = (
            _lens_upper(q, 2 * q, n, "upper-right"),
            _lens_upper(2 * q, 3 * q, d, "upper-left"),
        )
        mirror = Isometry.reflection(0.0, name="d")
    else:
        raise GeometryError(f"unknown lens axis: {axis}", allowed=("x", "y"))
    return HalfDomain(chain=chain, axis=mirror, weight=weight, name=f"lens-{axis}")


def build_rectangle_half(dirichlet_side: str = "top", width: float = 1.0, height: float = 1.0) -> HalfDomain:
    """Rectangle ``[0, width] x [0, height]`` above the axis ``y = 0``."""
    if dirichlet_side not in ("top", "left", "right"):
        raise GeometryError(f"unknown side: {dirichlet_side}")
    d, n = BoundaryTag.DIRICHLET, BoundaryTag.NEUMANN

    def tag(side: str) -> BoundaryTag:
        return d if side == dirichlet_side else n

    chain = (
        Curve.segment((width, 0.0), (width, height), tag("right"), "right"),
        Curve.segment((width, height), (0.0, height), tag("top"), "top"),
        Curve.segment((0.0, height), (0.0, 0.0), tag("left"), "left"),
    )
    return HalfDomain(chain=chain, axis=Isometry.reflection(0.0, name="d"), name=f"rectangle-{dirichlet_side}")


# ---------------------------------------------------------------------------
# Measurements and symmetry checks


def boundary_lengths(spec: DomainSpec) -> tuple[float, float]:
    """Total (weighted) lengths of the Dirichlet and Neumann parts."""
    lengths = {BoundaryTag.DIRICHLET: 0.0, BoundaryTag.NEUMANN: 0.0}
    for curve in spec.curves:
        lengths[curve.tag] += curve.weighted_length(spec.weight)
    return lengths[BoundaryTag.DIRICHLET], lengths[BoundaryTag.NEUMANN]


def tag_components(spec: DomainSpec) -> list[tuple[BoundaryTag, float]]:
    """Maximal runs of equal tags along the loop with their lengths."""
    runs: list[tuple[BoundaryTag, float]] = []
    for curve in spec.loop():
        if runs and runs[-1][0] is curve.tag:
            runs[-1] = (curve.tag, runs[-1][1] + curve.length)
        else:
            runs.append((curve.tag, curve.length))
    if len(runs) > 1 and runs[0][0] is runs[-1][0]:
        tag, extra = runs.pop()
        runs[0] = (tag, runs[0][1] + extra)
    return runs


def maps_onto(source: DomainSpec, target: DomainSpec, iso: Isometry, tol: float = ISOMETRY_TOL) -> bool:
    """Whether ``iso`` maps ``source`` onto ``target`` with matching tags."""
    images = [c.transformed(iso) for c in source.curves]
    samples = [c.points([0.25, 0.5, 0.75]) for c in (*images, *target.curves)]
    for pts in samples:
        for p in pts:
            tag_img = next((c.tag for c in images if c.contains(p, tol)[0]), None)
            tag_tgt = target.tag_at(p, tol)
            if tag_img is None or tag_tgt is None or tag_img is not tag_tgt:
                return False
    return True


def sheet_map_preserves(spec: DomainSpec, sheet_map: SheetMap, tol: float = ISOMETRY_TOL) -> bool:
    """Whether an angular cover map sends every tagged arc onto an arc with the same tag."""
    period = 2 * TWO_PI

    def tag_at(phi: float) -> BoundaryTag | None:
        for c in spec.curves:
            if (phi - c.angle0) % period <= (c.angle1 - c.angle0) + tol:
                if (phi - c.angle0) % period >= -tol:
                    return c.tag
        return None

    for c in spec.curves:
        for s in (0.25, 0.5, 0.75):
            phi = c.angle0 + s * (c.angle1 - c.angle0)
            if tag_at(sheet_map(phi)) is not c.tag:
                return False
    return True


def same_tagged_boundary(a: DomainSpec, b: DomainSpec) -> bool:
    """Multiset equality of tagged curves (identical geometry, identical tags)."""
    return maps_onto(a, b, Isometry.identity())


def _disk_candidates(a: DomainSpec, b: DomainSpec) -> list[Isometry]:
    ends_a = sorted({round(c.angle0 % TWO_PI, 12) for c in a.curves if c.is_arc})
    ends_b = sorted({round(c.angle0 % TWO_PI, 12) for c in b.curves if c.is_arc})
    candidates = []
    for ta in ends_a:
        for tb in ends_b:
            candidates.append(Isometry.rotation(tb - ta))
            candidates.append(Isometry.reflection(0.5 * (ta + tb)))
    return candidates


def is_trivial_decomposition(a: DomainSpec, b: DomainSpec) -> Isometry | None:
    """Find an isometry mapping ``a`` onto ``b`` with matching tags.

    Candidates are the dihedral maps sending arc endpoints to arc endpoints
    (disks) together with the declared symmetry hints.
    """
    candidates: list[Isometry] = [Isometry.identity()]
    if all(c.is_arc for c in (*a.curves, *b.curves)):
        candidates.extend(_disk_candidates(a, b))
    candidates.extend(h for h in (*a.symmetry_hints, *b.symmetry_hints) if isinstance(h, Isometry))
    for iso in candidates:
        if maps_onto(a, b, iso):
            logger.debug("decomposition is trivial via %s", iso.name)
            return iso
    return None


def has_perpendicular_symmetry(half: HalfDomain) -> bool:
    """Whether the half is symmetric, tags included, about the line d1 through O."""
    spec = half.as_spec()
    return maps_onto(spec, spec, half.perpendicular_axis())
