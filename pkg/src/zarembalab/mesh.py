"""Conforming triangulations of tagged domains.

Meshes come from ``triangle`` (constrained Delaunay with quality refinement).
Symmetric meshes are obtained by meshing a fundamental wedge and reflecting it,
so every reflection acts on the vertex set as an exact permutation.
"""

from __future__ import annotations

import itertools
import logging
import math
from dataclasses import dataclass, field, replace
from typing import TYPE_CHECKING, Any

import numpy as np
import triangle
from matplotlib.tri import Triangulation
from scipy import sparse
from scipy.spatial import cKDTree

from .errors import MeshError
from .geometry import TWO_PI, BoundaryTag, Curve, DomainSpec, Isometry, Wedge, build_half_disk

if TYPE_CHECKING:
    from collections.abc import Sequence

logger = logging.getLogger(__name__)

MERGE_TOL = 1e-12
SNAP_TOL = 1e-9
MIN_ANGLE = 30.0
SLIVER_ANGLE = 5.0
AXIS_LABEL = "axis"


@dataclass(eq=False)
class Mesh:
    """Triangulation with tagged boundary edges.

    ``copies[k]`` maps fundamental-block vertex indices to global indices for
    the k-th reflected copy; ``symmetry_perms`` holds global vertex permutations
    realising isometries of the whole mesh.
    """

    vertices: np.ndarray
    triangles: np.ndarray
    boundary_edges: np.ndarray
    edge_tags: np.ndarray
    edge_curves: np.ndarray
    curves: tuple[Curve, ...] = ()
    sheet_of_vertex: np.ndarray | None = None
    symmetry_perms: dict[str, np.ndarray] = field(default_factory=dict)
    copies: tuple[np.ndarray, ...] = ()
    triangle_copy: np.ndarray | None = None
    descriptor: dict[str, Any] = field(default_factory=dict)

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    @property
    def n_triangles(self) -> int:
        return len(self.triangles)

    @property
    def edge_labels(self) -> list[str]:
        return [self.curves[c].label if c >= 0 else AXIS_LABEL for c in self.edge_curves]

    def tagged_edges(self, tag: BoundaryTag) -> np.ndarray:
        return self.boundary_edges[self.edge_tags == tag.value]

    def dirichlet_vertices(self) -> np.ndarray:
        """Vertices of Dirichlet edges; junction vertices count as Dirichlet."""
        return np.unique(self.tagged_edges(BoundaryTag.DIRICHLET))

    def boundary_vertices(self) -> np.ndarray:
        return np.unique(self.boundary_edges)

    def edges(self) -> np.ndarray:
        return _unique_edges(self.triangles)

    def signed_areas(self) -> np.ndarray:
        return _signed_areas(self.vertices, self.triangles)

    def max_edge_length(self) -> float:
        e = self.edges()
        return float(np.max(np.linalg.norm(self.vertices[e[:, 0]] - self.vertices[e[:, 1]], axis=1)))

    def min_angle(self) -> float:
        """Smallest interior angle over all triangles, in degrees."""
        return float(np.min(_triangle_angles(self.vertices, self.triangles)))

    def euler_characteristic(self) -> int:
        return self.n_vertices - len(self.edges()) + self.n_triangles

    def swapped(self) -> Mesh:
        """Same mesh with every boundary tag exchanged."""
        tags = np.where(self.edge_tags == BoundaryTag.DIRICHLET.value, "N", "D")
        curves = tuple(c.swapped() for c in self.curves)
        return replace(self, edge_tags=tags, curves=curves)

    def retagged(self, spec: DomainSpec) -> Mesh:
        """Tags and curve provenance taken geometrically from ``spec``."""
        tags, owners = tag_boundary_edges(self.vertices, self.boundary_edges, spec)
        return replace(self, edge_tags=tags, edge_curves=owners, curves=spec.curves,
                       descriptor={**self.descriptor, "spec": spec.name})


def _unique_edges(triangles: np.ndarray) -> np.ndarray:
    e = np.sort(triangles[:, [[0, 1], [1, 2], [2, 0]]].reshape(-1, 2), axis=1)
    return np.unique(e, axis=0)


def _edge_counts(triangles: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    e = np.sort(triangles[:, [[0, 1], [1, 2], [2, 0]]].reshape(-1, 2), axis=1)
    return np.unique(e, axis=0, return_counts=True)


def _signed_areas(vertices: np.ndarray, triangles: np.ndarray) -> np.ndarray:
    a, b, c = (vertices[triangles[:, k]] for k in range(3))
    return 0.5 * ((b[:, 0] - a[:, 0]) * (c[:, 1] - a[:, 1]) - (b[:, 1] - a[:, 1]) * (c[:, 0] - a[:, 0]))


def _triangle_angles(vertices: np.ndarray, triangles: np.ndarray) -> np.ndarray:
    p = vertices[triangles]
    angles = []
    for k in range(3):
        u = p[:, (k + 1) % 3] - p[:, k]
        v = p[:, (k + 2) % 3] - p[:, k]
        cosine = np.sum(u * v, axis=1) / (np.linalg.norm(u, axis=1) * np.linalg.norm(v, axis=1))
        angles.append(np.degrees(np.arccos(np.clip(cosine, -1.0, 1.0))))
    return np.column_stack(angles)


def _scale(vertices: np.ndarray) -> float:
    return max(1.0, float(np.max(np.abs(vertices))))


# ---------------------------------------------------------------------------
# Boundary preparation


@dataclass(frozen=True)
class _Piece:
    curve: Curve
    source: int


def _ray_hits(curve: Curve, apex: np.ndarray, angle: float) -> list[float]:
    d = np.array([math.cos(angle), math.sin(angle)])
    hits: list[float] = []
    if curve.is_arc:
        w = apex - np.asarray(curve.center)
        b = w @ d
        disc = b * b - (w @ w - curve.radius**2)
        if disc < 0:
            return hits
        for t in (-b - math.sqrt(disc), -b + math.sqrt(disc)):
            if t >= -1e-12:
                s = curve.parameter_of(apex + t * d)
                if 1e-9 < s < 1 - 1e-9:
                    hits.append(s)
        return hits
    p0, p1 = np.asarray(curve.p0), np.asarray(curve.p1)
    e = p1 - p0
    matrix = np.array([[e[0], -d[0]], [e[1], -d[1]]])
    if abs(np.linalg.det(matrix)) < 1e-14:
        return hits
    s, t = np.linalg.solve(matrix, apex - p0)
    if 1e-9 < s < 1 - 1e-9 and t >= -1e-12:
        hits.append(float(s))
    return hits


def _dedupe(values: list[float], tol: float = 1e-9) -> list[float]:
    out: list[float] = []
    for v in sorted(values):
        if not out or v - out[-1] > tol:
            out.append(v)
    return out


def _on_ray(point: np.ndarray, wedge: Wedge, angle: float) -> bool:
    rel = point - np.asarray(wedge.apex)
    if math.hypot(*rel) <= SNAP_TOL:
        return True
    delta = (math.atan2(rel[1], rel[0]) - angle + math.pi) % TWO_PI - math.pi
    return abs(delta) <= SNAP_TOL


def _closure(p_out: np.ndarray, p_in: np.ndarray, wedge: Wedge) -> list[_Piece]:
    if np.max(np.abs(p_out - p_in)) <= MERGE_TOL:
        return []
    apex = np.asarray(wedge.apex)
    n = BoundaryTag.NEUMANN
    at_apex = min(math.dist(p_out, apex), math.dist(p_in, apex)) <= SNAP_TOL
    same_ray = any(_on_ray(p_out, wedge, a) and _on_ray(p_in, wedge, a) for a in (wedge.angle_lo, wedge.angle_hi))
    if at_apex or same_ray:
        return [_Piece(Curve.segment(p_out, p_in, n, AXIS_LABEL), -1)]
    for p in (p_out, p_in):
        if not (_on_ray(p, wedge, wedge.angle_lo) or _on_ray(p, wedge, wedge.angle_hi)):
            raise MeshError("wedge does not cut the boundary on its rays", point=p.tolist())
    return [
        _Piece(Curve.segment(p_out, apex, n, AXIS_LABEL), -1),
        _Piece(Curve.segment(apex, p_in, n, AXIS_LABEL), -1),
    ]


def clip_to_wedge(
    spec: DomainSpec,
    wedge: Wedge | None,
    breakpoints: Sequence[np.ndarray] = (),
) -> list[_Piece]:
    """Boundary loop of ``spec ∩ wedge`` as ordered pieces.

    Curves are split where they cross the wedge rays and at ``breakpoints``;
    gaps are closed along the rays (through the apex when needed).
    """
    pieces: list[tuple[_Piece, bool]] = []
    for idx, curve in spec.oriented_loop():
        params: list[float] = []
        if wedge is not None:
            apex = np.asarray(wedge.apex, dtype=float)
            params += _ray_hits(curve, apex, wedge.angle_lo) + _ray_hits(curve, apex, wedge.angle_hi)
        for p in breakpoints:
            if curve.contains(p, SNAP_TOL)[0]:
                params.append(curve.parameter_of(p))
        for part in curve.split(_dedupe(params)):
            inside = wedge is None or wedge.contains(part.midpoint)
            pieces.append((_Piece(part, idx), inside))
    if all(inside for _, inside in pieces):
        return [p for p, _ in pieces]
    if not any(inside for _, inside in pieces):
        raise MeshError("wedge misses the domain", wedge=wedge.to_dict() if wedge else None)
    start = next(k for k in range(len(pieces)) if pieces[k][1] and not pieces[k - 1][1])
    ordered = pieces[start:] + pieces[:start]
    runs: list[list[_Piece]] = []
    last_inside = False
    for piece, inside in ordered:
        if inside:
            if runs and runs[-1] and last_inside:
                runs[-1].append(piece)
            else:
                runs.append([piece])
        last_inside = inside
    assert wedge is not None
    boundary: list[_Piece] = []
    for k, run in enumerate(runs):
        boundary.extend(run)
        nxt = runs[(k + 1) % len(runs)]
        boundary.extend(_closure(run[-1].curve.end, nxt[0].curve.start, wedge))
    return boundary


def breakpoint_orbit(spec: DomainSpec, maps: Sequence[Isometry], wedge: Wedge) -> list[np.ndarray]:
    """Points of the wedge whose images under the copy maps are curve endpoints."""
    endpoints = [c.start for c in spec.curves] + [c.end for c in spec.curves]
    found: list[np.ndarray] = []
    for flags in itertools.product((0, 1), repeat=len(maps)):
        for p in endpoints:
            q = np.asarray(p, dtype=float)
            for m, flag in reversed(list(zip(maps, flags))):
                if flag:
                    q = m.apply(q)
            if wedge.contains(q) and not any(np.max(np.abs(q - r)) <= SNAP_TOL for r in found):
                found.append(q)
    return found


# ---------------------------------------------------------------------------
# Triangulation


def _triangulate(boundary: list[_Piece], h: float, rng: np.random.Generator | None = None) -> dict[str, Any]:
    points: list[np.ndarray] = []
    segments: list[tuple[int, int]] = []
    markers: list[int] = []
    for k, piece in enumerate(boundary):
        if rng is None:
            pts = piece.curve.discretize(h)
        else:
            n = max(1, math.ceil(1.5 * piece.curve.length / h))
            s = np.linspace(0.0, 1.0, n + 1)
            s[1:-1] += rng.uniform(-0.2, 0.2, n - 1) / n
            pts = piece.curve.points(s)
        for p in pts[:-1]:
            points.append(p)
            segments.append((len(points) - 1, len(points)))
            markers.append(k + 2)
    segments[-1] = (segments[-1][0], 0)
    area = math.sqrt(3.0) / 12.0 * h * h
    data = {
        "vertices": np.asarray(points),
        "segments": np.asarray(segments, dtype=np.int32),
        "segment_markers": np.asarray(markers, dtype=np.int32)[:, None],
    }
    try:
        out = triangle.triangulate(data, f"pq{MIN_ANGLE:g}a{area:.12f}")
    except RuntimeError as exc:
        raise MeshError("triangle failed", reason=str(exc)) from exc
    out["n_input"] = len(points)
    return out


def _mesh_from_triangle(out: dict[str, Any], boundary: list[_Piece], curves: tuple[Curve, ...]) -> Mesh:
    vertices = np.array(out["vertices"], dtype=float)
    vmarkers = np.asarray(out.get("vertex_markers", np.zeros((len(vertices), 1)))).ravel()
    for v in range(out["n_input"], len(vertices)):
        m = int(vmarkers[v])
        if m >= 2:
            vertices[v] = boundary[m - 2].curve.project(vertices[v])[0]
    tris = np.array(out["triangles"], dtype=np.int64)
    neg = _signed_areas(vertices, tris) < 0
    tris[neg] = tris[neg][:, [0, 2, 1]]
    segs = np.array(out["segments"], dtype=np.int64)
    smark = np.asarray(out["segment_markers"]).ravel()
    pieces = [boundary[m - 2] for m in smark]
    mesh = Mesh(
        vertices=vertices,
        triangles=tris,
        boundary_edges=segs,
        edge_tags=np.array([p.curve.tag.value for p in pieces]),
        edge_curves=np.array([p.source for p in pieces], dtype=np.int64),
        curves=curves,
        copies=(np.arange(len(vertices)),),
        triangle_copy=np.zeros(len(tris), dtype=np.int64),
    )
    worst = _triangle_angles(vertices, tris).min(axis=1)
    if worst.min() < SLIVER_ANGLE:
        k = int(np.argmin(worst))
        raise MeshError(
            "refinement left sliver triangles",
            min_angle=float(worst[k]),
            region=vertices[tris[k]].mean(axis=0).tolist(),
        )
    return mesh


def mesh_fundamental(
    spec: DomainSpec,
    wedge: Wedge | None,
    h: float,
    breakpoints: Sequence[np.ndarray] = (),
) -> Mesh:
    """Triangulate ``spec ∩ wedge`` with edges no longer than ``h``.

    Arc vertices lie exactly on their arcs; axis pieces carry the label ``axis``.
    """
    if h <= 0:
        raise MeshError("target edge length must be positive", h=h)
    if spec.sheets != 1:
        raise MeshError("fundamental meshing is planar; use mesh_double_cover")
    boundary = clip_to_wedge(spec, wedge, breakpoints)
    mesh = _mesh_from_triangle(_triangulate(boundary, h), boundary, spec.curves)
    mesh.descriptor = {"kind": "fundamental", "h": h, "spec": spec.name, "level": 0}
    validate_mesh(mesh)
    logger.debug("fundamental mesh of %s: %d vertices", spec.name, mesh.n_vertices)
    return mesh


def mesh_unstructured(spec: DomainSpec, h: float, seed: int = 0) -> Mesh:
    """Quality Delaunay mesh of the whole domain with a seeded, jittered boundary."""
    if h <= 0:
        raise MeshError("target edge length must be positive", h=h)
    if spec.sheets != 1:
        raise MeshError("unstructured meshing is planar only", sheets=spec.sheets)
    boundary = clip_to_wedge(spec, None)
    rng = np.random.default_rng(seed)
    mesh = _mesh_from_triangle(_triangulate(boundary, h, rng), boundary, spec.curves)
    mesh.copies = ()
    mesh.triangle_copy = None
    mesh.descriptor = {"kind": "unstructured", "h": h, "seed": seed, "spec": spec.name, "level": 0}
    validate_mesh(mesh)
    logger.info("unstructured mesh of %s: %d vertices, %d triangles", spec.name, mesh.n_vertices, mesh.n_triangles)
    return mesh


# ---------------------------------------------------------------------------
# Reflection meshes


def _overlaps(vertices: np.ndarray, triangles: np.ndarray, points: np.ndarray) -> bool:
    finder = Triangulation(vertices[:, 0], vertices[:, 1], triangles).get_trifinder()
    return bool(np.any(finder(points[:, 0], points[:, 1]) >= 0))


def mesh_by_reflection(
    fundamental: Mesh,
    reflections: Sequence[Isometry],
    spec: DomainSpec | None = None,
) -> Mesh:
    """Union of the fundamental mesh and its images, one map at a time.

    Each map is applied to the union built so far. Vertices on the mirror are
    merged (tolerance 1e-12); copies that overlap in area or merges that change
    the topology are rejected. With ``spec`` the boundary tags are re-derived
    from it, otherwise images inherit the tags of their sources.
    """
    vertices = fundamental.vertices.copy()
    tris = fundamental.triangles.copy()
    edges = fundamental.boundary_edges.copy()
    tags = fundamental.edge_tags.copy()
    owners = fundamental.edge_curves.copy()
    copies = [np.arange(fundamental.n_vertices)]
    tri_copy = np.zeros(len(tris), dtype=np.int64)
    perms: dict[str, np.ndarray] = {}
    perm_maps: dict[str, Isometry] = {}
    for m in reflections:
        n = len(vertices)
        if m.axis_angle is not None:
            near = m.axis_distance(vertices) <= SNAP_TOL
            vertices[near] = m.project_to_axis(vertices[near])
        image = m.apply(vertices)
        dist, nearest = cKDTree(vertices).query(image, distance_upper_bound=MERGE_TOL * _scale(vertices))
        merged = np.isfinite(dist)
        on_boundary = np.zeros(n, dtype=bool)
        on_boundary[edges.ravel()] = True
        if np.any(merged & ~on_boundary) or np.any(~on_boundary[nearest[merged]]):
            raise MeshError("reflected copy shares interior vertices", map=m.name)
        if _overlaps(vertices, tris, image[tris].mean(axis=1)):
            raise MeshError("reflected copies overlap in area", map=m.name)
        img_index = np.empty(n, dtype=np.int64)
        img_index[merged] = nearest[merged]
        img_index[~merged] = n + np.arange(int((~merged).sum()))
        vertices = np.vstack([vertices, image[~merged]])
        img_tris = img_index[tris]
        if m.is_reflection:
            img_tris = img_tris[:, [0, 2, 1]]
        tris = np.vstack([tris, img_tris])
        tri_copy = np.concatenate([tri_copy, tri_copy + len(copies)])
        all_edges = np.vstack([edges, img_index[edges]])
        tags = np.concatenate([tags, tags])
        owners = np.concatenate([owners, owners])
        keys, counts = _edge_counts(tris)
        if np.any(counts > 2):
            raise MeshError("merging changed the topology", map=m.name)
        interior = {tuple(k) for k in keys[counts == 2].tolist()}
        keep = np.array([tuple(sorted(e)) not in interior for e in all_edges.tolist()], dtype=bool)
        edges, tags, owners = all_edges[keep], tags[keep], owners[keep]

        total = len(vertices)
        perm = np.arange(total)
        perm[np.arange(n)] = img_index
        perm[img_index] = np.arange(n)
        for name, old in list(perms.items()):
            ext = np.arange(total)
            ext[:n] = old
            ext[img_index] = img_index[old]
            if np.allclose(vertices[ext], perm_maps[name].apply(vertices), atol=1e-10):
                perms[name] = ext
            else:
                del perms[name], perm_maps[name]
        perms[m.name] = perm
        perm_maps[m.name] = m
        copies = copies + [img_index[c] for c in copies]
    mesh = Mesh(
        vertices=vertices,
        triangles=tris,
        boundary_edges=edges,
        edge_tags=tags,
        edge_curves=owners,
        curves=fundamental.curves,
        symmetry_perms=perms,
        copies=tuple(copies),
        triangle_copy=tri_copy,
        descriptor={**fundamental.descriptor, "kind": "reflection", "maps": [m.name for m in reflections]},
    )
    if spec is not None:
        mesh = mesh.retagged(spec)
    validate_mesh(mesh)
    return mesh


def mesh_symmetric(spec: DomainSpec, h: float) -> Mesh:
    """Symmetry-respecting mesh of a spec carrying a reflection plan."""
    if spec.plan is None or spec.plan.wedge is None:
        raise MeshError("spec has no reflection plan", spec=spec.name)
    plan = spec.plan
    points = breakpoint_orbit(spec, plan.maps, plan.wedge)
    fundamental = mesh_fundamental(spec, plan.wedge, h, points)
    mesh = mesh_by_reflection(fundamental, plan.maps, spec)
    mesh.descriptor = {"kind": "symmetric", "h": h, "spec": spec.name, "level": 0,
                       "maps": [m.name for m in plan.maps]}
    logger.info("symmetric mesh of %s: %d vertices, %d copies", spec.name, mesh.n_vertices, len(mesh.copies))
    return mesh


def tag_boundary_edges(
    vertices: np.ndarray, edges: np.ndarray, spec: DomainSpec
) -> tuple[np.ndarray, np.ndarray]:
    """Tag and owning curve of each boundary edge, found from its endpoints."""
    verts = np.unique(edges)
    on_curve = np.zeros((len(spec.curves), len(vertices)), dtype=bool)
    for c, curve in enumerate(spec.curves):
        on_curve[c, verts] = curve.contains(vertices[verts], SNAP_TOL)
    tags = np.empty(len(edges), dtype="<U1")
    owners = np.empty(len(edges), dtype=np.int64)
    for k, (a, b) in enumerate(edges):
        candidates = np.flatnonzero(on_curve[:, a] & on_curve[:, b])
        if len(candidates) > 1:
            mid = 0.5 * (vertices[a] + vertices[b])
            candidates = np.array(
                [c for c in candidates if -1e-9 <= spec.curves[c].parameter_of(spec.curves[c].project(mid)[0]) <= 1 + 1e-9]
            )
        if len(candidates) == 0:
            raise MeshError("boundary edge lies on no curve", edge=[int(a), int(b)],
                            points=vertices[[a, b]].tolist())
        owners[k] = candidates[0]
        tags[k] = spec.curves[candidates[0]].tag.value
    return tags, owners


# ---------------------------------------------------------------------------
# Double cover


def mesh_double_cover(spec: DomainSpec, h: float) -> Mesh:
    """Four half-disk pieces glued into the branched double cover.

    Pieces H0..H3 cover ``φ ∈ [kπ, (k+1)π]``: H0, H2 are the upper half-disk
    mesh, H1, H3 its mirror image. The branch point O is one shared vertex.
    Permutations ``T`` (sheet swap), ``U`` and ``V`` are attached.
    """
    if spec.sheets != 2:
        raise MeshError("double-cover meshing needs a two-sheet spec", sheets=spec.sheets)
    half = mesh_symmetric(build_half_disk("I"), h)
    v = half.vertices
    on_axis = np.abs(v[:, 1]) <= MERGE_TOL
    origin = on_axis & (np.abs(v[:, 0]) <= MERGE_TOL)
    negx = on_axis & ~origin & (v[:, 0] < 0)
    posx = on_axis & ~origin & (v[:, 0] > 0)

    ids: dict[tuple[Any, ...], int] = {}
    coords: list[np.ndarray] = []
    sheets: list[int] = []
    copies = []
    for k in range(4):
        local = v if k % 2 == 0 else v * np.array([1.0, -1.0])
        glob = np.empty(len(v), dtype=np.int64)
        for i in range(len(v)):
            if origin[i]:
                key: tuple[Any, ...] = ("O",)
            elif negx[i]:
                key = ("negx", i, k // 2)
            elif posx[i]:
                key = ("posx", i, 0 if k in (0, 3) else 1)
            else:
                key = ("in", i, k)
            if key not in ids:
                ids[key] = len(coords)
                coords.append(local[i])
                sheets.append(k // 2)
            glob[i] = ids[key]
        copies.append(glob)
    tris = []
    for k in range(4):
        t = copies[k][half.triangles]
        tris.append(t if k % 2 == 0 else t[:, [0, 2, 1]])
    arc_edges = half.boundary_edges[~(on_axis[half.boundary_edges[:, 0]] & on_axis[half.boundary_edges[:, 1]])]
    edges, tags, owners = [], [], []
    for k in range(4):
        for a, b in arc_edges:
            mid = 0.5 * (v[a] + v[b])
            phi = math.atan2(mid[1], mid[0]) if k % 2 == 0 else TWO_PI - math.atan2(mid[1], mid[0])
            phi += TWO_PI * (k // 2)
            owner = next(
                (c for c, curve in enumerate(spec.curves) if curve.angle0 - 1e-12 <= phi <= curve.angle1 + 1e-12),
                None,
            )
            if owner is None:
                raise MeshError("cover edge outside the boundary arcs", phi=phi)
            edges.append((copies[k][a], copies[k][b]))
            tags.append(spec.curves[owner].tag.value)
            owners.append(owner)
    n = len(coords)
    perms = {"T": np.empty(n, dtype=np.int64), "U": np.empty(n, dtype=np.int64), "V": np.empty(n, dtype=np.int64)}
    for k in range(4):
        perms["T"][copies[k]] = copies[(k + 2) % 4]
        perms["U"][copies[k]] = copies[3 - k]
        perms["V"][copies[k]] = copies[k ^ 1]
    mesh = Mesh(
        vertices=np.asarray(coords),
        triangles=np.vstack(tris),
        boundary_edges=np.asarray(edges, dtype=np.int64),
        edge_tags=np.asarray(tags),
        edge_curves=np.asarray(owners, dtype=np.int64),
        curves=spec.curves,
        sheet_of_vertex=np.asarray(sheets, dtype=np.int64),
        symmetry_perms=perms,
        copies=tuple(copies),
        triangle_copy=np.repeat(np.arange(4), half.n_triangles),
        descriptor={"kind": "double-cover", "h": h, "spec": spec.name, "level": 0},
    )
    validate_mesh(mesh)
    logger.info("double cover mesh: %d vertices", mesh.n_vertices)
    return mesh


def mesh_domain(spec: DomainSpec, h: float, *, symmetric: bool = True, seed: int = 0) -> Mesh:
    """Pick the meshing route for a spec."""
    if spec.sheets == 2:
        return mesh_double_cover(spec, h)
    if symmetric and spec.plan is not None:
        return mesh_symmetric(spec, h)
    return mesh_unstructured(spec, h, seed)


# ---------------------------------------------------------------------------
# Refinement


def refine_with_prolongation(mesh: Mesh) -> tuple[Mesh, sparse.csr_matrix]:
    """Split every triangle into four; return the fine mesh and the P1 prolongation."""
    n = mesh.n_vertices
    edges = mesh.edges()
    keys = edges[:, 0] * n + edges[:, 1]

    def midpoint_of(a: np.ndarray, b: np.ndarray) -> np.ndarray:
        lo, hi = np.minimum(a, b), np.maximum(a, b)
        return n + np.searchsorted(keys, lo * n + hi)

    mids = 0.5 * (mesh.vertices[edges[:, 0]] + mesh.vertices[edges[:, 1]])
    be = mesh.boundary_edges
    bmid = midpoint_of(be[:, 0], be[:, 1])
    for k, c in enumerate(mesh.edge_curves):
        if c >= 0:
            mids[bmid[k] - n] = mesh.curves[c].project(mids[bmid[k] - n])[0]
    vertices = np.vstack([mesh.vertices, mids])

    a, b, c = mesh.triangles[:, 0], mesh.triangles[:, 1], mesh.triangles[:, 2]
    ab, bc, ca = midpoint_of(a, b), midpoint_of(b, c), midpoint_of(c, a)
    tris = np.stack(
        [
            np.column_stack([a, ab, ca]),
            np.column_stack([ab, b, bc]),
            np.column_stack([ca, bc, c]),
            np.column_stack([ab, bc, ca]),
        ],
        axis=1,
    ).reshape(-1, 3)
    boundary = np.vstack([np.column_stack([be[:, 0], bmid]), np.column_stack([bmid, be[:, 1]])])

    perms = {}
    for name, p in mesh.symmetry_perms.items():
        q = np.empty(len(vertices), dtype=np.int64)
        q[:n] = p
        q[n + np.arange(len(edges))] = midpoint_of(p[edges[:, 0]], p[edges[:, 1]])
        perms[name] = q

    copies: tuple[np.ndarray, ...] = ()
    tri_copy = None
    if mesh.copies and mesh.triangle_copy is not None:
        first = mesh.copies[0]
        to_fund = np.full(n, -1, dtype=np.int64)
        to_fund[first] = np.arange(len(first))
        fund_edges = _unique_edges(to_fund[mesh.triangles[mesh.triangle_copy == 0]])
        copies = tuple(
            np.concatenate([cp, midpoint_of(cp[fund_edges[:, 0]], cp[fund_edges[:, 1]])]) for cp in mesh.copies
        )
        tri_copy = np.repeat(mesh.triangle_copy, 4)

    sheets = None
    if mesh.sheet_of_vertex is not None:
        s = mesh.sheet_of_vertex
        sheets = np.concatenate([s, np.minimum(s[edges[:, 0]], s[edges[:, 1]])])

    rows = np.concatenate([np.arange(n), np.repeat(n + np.arange(len(edges)), 2)])
    cols = np.concatenate([np.arange(n), edges.ravel()])
    vals = np.concatenate([np.ones(n), np.full(2 * len(edges), 0.5)])
    prolongation = sparse.csr_matrix((vals, (rows, cols)), shape=(len(vertices), n))

    descriptor = dict(mesh.descriptor)
    descriptor["level"] = int(descriptor.get("level", 0)) + 1
    if "h" in descriptor:
        descriptor["h"] = descriptor["h"] / 2
    fine = Mesh(
        vertices=vertices,
        triangles=tris,
        boundary_edges=boundary,
        edge_tags=np.concatenate([mesh.edge_tags, mesh.edge_tags]),
        edge_curves=np.concatenate([mesh.edge_curves, mesh.edge_curves]),
        curves=mesh.curves,
        sheet_of_vertex=sheets,
        symmetry_perms=perms,
        copies=copies,
        triangle_copy=tri_copy,
        descriptor=descriptor,
    )
    validate_mesh(fine)
    return fine, prolongation


def refine_uniform(mesh: Mesh) -> Mesh:
    """Uniform red refinement with boundary midpoints snapped to their curves."""
    return refine_with_prolongation(mesh)[0]


# ---------------------------------------------------------------------------
# Validation


def validate_mesh(mesh: Mesh) -> None:
    """Raise :class:`MeshError` unless every structural invariant holds."""
    areas = mesh.signed_areas()
    if np.any(areas <= 0):
        bad = int(np.argmin(areas))
        raise MeshError("non-positive triangle area", triangle=bad, area=float(areas[bad]))
    keys, counts = _edge_counts(mesh.triangles)
    if np.any(counts > 2):
        raise MeshError("edge shared by more than two triangles")
    free_edges = {tuple(k) for k in keys[counts == 1].tolist()}
    tagged = {tuple(sorted(e)) for e in mesh.boundary_edges.tolist()}
    if free_edges != tagged or len(tagged) != len(mesh.boundary_edges):
        raise MeshError(
            "tagged boundary edges do not match the mesh boundary",
            untagged=len(free_edges - tagged), spurious=len(tagged - free_edges),
        )
    if mesh.euler_characteristic() != 1:
        raise MeshError("mesh is not a topological disk", euler=mesh.euler_characteristic())
    ref_rows = {tuple(r) for r in np.sort(mesh.triangles, axis=1).tolist()}
    lengths = np.linalg.norm(mesh.vertices[keys[:, 0]] - mesh.vertices[keys[:, 1]], axis=1)
    tol = 1e-12 * _scale(mesh.vertices)
    for name, perm in mesh.symmetry_perms.items():
        if sorted(perm.tolist()) != list(range(mesh.n_vertices)):
            raise MeshError("symmetry is not a permutation", perm=name)
        mapped = np.sort(perm[mesh.triangles], axis=1)
        if {tuple(r) for r in mapped.tolist()} != ref_rows:
            raise MeshError("symmetry does not map triangles to triangles", perm=name)
        img = np.linalg.norm(mesh.vertices[perm[keys[:, 0]]] - mesh.vertices[perm[keys[:, 1]]], axis=1)
        if np.max(np.abs(img - lengths)) > tol:
            raise MeshError("symmetry changes edge lengths", perm=name, defect=float(np.max(np.abs(img - lengths))))


def perturb_vertex(mesh: Mesh, vertex: int, offset: Sequence[float]) -> Mesh:
    """Copy of ``mesh`` with one vertex moved; symmetry data is dropped."""
    vertices = mesh.vertices.copy()
    vertices[vertex] += np.asarray(offset, dtype=float)
    return replace(mesh, vertices=vertices, symmetry_perms={},
                   descriptor={**mesh.descriptor, "perturbed": int(vertex)})


__all__ = [
    "Mesh",
    "breakpoint_orbit",
    "clip_to_wedge",
    "mesh_by_reflection",
    "mesh_domain",
    "mesh_double_cover",
    "mesh_fundamental",
    "mesh_symmetric",
    "mesh_unstructured",
    "perturb_vertex",
    "refine_uniform",
    "refine_with_prolongation",
    "tag_boundary_edges",
    "validate_mesh",
]
