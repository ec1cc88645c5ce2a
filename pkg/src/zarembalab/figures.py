"""Vector figures: tagged domains, meshes, eigenfunctions, ν tables and scans.

Dirichlet curves are drawn solid red, Neumann curves dashed blue.
"""

from __future__ import annotations

import logging
from pathlib import Path
from typing import TYPE_CHECKING, Any

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402
from matplotlib.tri import Triangulation  # noqa: E402

from .geometry import BoundaryTag, DomainSpec  # noqa: E402

if TYPE_CHECKING:
    from matplotlib.figure import Figure

    from .analysis import NuTable
    from .dtn import ScanResult
    from .mesh import Mesh

logger = logging.getLogger(__name__)

TAG_STYLE = {
    BoundaryTag.DIRICHLET: {"color": "red", "linestyle": "-", "linewidth": 2.0},
    BoundaryTag.NEUMANN: {"color": "blue", "linestyle": "--", "linewidth": 2.0},
}
# fixed ids and no timestamp keep the SVG text reproducible
matplotlib.rcParams["svg.hashsalt"] = "zarembalab"
SVG_METADATA = {"Date": None, "Creator": "zarembalab"}


def save_figure(fig: Figure, path: str | Path) -> Path:
    path = Path(path)
    fig.savefig(path, format="svg", metadata=SVG_METADATA, bbox_inches="tight")
    plt.close(fig)
    logger.debug("figure written to %s", path)
    return path


def _frame(ax: Any, title: str = "") -> None:
    ax.set_aspect("equal")
    ax.set_axis_off()
    if title:
        ax.set_title(title)


def draw_boundary(ax: Any, spec: DomainSpec, samples: int = 65) -> dict[str, int]:
    """Plot every curve with its tag style; returns the curve count per tag."""
    counts = {tag.value: 0 for tag in BoundaryTag}
    for curve in spec.curves:
        pts = curve.points(np.linspace(0.0, 1.0, samples if curve.is_arc else 2))
        ax.plot(pts[:, 0], pts[:, 1], gid=f"curve-{curve.tag.value}", **TAG_STYLE[curve.tag])
        counts[curve.tag.value] += 1
    return counts


def plot_domain(spec: DomainSpec, path: str | Path | None = None) -> Figure:
    fig, ax = plt.subplots(figsize=(5, 5))
    draw_boundary(ax, spec)
    _frame(ax, spec.name)
    if path is not None:
        save_figure(fig, path)
    return fig


def plot_mesh(mesh: Mesh, path: str | Path | None = None) -> Figure:
    fig, ax = plt.subplots(figsize=(5, 5))
    ax.triplot(Triangulation(mesh.vertices[:, 0], mesh.vertices[:, 1], mesh.triangles),
               color="0.6", linewidth=0.3)
    for tag in BoundaryTag:
        for a, b in mesh.tagged_edges(tag):
            seg = mesh.vertices[[a, b]]
            ax.plot(seg[:, 0], seg[:, 1], **TAG_STYLE[tag])
    _frame(ax, str(mesh.descriptor.get("spec", "")))
    if path is not None:
        save_figure(fig, path)
    return fig


def plot_eigenfunction(
    mesh: Mesh,
    values: np.ndarray,
    path: str | Path | None = None,
    spec: DomainSpec | None = None,
    title: str = "",
) -> Figure:
    """Filled triangle colour map of a nodal field."""
    fig, ax = plt.subplots(figsize=(5.5, 5))
    tri = Triangulation(mesh.vertices[:, 0], mesh.vertices[:, 1], mesh.triangles)
    image = ax.tripcolor(tri, np.asarray(values, dtype=float), shading="gouraud", cmap="RdBu_r")
    fig.colorbar(image, ax=ax, shrink=0.8)
    if spec is not None and spec.sheets == 1:
        draw_boundary(ax, spec)
    _frame(ax, title)
    if path is not None:
        save_figure(fig, path)
    return fig


def plot_nu_table(table: NuTable, path: str | Path | None = None) -> Figure:
    """Heat map of ``log10 ν(k, n)``; trivial cells are outlined."""
    fig, ax = plt.subplots(figsize=(6, 5))
    nu = table.matrix()
    with np.errstate(divide="ignore"):
        shown = np.log10(np.where(nu > 0, nu, np.nan))
    image = ax.imshow(shown, origin="lower", cmap="viridis",
                      extent=(0.5, table.max_n + 0.5, 0.5, table.max_n + 0.5))
    fig.colorbar(image, ax=ax, label="log10 nu")
    for k, n in table.trivial:
        ax.add_patch(plt.Rectangle((n - 0.5, k - 0.5), 1, 1, fill=False, edgecolor="white", linewidth=1.0))
    ax.set_xlabel(f"n (beta = n pi/{table.step})")
    ax.set_ylabel(f"k (alpha = k pi/{table.step})")
    if path is not None:
        save_figure(fig, path)
    return fig


def plot_scan(scan: ScanResult, path: str | Path | None = None, reference: list[float] | None = None) -> Figure:
    """Signed ``log|det(C + I)|`` along λ with crossings, poles and reference eigenvalues."""
    fig, ax = plt.subplots(figsize=(7, 4))
    lam = np.array([s["lambda"] for s in scan.samples if s["admissible"]])
    signed = np.array([s["sign"] * s["logabs"] for s in scan.samples if s["admissible"]])
    ax.plot(lam, signed, color="black", linewidth=1.0)
    for x in scan.crossings:
        ax.axvline(x, color="red", linewidth=0.8)
    for x in scan.poles:
        ax.axvline(x, color="blue", linestyle="--", linewidth=0.8)
    for x in reference or []:
        ax.plot([x], [0.0], marker="o", color="green")
    for lo, hi in scan.gaps:
        ax.axvspan(lo, hi, color="0.85")
    ax.set_xlabel("lambda")
    ax.set_ylabel("sign * log|det(C + I)|")
    if path is not None:
        save_figure(fig, path)
    return fig
