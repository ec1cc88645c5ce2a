"""Domain family registry: config sections to specs and back."""

from __future__ import annotations

import math
from collections.abc import Callable
from typing import Union

from .errors import ConfigError, GeometryError
from .geometry import (
    BoundaryTag,
    Curve,
    DomainSpec,
    HalfDomain,
    MetricWeight,
    SectorialBlock,
    build_disk,
    build_disk_partition,
    build_double_cover,
    build_half_disk,
    build_lens_half,
    build_quarter_disk,
    build_rectangle,
    build_rectangle_half,
    build_sectorial_domain,
)
from .schema import DomainConfig

Domain = Union[DomainSpec, HalfDomain]


def double_cover_base(top: BoundaryTag = BoundaryTag.DIRICHLET) -> DomainSpec:
    """Unit disk cut into quarter arcs centred on the axes, ``top`` on the arc around ``π/2``."""
    q = math.pi / 4
    tags = [top.swapped(), top, top.swapped(), top]
    curves = tuple(
        Curve.arc((0.0, 0.0), 1.0, (2 * k - 1) * q, (2 * k + 1) * q, tags[k], f"quarter-{k}")
        for k in range(4)
    )
    return DomainSpec(curves=curves, name="quarter-arc-disk", metadata={"family": "disk"})


def _weight(cfg: DomainConfig) -> MetricWeight:
    return MetricWeight(cfg.weight)


def _half_disk(cfg: DomainConfig) -> Domain:
    return build_half_disk(cfg.variant, _weight(cfg))


def _disk(cfg: DomainConfig) -> Domain:
    return build_disk(BoundaryTag(cfg.tag), cfg.radius)


def _disk_partition(cfg: DomainConfig) -> Domain:
    assert cfg.k is not None and cfg.n is not None
    spec, _ = build_disk_partition(cfg.k * math.pi / cfg.step, cfg.n * math.pi / cfg.step)
    return spec


def _rectangle(cfg: DomainConfig) -> Domain:
    tags = {side: BoundaryTag(tag) for side, tag in cfg.sides.items()}
    return build_rectangle(cfg.lower, cfg.upper, tags)


def _quarter_disk(cfg: DomainConfig) -> Domain:
    return build_quarter_disk()


def _sectorial(cfg: DomainConfig) -> Domain:
    assert cfg.alpha is not None
    block = SectorialBlock.polyline(cfg.alpha, list(cfg.points), list(cfg.parts))
    return build_sectorial_domain(block)


def _double_cover(cfg: DomainConfig) -> Domain:
    return build_double_cover(double_cover_base(BoundaryTag(cfg.tag)))


def _lens_half(cfg: DomainConfig) -> Domain:
    return build_lens_half(cfg.axis, _weight(cfg))


def _rectangle_half(cfg: DomainConfig) -> Domain:
    return build_rectangle_half(cfg.dirichlet_side, cfg.width, cfg.height)


def _curves(cfg: DomainConfig) -> Domain:
    assert cfg.spec is not None
    return DomainSpec.from_dict(cfg.spec)


FAMILIES: dict[str, Callable[[DomainConfig], Domain]] = {
    "half_disk": _half_disk,
    "disk": _disk,
    "disk_partition": _disk_partition,
    "rectangle": _rectangle,
    "quarter_disk": _quarter_disk,
    "sectorial": _sectorial,
    "double_cover": _double_cover,
    "lens_half": _lens_half,
    "rectangle_half": _rectangle_half,
    "curves": _curves,
}
# families whose builders take no weight argument
_UNWEIGHTED = ("disk", "disk_partition", "rectangle", "quarter_disk", "sectorial", "double_cover", "rectangle_half")


def build_domain(cfg: DomainConfig) -> Domain:
    """Build the domain (or half domain) a config section describes.

    Raises:
        ConfigError: Unknown family or parameters the geometry rejects.
    """
    try:
        builder = FAMILIES[cfg.family]
    except KeyError as exc:
        raise ConfigError(f"unknown domain family: {cfg.family}", allowed=sorted(FAMILIES)) from exc
    try:
        domain = builder(cfg)
    except GeometryError as exc:
        raise ConfigError(f"invalid {cfg.family} domain: {exc.message}", **exc.details) from exc
    if isinstance(domain, DomainSpec):
        if cfg.family in _UNWEIGHTED and cfg.weight != "flat":
            domain = domain.with_weight(_weight(cfg))
        if cfg.swapped:
            domain = domain.swapped()
    elif cfg.swapped:
        raise ConfigError("half domains cannot be swapped", family=cfg.family)
    return domain


def build_spec(cfg: DomainConfig) -> DomainSpec:
    """Like :func:`build_domain`, with half domains closed along their axis."""
    domain = build_domain(cfg)
    return domain.as_spec() if isinstance(domain, HalfDomain) else domain


def domain_config(spec: DomainSpec) -> DomainConfig:
    """Config section reproducing ``spec`` exactly (explicit curve list)."""
    return DomainConfig(family="curves", weight="flat" if spec.weight.is_flat else "spherical",
                        spec=spec.to_dict())
