"""Sea / coast / land partition of the scene extent.

The procedural stand-in draws a noise-displaced coastline across the scene
in a canonical frame with land along the top edge, then rotates the result
so land sits on the sampled side. Neighbouring parts are built from the very
same vertex arrays, so shared edges are bit-identical and the half-open
raster rule assigns every pixel to exactly one part.
"""
from __future__ import annotations

import numpy as np

from ..geometry import is_simple, region_area
from ..noise import SimplexNoise
from ..ontology import SceneExtentConfig
from ..rng import Stream
from .elements import NONE_TARGET, Geometry, SceneElement


class PartitionError(ValueError):
    pass


SIDES = ("north", "east", "south", "west")
COASTLINE_SEGMENTS = 64


def _orient_side(ring: np.ndarray, side: str, size: float) -> np.ndarray:
    x, y = ring[:, 0], ring[:, 1]
    if side == "north":
        return ring.copy()
    if side == "east":
        return np.column_stack([size - y, x])
    if side == "south":
        return np.column_stack([size - x, size - y])
    if side == "west":
        return np.column_stack([y, size - x])
    raise PartitionError(f"unknown land side {side!r}")


def coastline_depths(extent: SceneExtentConfig, coverage: float, roughness: float,
                     wavelength: float, rng: Stream, reserve: float = 0.0) -> tuple[np.ndarray, np.ndarray]:
    """Abscissae and land depths of the canonical coastline polyline."""
    size = extent.scene_size
    xs = np.linspace(0.0, size, COASTLINE_SEGMENTS + 1)
    noise = SimplexNoise(rng)
    row = rng.uniform(0.0, 256.0)
    depth = coverage * size + roughness * noise.line(xs / wavelength, row)
    lo = extent.sensor_resolution
    hi = size - reserve - extent.sensor_resolution
    if hi <= lo:
        raise PartitionError("coast band leaves no room for sea")
    return xs, np.clip(depth, lo, hi)


def procedural_partition(extent: SceneExtentConfig, rng: Stream, *, land: bool = False,
                         coast_width: float | None = None, coverage: float = 0.2,
                         side: str = "north", roughness: float = 500.0,
                         wavelength: float = 6000.0, specs: dict | None = None) -> list[SceneElement]:
    """Sea only, land + sea, or land + coast + sea.

    ``specs`` maps entity name to its sampled specification and is attached
    to the produced elements.
    """
    specs = specs or {}
    size = extent.scene_size
    square = np.array([[0.0, 0.0], [size, 0.0], [size, size], [0.0, size]])
    if not land:
        return [_element("Sea", [square], specs)]

    width = float(coast_width or 0.0)
    xs, d = coastline_depths(extent, coverage, roughness, wavelength, rng, reserve=width)
    line = np.column_stack([xs, d])
    land_ring = np.vstack([[[0.0, 0.0], [size, 0.0]], line[::-1]])
    if width > 0:
        outer = np.column_stack([xs, d + width])
        coast_ring = np.vstack([line, outer[::-1]])
    else:
        outer = line
    sea_ring = np.vstack([outer, [[size, size], [0.0, size]]])

    out = [_element("Sea", [_orient_side(sea_ring, side, size)], specs)]
    if width > 0:
        out.append(_element("Coast", [_orient_side(coast_ring, side, size)], specs))
    out.append(_element("Land", [_orient_side(land_ring, side, size)], specs, clipped=True))
    for el in out:
        if not all(is_simple(r) for r in el.region):
            raise PartitionError(f"procedural {el.entity} outline is not simple")
    return out


def _element(entity: str, region, specs: dict, clipped: bool = False) -> SceneElement:
    spec = specs.get(entity)
    return SceneElement(
        entity=entity,
        role=NONE_TARGET,
        geometry=Geometry(tuple(np.asarray(r, dtype=np.float64) for r in region)),
        specs=(spec,) if spec is not None else (),
        clipped_by_extent=clipped,
    )


def _rings_of(geom) -> list[np.ndarray]:
    rings = []
    polys = getattr(geom, "geoms", [geom])
    for poly in polys:
        if poly.geom_type != "Polygon" or poly.is_empty:
            continue
        rings.append(np.asarray(poly.exterior.coords, dtype=np.float64)[:-1])
        for hole in poly.interiors:
            rings.append(np.asarray(hole.coords, dtype=np.float64)[:-1])
    return rings


def partition_from_geojson(doc: dict, extent: SceneExtentConfig, specs: dict | None = None) -> list[SceneElement]:
    """Partition from GeoJSON polygons in scene-local metres.

    Features carry ``properties.class`` of ``land`` or ``coast``; sea is the
    remainder of the extent. Coast is trimmed by land.
    """
    from shapely.geometry import box, shape
    from shapely.ops import unary_union

    specs = specs or {}
    size = extent.scene_size
    frame = box(0.0, 0.0, size, size)
    parts: dict[str, list] = {"land": [], "coast": []}
    for feat in doc.get("features", []):
        cls = (feat.get("properties") or {}).get("class")
        if cls not in parts:
            continue
        try:
            geom = shape(feat["geometry"])
        except Exception as exc:
            raise PartitionError(f"unreadable {cls} geometry: {exc}") from None
        if geom.geom_type not in ("Polygon", "MultiPolygon") or not geom.is_valid or geom.area <= 0:
            raise PartitionError(f"degenerate {cls} geometry")
        parts[cls].append(geom)

    land = unary_union(parts["land"]).intersection(frame) if parts["land"] else None
    coast = unary_union(parts["coast"]).intersection(frame) if parts["coast"] else None
    if coast is not None and land is not None:
        coast = coast.difference(land)
    sea = frame
    for g in (land, coast):
        if g is not None:
            sea = sea.difference(g)

    out = []
    for name, geom, clipped in (("Sea", sea, False), ("Coast", coast, False), ("Land", land, True)):
        if geom is None or geom.is_empty or geom.area <= 0:
            continue
        rings = _rings_of(geom)
        if rings:
            out.append(_element(name, rings, specs, clipped))
    if not out:
        raise PartitionError("template geometry leaves an empty partition")
    total = sum(region_area(e.region) for e in out)
    if abs(total - size * size) > extent.sensor_resolution ** 2:
        raise PartitionError("template partition does not cover the scene extent")
    return out
