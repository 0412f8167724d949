"""Single-band 8-bit rendering of scene compositions.

Partition elements are filled first (constant value or template window),
then every point target is composited as a 2D kernel. Kernel shapes peak at
1 in the centre; the effective amplitude is capped so the peak does not
exceed 255 on the local sea level, and anything smaller than half a digital
number is cut off at the kernel radius.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from PIL import Image

from .composer import SceneComposition
from .geometry import rasterize_region
from .rng import Stream
from .templates import NoTemplateError, TemplateStore, query_by_geometry

KERNEL_KINDS = ("gaussian", "x-pattern", "tidal-damped")
PARTITION_ENTITIES = ("Sea", "Coast", "Land")


class RenderError(ValueError):
    pass


@dataclass(frozen=True)
class KernelSpec:
    kind: str = "gaussian"
    amplitude: float = 200.0
    sigma: float = 1.5
    arm_length: float = 4.0
    arm_width: float = 0.8
    damping: float = 1.0

    def __post_init__(self):
        if self.kind not in KERNEL_KINDS:
            raise ValueError(f"unknown kernel kind {self.kind!r}")
        if self.sigma <= 0 or (self.kind != "gaussian" and (self.arm_length <= 0 or self.arm_width <= 0)):
            raise ValueError("kernel widths must be positive")
        if self.amplitude < 0:
            raise ValueError("kernel amplitude must be non-negative")

    @property
    def spread(self) -> float:
        if self.kind == "gaussian":
            return self.sigma
        return max(self.sigma, self.arm_length, self.arm_width)

    @property
    def radius(self) -> int:
        """Pixels beyond this distance would receive less than half a DN."""
        if self.amplitude <= 0.5:
            return 1
        reach = self.spread * math.sqrt(2.0 * math.log(2.0 * self.amplitude))
        return max(1, math.ceil(reach) + 1)


def kernel_from_spec(spec) -> KernelSpec:
    """KernelSpec for a sampled WindTurbine or OilRig specification."""
    kind = spec.key("kernel") if "kernel" in spec.sampled else "gaussian"
    kw = {"kind": kind, "amplitude": spec.value("amplitude"), "sigma": spec.value("sigma")}
    if kind != "gaussian":
        kw["arm_length"] = spec.value("arm_length")
        kw["arm_width"] = spec.value("arm_width")
        kw["damping"] = spec.value("damping") if kind == "tidal-damped" else 1.0
    return KernelSpec(**kw)


def kernel_shape(spec: KernelSpec) -> np.ndarray:
    """Normalised kernel on a (2r+1)^2 grid; 1 at the centre, 0 beyond r."""
    r = spec.radius
    dy, dx = np.mgrid[-r:r + 1, -r:r + 1].astype(np.float64)
    rho2 = dx * dx + dy * dy
    shape = np.exp(-rho2 / (2 * spec.sigma ** 2))
    if spec.kind != "gaussian":
        # Arms along both diagonals: along-arm spread L, across-arm spread w.
        a1 = (dx + dy) / math.sqrt(2)
        a2 = (dx - dy) / math.sqrt(2)
        L2, w2 = 2 * spec.arm_length ** 2, 2 * spec.arm_width ** 2
        arms = np.maximum(np.exp(-a1 ** 2 / L2 - a2 ** 2 / w2), np.exp(-a2 ** 2 / L2 - a1 ** 2 / w2))
        shape = np.maximum(shape, spec.damping * arms)
    shape[rho2 > r * r] = 0.0
    return shape


def local_sea_mean(base: np.ndarray, location, radius: int) -> float:
    """Mean of ``base`` over a (4 radius)^2 window around ``location``, clamped."""
    row, col = location
    half = 2 * radius
    h, w = base.shape
    r0, r1 = max(0, row - half), min(h, row + half)
    c0, c1 = max(0, col - half), min(w, col + half)
    return float(base[r0:r1, c0:c1].mean())


def _composite(out: np.ndarray, row: int, col: int, spec: KernelSpec, local_mean: float) -> None:
    h, w = out.shape
    if not (0 <= row < h and 0 <= col < w):
        raise RenderError(f"location {(row, col)} outside {h}x{w} image")
    amp = min(spec.amplitude, max(0.0, 255.0 - local_mean))
    if amp <= 0:
        return
    shape = kernel_shape(spec)
    r = spec.radius
    r0, r1 = max(0, row - r), min(h, row + r + 1)
    c0, c1 = max(0, col - r), min(w, col + r + 1)
    k = shape[r0 - (row - r):r1 - (row - r), c0 - (col - r):c1 - (col - r)]
    patch = out[r0:r1, c0:c1].astype(np.float64) + amp * k
    out[r0:r1, c0:c1] = np.clip(np.rint(patch), 0, 255).astype(np.uint8)


def render_point(img: np.ndarray, location, spec: KernelSpec, local_mean: float) -> np.ndarray:
    """Add one kernel with saturation; returns a new image."""
    out = np.array(img, dtype=np.uint8, copy=True)
    _composite(out, int(location[0]), int(location[1]), spec, local_mean)
    return out


def render_turbine(img: np.ndarray, location, spec: KernelSpec, local_sea_stats: float) -> np.ndarray:
    return render_point(img, location, spec, local_sea_stats)


def render_rig(img: np.ndarray, location, spec: KernelSpec, local_sea_stats: float) -> np.ndarray:
    if spec.kind != "gaussian":
        raise RenderError("rig kernels are gaussian")
    return render_point(img, location, spec, local_sea_stats)


@dataclass(frozen=True)
class FillSource:
    kind: str  # "constant" or "template"
    value: Optional[float] = None
    class_tag: Optional[str] = None


@dataclass(frozen=True)
class TexturePlan:
    """Fill per partition entity, kernel per point-target entity."""

    fills: dict = field(default_factory=dict)
    kernels: dict = field(default_factory=dict)


def plan_from_composition(c: SceneComposition) -> TexturePlan:
    mode = c.spec("Scene").key("texture_source")
    fills = {}
    for el in c.elements:
        if el.entity not in PARTITION_ENTITIES:
            continue
        spec = c.spec(el.entity)
        if mode == "template":
            fills[el.entity] = FillSource("template", class_tag=spec.key("template"))
        else:
            name = "constant_value" if el.entity == "Sea" else "texture_value"
            fills[el.entity] = FillSource("constant", value=float(np.rint(spec.value(name))))
    kernels = {}
    for el in c.elements:
        if el.entity == "WindFarm":
            kernels["WindTurbine"] = kernel_from_spec(el.spec("WindTurbine"))
        elif el.entity == "RigField":
            kernels["OilRig"] = kernel_from_spec(el.spec("OilRig"))
    return TexturePlan(fills, kernels)


def point_pixels(points: np.ndarray, pixel_size: float, shape) -> np.ndarray:
    """(row, col) pixel of each scene point."""
    pts = np.asarray(points, dtype=np.float64).reshape(-1, 2)
    rc = np.floor(pts[:, ::-1] / pixel_size).astype(np.int64)
    rc[:, 0] = np.clip(rc[:, 0], 0, shape[0] - 1)
    rc[:, 1] = np.clip(rc[:, 1], 0, shape[1] - 1)
    return rc


def _template_fill(img, mask, source: FillSource, store: TemplateStore, rng: Stream,
                   pixel_size: float, entity: str):
    h, w = img.shape
    tiles = store.index.of_class(source.class_tag)
    if not tiles:
        raise NoTemplateError(f"no {source.class_tag!r} template for {entity}")
    tile = tiles[rng.integers(0, len(tiles) - 1)]
    if abs(tile.pixel_size - pixel_size) > 1e-9 or tile.width < w or tile.height < h:
        raise NoTemplateError(f"tile {tile.tile_id} cannot cover a {h}x{w} scene for {entity}")
    oy = rng.integers(0, tile.height - h)
    ox = rng.integers(0, tile.width - w)
    rows = np.nonzero(mask.any(axis=1))[0]
    cols = np.nonzero(mask.any(axis=0))[0]
    r0, r1, c0, c1 = int(rows[0]), int(rows[-1]) + 1, int(cols[0]), int(cols[-1]) + 1
    ps = tile.pixel_size
    fx, fy = tile.bounds[0] + ox * ps, tile.bounds[1] + oy * ps
    box = (fx + c0 * ps, fy + r0 * ps, fx + c1 * ps, fy + r1 * ps)
    try:
        win = query_by_geometry(store.index, box, source.class_tag, rng)
    except NoTemplateError as exc:
        raise NoTemplateError(f"{entity}: {exc}") from None
    patch = store.read_window(win)
    sub = mask[r0:r1, c0:c1]
    img[r0:r1, c0:c1][sub] = patch[sub]


def fill_partition(c: SceneComposition, plan: TexturePlan, store: Optional[TemplateStore],
                   rng: Stream) -> np.ndarray:
    n = c.extent.image_size
    res = c.extent.sensor_resolution
    img = np.zeros((n, n), dtype=np.uint8)
    for el in c.elements:
        if el.entity not in PARTITION_ENTITIES:
            continue
        source = plan.fills.get(el.entity)
        if source is None:
            raise RenderError(f"no fill source for {el.entity}")
        mask = rasterize_region(el.region, n, n, res)
        if not mask.any():
            continue
        if source.kind == "constant":
            img[mask] = int(np.clip(np.rint(source.value), 0, 255))
        elif source.kind == "template":
            if store is None:
                raise NoTemplateError(f"{el.entity} needs a template store")
            _template_fill(img, mask, source, store, rng, res, el.entity)
        else:
            raise RenderError(f"unknown fill kind {source.kind!r}")
    return img


def render_points(base: np.ndarray, c: SceneComposition, plan: TexturePlan) -> np.ndarray:
    img = base.copy()
    res = c.extent.sensor_resolution
    for el in c.elements:
        for entity, geom in el.parts.items():
            spec = plan.kernels.get(entity)
            if spec is None or not len(geom.points):
                continue
            for rc in point_pixels(geom.points, res, img.shape):
                _composite(img, int(rc[0]), int(rc[1]), spec, local_sea_mean(base, rc, spec.radius))
    return img


def render_scene(c: SceneComposition, plan: TexturePlan, store: Optional[TemplateStore],
                 rng: Stream) -> np.ndarray:
    return render_points(fill_partition(c, plan, store, rng), c, plan)


def save_png(img: np.ndarray, path) -> None:
    Image.fromarray(np.asarray(img, dtype=np.uint8), mode="L").save(path, optimize=False, compress_level=1)


def png_bytes(img: np.ndarray) -> bytes:
    import io

    buf = io.BytesIO()
    Image.fromarray(np.asarray(img, dtype=np.uint8), mode="L").save(buf, format="PNG", optimize=False, compress_level=1)
    return buf.getvalue()
