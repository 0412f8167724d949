"""Tiled 8-bit raster templates queried by geometry.

Tiles are single-band PNG files with a JSON sidecar::

    {"tile_id": "sea-000", "bounds": [minx, miny, maxx, maxy],
     "class": "sea", "pixel_size": 10.0}

Bounds live in an abstract planar frame in metres. Row ``r`` of a tile
covers ``miny + r * pixel_size`` upwards in frame ``y``, i.e. frame ``y``
grows with the row index, the same convention the scene uses.
"""
from __future__ import annotations

import json
import math
import os
import threading
from collections import OrderedDict
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path
from typing import Optional

import numpy as np
from PIL import Image

from .noise import SimplexNoise
from .rng import Stream

TEMPLATE_CLASSES = ("sea", "coast-mix", "land")
INDEX_FILE = "index.json"
ENV_ROOT = "EOSYNTH_TEMPLATES"


class NoTemplateError(LookupError):
    pass


@dataclass(frozen=True)
class TileRecord:
    tile_id: str
    bounds: tuple[float, float, float, float]
    class_tag: str
    path: Optional[str]
    width: int
    height: int
    pixel_size: float

    def contains_box(self, box) -> bool:
        minx, miny, maxx, maxy = box
        bx0, by0, bx1, by1 = self.bounds
        return bx0 <= minx and by0 <= miny and maxx <= bx1 and maxy <= by1

    def to_json(self) -> dict:
        return {
            "tile_id": self.tile_id,
            "bounds": list(self.bounds),
            "class": self.class_tag,
            "file": self.path,
            "width": self.width,
            "height": self.height,
            "pixel_size": self.pixel_size,
        }


@dataclass(frozen=True)
class TileIndex:
    tiles: tuple[TileRecord, ...] = ()
    diagnostics: tuple[str, ...] = ()

    @property
    def tile_size(self) -> Optional[tuple[int, int]]:
        return (self.tiles[0].width, self.tiles[0].height) if self.tiles else None

    def of_class(self, class_tag: str) -> list[TileRecord]:
        return [t for t in self.tiles if t.class_tag == class_tag]

    def tile(self, tile_id: str) -> TileRecord:
        for t in self.tiles:
            if t.tile_id == tile_id:
                return t
        raise KeyError(tile_id)

    def to_json(self) -> dict:
        return {"tiles": [t.to_json() for t in self.tiles], "diagnostics": list(self.diagnostics)}


@dataclass(frozen=True)
class TemplateWindow:
    tile: TileRecord
    row0: int
    row1: int
    col0: int
    col1: int

    @property
    def shape(self) -> tuple[int, int]:
        return self.row1 - self.row0, self.col1 - self.col0


def _read_sidecar(path: Path, root: Path) -> TileRecord:
    meta = json.loads(path.read_text(encoding="utf-8"))
    tile_id = str(meta["tile_id"])
    bounds = tuple(float(v) for v in meta["bounds"])
    if len(bounds) != 4 or bounds[2] <= bounds[0] or bounds[3] <= bounds[1]:
        raise ValueError("bounds must be [minx, miny, maxx, maxy] with positive extent")
    class_tag = str(meta["class"])
    pixel_size = float(meta.get("pixel_size", 10.0))
    image = root / meta.get("file", path.with_suffix(".png").name)
    if not image.is_file():
        raise FileNotFoundError(f"raster {image.name} missing")
    with Image.open(image) as im:
        if im.mode != "L":
            raise ValueError(f"raster mode {im.mode} is not 8-bit single band")
        width, height = im.size
    expect_w = round((bounds[2] - bounds[0]) / pixel_size)
    expect_h = round((bounds[3] - bounds[1]) / pixel_size)
    if (width, height) != (expect_w, expect_h):
        raise ValueError(f"raster is {width}x{height}, bounds imply {expect_w}x{expect_h}")
    return TileRecord(tile_id, bounds, class_tag, image.name, width, height, pixel_size)


def build_index(root) -> TileIndex:
    """Index every valid tile under ``root``; invalid tiles become diagnostics."""
    root = Path(root)
    tiles: list[TileRecord] = []
    diags: list[str] = []
    seen: set[str] = set()
    for sidecar in sorted(root.glob("*.json")):
        if sidecar.name == INDEX_FILE:
            continue
        try:
            rec = _read_sidecar(sidecar, root)
        except (OSError, ValueError, KeyError, TypeError) as exc:
            diags.append(f"{sidecar.name}: {exc}")
            continue
        if rec.tile_id in seen:
            diags.append(f"{sidecar.name}: duplicate tile_id {rec.tile_id!r}")
            continue
        if tiles and (rec.width, rec.height) != (tiles[0].width, tiles[0].height):
            diags.append(f"{sidecar.name}: tile size differs from {tiles[0].width}x{tiles[0].height}")
            continue
        seen.add(rec.tile_id)
        tiles.append(rec)
    return TileIndex(tuple(tiles), tuple(diags))


def query_by_geometry(idx: TileIndex, geometry, class_tag: str,
                      rng: Optional[Stream] = None) -> TemplateWindow:
    """Pick a tile of ``class_tag`` containing the geometry's bounding box.

    ``geometry`` is a ``(minx, miny, maxx, maxy)`` box or a region (list of
    rings). With several candidates the choice is seeded through ``rng``;
    without one the first candidate in index order is taken.
    """
    box = _as_box(geometry)
    cands = [t for t in idx.of_class(class_tag) if t.contains_box(box)]
    if not cands:
        raise NoTemplateError(f"no {class_tag!r} tile covers {box}")
    tile = cands[rng.integers(0, len(cands) - 1)] if rng is not None and len(cands) > 1 else cands[0]
    ps = tile.pixel_size
    col0 = math.floor((box[0] - tile.bounds[0]) / ps + 1e-9)
    row0 = math.floor((box[1] - tile.bounds[1]) / ps + 1e-9)
    col1 = math.ceil((box[2] - tile.bounds[0]) / ps - 1e-9)
    row1 = math.ceil((box[3] - tile.bounds[1]) / ps - 1e-9)
    col1 = min(max(col1, col0 + 1), tile.width)
    row1 = min(max(row1, row0 + 1), tile.height)
    return TemplateWindow(tile, row0, row1, col0, col1)


def _as_box(geometry) -> tuple[float, float, float, float]:
    if len(geometry) == 4 and np.isscalar(geometry[0]):
        return tuple(float(v) for v in geometry)
    pts = np.concatenate([np.asarray(r, dtype=np.float64).reshape(-1, 2) for r in geometry])
    return float(pts[:, 0].min()), float(pts[:, 1].min()), float(pts[:, 0].max()), float(pts[:, 1].max())


class TemplateStore:
    """Read-only tile access with a small thread-safe LRU cache."""

    def __init__(self, index: TileIndex, root=None, rasters: Optional[dict] = None, cache_size: int = 8):
        self.index = index
        self.root = Path(root) if root is not None else None
        self._rasters = rasters or {}
        self._cache: OrderedDict[str, np.ndarray] = OrderedDict()
        self._cache_size = cache_size
        self._lock = threading.Lock()

    @classmethod
    def open(cls, root) -> "TemplateStore":
        return cls(build_index(root), root)

    def read(self, tile_id: str) -> np.ndarray:
        if tile_id in self._rasters:
            return self._rasters[tile_id]
        with self._lock:
            if tile_id in self._cache:
                self._cache.move_to_end(tile_id)
                return self._cache[tile_id]
        rec = self.index.tile(tile_id)
        if self.root is None or rec.path is None:
            raise NoTemplateError(f"tile {tile_id!r} has no raster")
        with Image.open(self.root / rec.path) as im:
            arr = np.asarray(im, dtype=np.uint8)
        arr.setflags(write=False)
        with self._lock:
            self._cache[tile_id] = arr
            while len(self._cache) > self._cache_size:
                self._cache.popitem(last=False)
        return arr

    def read_window(self, win: TemplateWindow) -> np.ndarray:
        return self.read(win.tile.tile_id)[win.row0:win.row1, win.col0:win.col1]


# -- procedural stand-in tiles --------------------------------------------

def _smooth(rng: Stream, h: int, w: int, scale: float, octaves: int = 3) -> np.ndarray:
    """Fractal simplex noise in roughly [-1, 1], evaluated coarse and upsampled."""
    step = 8
    ch, cw = h // step + 2, w // step + 2
    noise = SimplexNoise(rng)
    ys, xs = np.mgrid[0:ch, 0:cw].astype(np.float64) * step
    total = np.zeros((ch, cw))
    amp, norm = 1.0, 0.0
    for o in range(octaves):
        f = 2.0 ** o / scale
        total += amp * noise(xs * f, ys * f)
        norm += amp
        amp *= 0.5
    img = Image.fromarray((total / norm).astype(np.float32), mode="F")
    img = img.resize(((cw - 1) * step, (ch - 1) * step), Image.BILINEAR)
    return np.asarray(img, dtype=np.float64)[:h, :w]


def _jitter(rng: Stream, h: int, w: int, spread: float) -> np.ndarray:
    return (rng.random_array(h * w).reshape(h, w) - 0.5) * 2 * spread


def fixture_raster(class_tag: str, rng: Stream, size: int) -> np.ndarray:
    if class_tag == "sea":
        v = 34 + 9 * _smooth(rng, size, size, 600) + 3 * _smooth(rng, size, size, 60, 2)
        v += _jitter(rng, size, size, 5)
    elif class_tag == "land":
        block = 48
        nb = size // block + 1
        parcels = rng.uniform_array(95, 185, nb * nb).reshape(nb, nb)
        v = np.kron(parcels, np.ones((block, block)))[:size, :size]
        v += 12 * _smooth(rng, size, size, 500)
        road = np.zeros((size, size), dtype=bool)
        road[::384, :] = True
        road[:, ::384] = True
        road[1::384, :] = True
        road[:, 1::384] = True
        v[road] = 215
        v += _jitter(rng, size, size, 8)
    elif class_tag == "coast-mix":
        t = np.clip((_smooth(rng, size, size, 300) + 0.1) * 3, 0, 1)
        v = 45 * (1 - t) + 130 * t + _jitter(rng, size, size, 7)
    else:
        raise ValueError(f"unknown template class {class_tag!r}")
    return np.clip(np.rint(v), 0, 255).astype(np.uint8)


def fixture_tiles(seed: int = 0, tile_px: int = 2304, pixel_size: float = 10.0,
                  per_class: int = 2) -> list[tuple[TileRecord, np.ndarray]]:
    """Stand-in tiles laid out left to right in the frame without overlap."""
    out = []
    span = tile_px * pixel_size
    i = 0
    for class_tag in TEMPLATE_CLASSES:
        for j in range(per_class):
            rng = Stream(seed * 1000 + i)
            raster = fixture_raster(class_tag, rng, tile_px)
            tid = f"{class_tag}-{j:03d}"
            minx = i * (span + 10_000.0)
            rec = TileRecord(tid, (minx, 0.0, minx + span, span), class_tag, f"{tid}.png",
                             tile_px, tile_px, pixel_size)
            out.append((rec, raster))
            i += 1
    return out


def make_fixtures(root, seed: int = 0, tile_px: int = 2304, pixel_size: float = 10.0,
                  per_class: int = 2) -> TileIndex:
    """Write stand-in tiles, their sidecars and an index file under ``root``."""
    root = Path(root)
    root.mkdir(parents=True, exist_ok=True)
    for rec, raster in fixture_tiles(seed, tile_px, pixel_size, per_class):
        Image.fromarray(raster, mode="L").save(root / rec.path, optimize=False)
        meta = {"tile_id": rec.tile_id, "bounds": list(rec.bounds), "class": rec.class_tag,
                "pixel_size": rec.pixel_size}
        (root / f"{rec.tile_id}.json").write_text(json.dumps(meta, indent=2) + "\n", encoding="utf-8")
    idx = build_index(root)
    (root / INDEX_FILE).write_text(json.dumps(idx.to_json(), indent=2) + "\n", encoding="utf-8")
    return idx


@lru_cache(maxsize=2)
def fixture_store(seed: int = 0, tile_px: int = 2304) -> TemplateStore:
    """In-memory store of stand-in tiles, built once per process."""
    pairs = fixture_tiles(seed, tile_px)
    rasters = {}
    for rec, raster in pairs:
        raster.setflags(write=False)
        rasters[rec.tile_id] = raster
    return TemplateStore(TileIndex(tuple(rec for rec, _ in pairs)), rasters=rasters)


def default_store(root=None) -> TemplateStore:
    """Store at ``root``, else at ``$EOSYNTH_TEMPLATES``, else in-memory fixtures."""
    root = root or os.environ.get(ENV_ROOT)
    if root:
        return TemplateStore.open(root)
    return fixture_store()
