"""Oil rig clusters: organic shapes from thresholded simplex noise."""
from __future__ import annotations

from typing import Mapping, Optional

import numpy as np
from skimage.measure import find_contours

from ..geometry import points_in_region, signed_area
from ..noise import SimplexNoise
from ..ontology import Ontology, sample_entities
from ..rng import Stream
from .elements import NONE_TARGET, Geometry, ResampleSignal, SceneComposition, SceneElement

RIG_ENTITIES = ("RigField", "OilRig")
NOISE_GRID = 65
FIELD_ATTEMPTS = 20
CANDIDATE_FACTOR = 4


def _clean_ring(ring: np.ndarray) -> np.ndarray:
    keep = np.ones(len(ring), dtype=bool)
    keep[1:] = np.any(ring[1:] != ring[:-1], axis=1)
    ring = ring[keep]
    if len(ring) > 1 and np.array_equal(ring[0], ring[-1]):
        ring = ring[:-1]
    return ring


def noise_shapes(noise: SimplexNoise, origin, diameter: float, threshold: float,
                 frequency: float, grid: int = NOISE_GRID) -> list[np.ndarray]:
    """Rings bounding ``{noise > threshold}`` over a square field.

    The sampled field is padded with a value below any reachable threshold,
    so every contour closes within one grid cell outside the field square.
    Rings combine under the even-odd rule.
    """
    t = np.linspace(0.0, 1.0, grid)
    gx, gy = np.meshgrid(t * frequency, t * frequency)
    values = noise(gx, gy)
    if threshold >= values.max():
        return []
    padded = np.pad(values, 1, constant_values=-2.0)
    cell = diameter / (grid - 1)
    ox, oy = origin
    rings = []
    for contour in find_contours(padded, threshold):
        ring = np.column_stack([ox + (contour[:, 1] - 1) * cell, oy + (contour[:, 0] - 1) * cell])
        ring = _clean_ring(ring)
        if len(ring) >= 3 and signed_area(ring) != 0:
            rings.append(ring)
    return rings


def retain_rigs(candidates: np.ndarray, shapes, sea_regions) -> np.ndarray:
    """Boolean mask of candidates strictly inside the shapes and inside sea."""
    keep = points_in_region(candidates, shapes)
    if sea_regions:
        in_sea = np.zeros(len(candidates), dtype=bool)
        for region in sea_regions:
            in_sea |= points_in_region(candidates, region)
        keep &= in_sea
    return keep


def generate_rig_field(o: Ontology, composition: SceneComposition, rng: Stream,
                       context: Optional[Mapping[str, str]] = None) -> SceneElement:
    ctx = dict(context or {})
    specs = sample_entities(o, RIG_ENTITIES, ctx, rng)
    field = specs[0]
    scene = composition.extent.scene_size
    # Leave one noise cell of margin on both sides for the closing contour.
    max_diameter = scene * (NOISE_GRID - 1) / (NOISE_GRID + 1)
    diameter = min(field.value("diameter"), max_diameter)
    cell = diameter / (NOISE_GRID - 1)
    count = int(field.value("rig_count"))
    sea = [g.region for g in composition.geometries().get("Sea", []) if g.region]

    for _ in range(FIELD_ATTEMPTS):
        ox = rng.uniform(cell, scene - diameter - cell)
        oy = rng.uniform(cell, scene - diameter - cell)
        noise = SimplexNoise(rng)
        shapes = noise_shapes(noise, (ox, oy), diameter, field.value("threshold"), field.value("frequency"))
        if not shapes:
            continue
        n = CANDIDATE_FACTOR * count
        cand = np.column_stack([
            ox + rng.uniform_array(0.0, diameter, n),
            oy + rng.uniform_array(0.0, diameter, n),
        ])
        rigs = cand[retain_rigs(cand, shapes, sea)][:count]
        if len(rigs):
            return SceneElement(
                entity="RigField",
                role=NONE_TARGET,
                geometry=Geometry(tuple(shapes), rigs),
                specs=tuple(specs),
                parts={"OilRig": Geometry(points=rigs)},
            )
    raise ResampleSignal(f"no oil rig retained after {FIELD_ATTEMPTS} field attempts")
