from __future__ import annotations

from typing import Mapping, Optional

import numpy as np

from ..ontology import Ontology, sample_entities
from ..rng import Stream
from .elements import TARGET, Geometry, PlacementError, ResampleSignal, SceneComposition, SceneElement
from .layout import (
    apply_deformation,
    clip_layout,
    deformation_from_spec,
    generate_boundary_polygon,
    grid_layout,
)
from .topology import check_relations

FARM_ENTITIES = ("WindFarm", "WindfarmLayout", "WindfarmBoundary", "WindTurbine")
PLACEMENT_ATTEMPTS = 500
SHAPE_ATTEMPTS = 50


def _relations_touching(o: Ontology, names) -> list:
    names = set(names)
    return [r for r in o.relations() if r.subject in names or r.object in names]


def farm_element(specs, boundary_unit: np.ndarray, turbines_unit: np.ndarray,
                 size: float, offset) -> SceneElement:
    off = np.asarray(offset, dtype=np.float64)
    region = (boundary_unit * size + off,)
    turbines = turbines_unit * size + off
    return SceneElement(
        entity="WindFarm",
        role=TARGET,
        geometry=Geometry(region, turbines),
        specs=tuple(specs),
        parts={
            "WindfarmBoundary": Geometry(region),
            "WindfarmLayout": Geometry(points=turbines),
            "WindTurbine": Geometry(points=turbines),
        },
    )


def generate_windfarm(o: Ontology, composition: SceneComposition, rng: Stream,
                      context: Optional[Mapping[str, str]] = None,
                      max_attempts: int = PLACEMENT_ATTEMPTS) -> SceneElement:
    """Sample, shape and place one wind farm against the composition so far."""
    ctx = dict(context or {})
    specs = sample_entities(o, FARM_ENTITIES, ctx, rng)
    by_name = {s.entity: s for s in specs}
    farm, layout, bound = by_name["WindFarm"], by_name["WindfarmLayout"], by_name["WindfarmBoundary"]
    size = farm.value("size")
    min_size = farm.value("min_size")
    scene = composition.extent.scene_size
    if size > scene:
        raise PlacementError(f"farm size {size:g} m exceeds the scene", 0)

    grid = grid_layout(int(layout.value("lines_x")), int(layout.value("lines_y")))
    grid = apply_deformation(grid, deformation_from_spec(layout))

    for _ in range(SHAPE_ATTEMPTS):
        poly = generate_boundary_polygon(int(bound.value("n_vertices")),
                                         bound.value("min_vertex_distance"), rng)
        try:
            turbines = clip_layout(grid, poly)
        except ResampleSignal:
            continue
        extent = float((poly.vertices.max(axis=0) - poly.vertices.min(axis=0)).max()) * size
        if extent >= min_size:
            break
    else:
        raise ResampleSignal("no boundary polygon kept any turbine")

    relations = _relations_touching(o, FARM_ENTITIES)
    existing = composition.geometries()
    for _ in range(max_attempts):
        offset = (rng.uniform(0.0, scene - size), rng.uniform(0.0, scene - size))
        el = farm_element(specs, poly.vertices, turbines, size, offset)
        geoms = {k: list(v) for k, v in existing.items()}
        for name, g in el.geometries().items():
            geoms.setdefault(name, []).append(g)
        if not check_relations(geoms, relations):
            return el
    raise PlacementError("no valid wind farm placement", max_attempts)
