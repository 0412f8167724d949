from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from ..ontology import SceneElementSpecification, SceneExtentConfig

TARGET = "target"
NONE_TARGET = "none-target"


class GenerationError(Exception):
    """Bounded search exhausted; the caller should retry with a new seed."""


class ResampleSignal(GenerationError):
    """Generation produced nothing usable (e.g. no turbines, no rigs)."""


class PlacementError(GenerationError):
    def __init__(self, message: str, attempts: int):
        self.attempts = attempts
        super().__init__(f"{message} after {attempts} attempts")


@dataclass(frozen=True)
class Geometry:
    """Even-odd region (list of rings) plus an optional point set, in metres."""

    region: tuple = ()
    points: np.ndarray = field(default_factory=lambda: np.zeros((0, 2)))

    @property
    def empty(self) -> bool:
        return not self.region and len(self.points) == 0


@dataclass(eq=False)
class SceneElement:
    entity: str
    role: str
    geometry: Geometry
    specs: tuple[SceneElementSpecification, ...] = ()
    parts: dict = field(default_factory=dict)
    clipped_by_extent: bool = False

    @property
    def region(self) -> tuple:
        return self.geometry.region

    @property
    def points(self) -> np.ndarray:
        return self.geometry.points

    def spec(self, entity: Optional[str] = None) -> SceneElementSpecification:
        entity = entity or self.entity
        for s in self.specs:
            if s.entity == entity:
                return s
        raise KeyError(entity)

    def geometries(self) -> dict[str, Geometry]:
        """Entity name -> geometry, including the element's named parts."""
        out = {self.entity: self.geometry}
        out.update(self.parts)
        return out


@dataclass(eq=False)
class SceneComposition:
    extent: SceneExtentConfig
    elements: list[SceneElement]
    seed: int
    specs: tuple[SceneElementSpecification, ...] = ()
    composition_class: str = ""
    relations: tuple = ()

    def element(self, entity: str) -> Optional[SceneElement]:
        for e in self.elements:
            if e.entity == entity:
                return e
        return None

    def elements_of(self, entity: str) -> list[SceneElement]:
        return [e for e in self.elements if e.entity == entity]

    def geometries(self) -> dict[str, list[Geometry]]:
        out: dict[str, list[Geometry]] = {}
        for el in self.elements:
            for name, geom in el.geometries().items():
                out.setdefault(name, []).append(geom)
        return out

    def spec(self, entity: str) -> SceneElementSpecification:
        for s in self.specs:
            if s.entity == entity:
                return s
        raise KeyError(entity)

    def to_geojson(self) -> dict:
        """Debug dump as a GeoJSON FeatureCollection in scene-local metres."""
        features = []
        for el in self.elements:
            for name, geom in el.geometries().items():
                props = {"entity": name, "element": el.entity, "role": el.role}
                if geom.region:
                    rings = [np.vstack([r, r[:1]]).tolist() for r in geom.region]
                    features.append({
                        "type": "Feature",
                        "properties": props,
                        "geometry": {"type": "MultiPolygon", "coordinates": [[ring] for ring in rings]},
                    })
                if len(geom.points):
                    features.append({
                        "type": "Feature",
                        "properties": props,
                        "geometry": {"type": "MultiPoint", "coordinates": np.asarray(geom.points).tolist()},
                    })
        return {
            "type": "FeatureCollection",
            "frame": "scene-local-m",
            "scene_size": self.extent.scene_size,
            "seed": self.seed,
            "composition": self.composition_class,
            "features": features,
        }

    def dumps(self) -> str:
        return json.dumps(self.to_geojson(), sort_keys=True)
