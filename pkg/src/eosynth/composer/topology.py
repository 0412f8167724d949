from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np

from ..geometry import (
    _edges_cross,
    distance_points_to_region,
    points_in_closed_region,
    points_in_region,
    region_contains_region,
    region_vertices,
    regions_overlap,
)
from ..ontology import (
    MUST_BE_COINCIDENT_WITH,
    MUST_BE_INSIDE,
    MUST_BE_WITHIN_DISTANCE,
    MUST_NOT_OVERLAP,
    TopologyRelation,
)
from .elements import Geometry, SceneComposition


@dataclass(frozen=True)
class Violation:
    subject: str
    predicate: str
    object: str
    detail: str = ""

    def __str__(self) -> str:
        return f"{self.predicate}({self.subject}, {self.object}) violated: {self.detail}"


def _inside(a: Geometry, b: Geometry) -> bool:
    if not b.region:
        return a.empty
    if len(a.points) and not points_in_region(a.points, b.region).all():
        return False
    return not a.region or region_contains_region(b.region, a.region)


def _coincident(a: Geometry, b: Geometry) -> bool:
    # Closed containment: lying on the object's boundary is fine.
    if not b.region:
        if not len(b.points):
            return a.empty
        pts = region_vertices(a.region) if a.region else np.zeros((0, 2))
        pts = np.vstack([pts, a.points]) if len(a.points) else pts
        return all(any(np.array_equal(p, q) for q in b.points) for p in pts)
    if len(a.points) and not points_in_closed_region(a.points, b.region).all():
        return False
    if a.region:
        if not points_in_closed_region(region_vertices(a.region), b.region).all():
            return False
        if _edges_cross(a.region, b.region, proper_only=True):
            return False
    return True


def _disjoint(a: Geometry, b: Geometry) -> bool:
    if a.region and b.region and regions_overlap(a.region, b.region):
        return False
    if len(a.points) and b.region and points_in_region(a.points, b.region).any():
        return False
    if len(b.points) and a.region and points_in_region(b.points, a.region).any():
        return False
    return True


def _within(a: Geometry, b: Geometry, distance: float) -> bool:
    pts = [a.points] if len(a.points) else []
    if a.region:
        pts.append(region_vertices(a.region))
    if not pts:
        return True
    pts = np.vstack(pts)
    if b.region:
        return bool((distance_points_to_region(pts, b.region) <= distance).all())
    if len(b.points):
        d = np.hypot(pts[:, None, 0] - b.points[None, :, 0], pts[:, None, 1] - b.points[None, :, 1])
        return bool((d.min(axis=1) <= distance).all())
    return False


def relation_holds(rel: TopologyRelation, a: Geometry, b: Geometry) -> bool:
    if rel.predicate == MUST_BE_INSIDE:
        return _inside(a, b)
    if rel.predicate == MUST_BE_COINCIDENT_WITH:
        return _coincident(a, b)
    if rel.predicate == MUST_NOT_OVERLAP:
        return _disjoint(a, b)
    if rel.predicate == MUST_BE_WITHIN_DISTANCE:
        return _within(a, b, rel.distance)
    raise ValueError(f"unknown predicate {rel.predicate!r}")


def check_relations(geometries: dict[str, list[Geometry]],
                    relations: Iterable[TopologyRelation]) -> list[Violation]:
    """Evaluate relations over every present subject/object geometry pair."""
    out = []
    for rel in relations:
        for i, a in enumerate(geometries.get(rel.subject, [])):
            for j, b in enumerate(geometries.get(rel.object, [])):
                if a is b:
                    continue
                if not relation_holds(rel, a, b):
                    out.append(Violation(rel.subject, rel.predicate, rel.object,
                                         f"subject #{i} against object #{j}"))
    return out


def check_topology(c: SceneComposition,
                   relations: Iterable[TopologyRelation] | None = None) -> list[Violation]:
    """Violations of the composition's declared relations (or ``relations``)."""
    if relations is None:
        relations = c.relations
    return check_relations(c.geometries(), relations)
