"""Ontology data model.

Everything here is immutable after construction, so a parsed ontology can be
shared freely between generation workers.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

CHOICE_SET = "choice-set"
UNIFORM_RANGE = "uniform-range"
DISCRETE_UNIFORM_RANGE = "discrete-uniform-range"
CONSTANT = "constant"
TEMPLATE_QUERY = "template-query"

DIMENSION_KINDS = (CHOICE_SET, UNIFORM_RANGE, DISCRETE_UNIFORM_RANGE, CONSTANT, TEMPLATE_QUERY)

MUST_BE_INSIDE = "MustBeInside"
MUST_BE_COINCIDENT_WITH = "MustBeCoincidentWith"
MUST_NOT_OVERLAP = "MustNotOverlap"
MUST_BE_WITHIN_DISTANCE = "MustBeWithinDistance"

PREDICATES = (MUST_BE_INSIDE, MUST_BE_COINCIDENT_WITH, MUST_NOT_OVERLAP, MUST_BE_WITHIN_DISTANCE)


class OntologyError(Exception):
    pass


class OntologyParseError(OntologyError):
    def __init__(self, message: str, line: Optional[int] = None, column: Optional[int] = None):
        self.line = line
        self.column = column
        where = f" (line {line}, column {column})" if line is not None else ""
        super().__init__(message + where)


class OntologyValidationError(OntologyError):
    def __init__(self, diagnostics):
        self.diagnostics = list(diagnostics)
        super().__init__("; ".join(str(d) for d in self.diagnostics))


class ContextCycleError(OntologyValidationError):
    pass


class UnresolvedContextError(OntologyError):
    pass


@dataclass(frozen=True)
class ChoiceItem:
    key: str
    value: float
    unit: str = ""
    weight: Optional[float] = None


@dataclass(frozen=True)
class SampledValue:
    value: Optional[float]
    key: Optional[str] = None


@dataclass(frozen=True)
class Dimension:
    kind: str
    items: tuple[ChoiceItem, ...] = ()
    lower: Optional[float] = None
    upper: Optional[float] = None
    value: Optional[float] = None
    query: Optional[str] = None
    unit: str = ""

    @classmethod
    def choices(cls, items, unit: str = "") -> "Dimension":
        built = []
        for item in items:
            if isinstance(item, ChoiceItem):
                built.append(item)
            else:
                key, value = item[0], item[1]
                built.append(ChoiceItem(key, float(value), unit))
        return cls(CHOICE_SET, items=tuple(built), unit=unit)

    @classmethod
    def uniform(cls, lower: float, upper: float, unit: str = "") -> "Dimension":
        return cls(UNIFORM_RANGE, lower=float(lower), upper=float(upper), unit=unit)

    @classmethod
    def discrete(cls, lower: int, upper: int, unit: str = "") -> "Dimension":
        return cls(DISCRETE_UNIFORM_RANGE, lower=float(lower), upper=float(upper), unit=unit)

    @classmethod
    def constant(cls, value: float, unit: str = "") -> "Dimension":
        return cls(CONSTANT, value=float(value), unit=unit)

    @classmethod
    def template(cls, query: str) -> "Dimension":
        return cls(TEMPLATE_QUERY, query=query)

    @property
    def keys(self) -> tuple[str, ...]:
        return tuple(item.key for item in self.items)

    def item(self, key: str) -> ChoiceItem:
        for item in self.items:
            if item.key == key:
                return item
        raise KeyError(key)

    def contains(self, sampled: SampledValue) -> bool:
        if self.kind == CHOICE_SET:
            return any(i.key == sampled.key and i.value == sampled.value for i in self.items)
        if self.kind == UNIFORM_RANGE:
            return sampled.value is not None and self.lower <= sampled.value <= self.upper
        if self.kind == DISCRETE_UNIFORM_RANGE:
            v = sampled.value
            return v is not None and float(v).is_integer() and self.lower <= v <= self.upper
        if self.kind == CONSTANT:
            return sampled.value == self.value
        if self.kind == TEMPLATE_QUERY:
            return sampled.key == self.query
        return False

    def numeric_values(self) -> list[float]:
        if self.kind == CHOICE_SET:
            return [i.value for i in self.items]
        if self.kind in (UNIFORM_RANGE, DISCRETE_UNIFORM_RANGE):
            return [self.lower, self.upper]
        if self.kind == CONSTANT:
            return [self.value]
        return []

    def is_empty(self) -> bool:
        if self.kind == CHOICE_SET:
            return not self.items
        if self.kind in (UNIFORM_RANGE, DISCRETE_UNIFORM_RANGE):
            return self.lower is None or self.upper is None or math.isnan(self.lower) or math.isnan(self.upper)
        if self.kind == CONSTANT:
            return self.value is None
        if self.kind == TEMPLATE_QUERY:
            return not self.query
        return True


@dataclass(frozen=True)
class Characteristic:
    name: str
    dimension: Dimension


@dataclass(frozen=True)
class ContextLink:
    """Substitutes the target dimension when the source sampled ``key``."""

    source_entity: str
    source_characteristic: str
    key: str
    target_entity: str
    target_characteristic: str
    dimension: Dimension

    @property
    def source(self) -> str:
        return f"{self.source_entity}.{self.source_characteristic}"

    @property
    def target(self) -> str:
        return f"{self.target_entity}.{self.target_characteristic}"

    def __str__(self) -> str:
        return f"{self.source}[{self.key}] -> {self.target}"


@dataclass(frozen=True)
class TopologyRelation:
    subject: str
    predicate: str
    object: str
    distance: Optional[float] = None

    def __str__(self) -> str:
        if self.predicate == MUST_BE_WITHIN_DISTANCE:
            return f"{self.predicate}({self.subject}, {self.object}, {self.distance:g} m)"
        return f"{self.predicate}({self.subject}, {self.object})"


@dataclass(frozen=True)
class Entity:
    name: str
    characteristics: tuple[Characteristic, ...] = ()
    relations: tuple[TopologyRelation, ...] = ()
    contexts: tuple[ContextLink, ...] = ()

    def characteristic(self, name: str) -> Characteristic:
        for c in self.characteristics:
            if c.name == name:
                return c
        raise KeyError(f"{self.name}.{name}")

    def has_characteristic(self, name: str) -> bool:
        return any(c.name == name for c in self.characteristics)


@dataclass(frozen=True)
class SceneExtentConfig:
    """Synthetic scene extent (metres per side) and sensor resolution."""

    scene_size: float = 20480.0
    sensor_resolution: float = 10.0

    def __post_init__(self):
        if self.scene_size <= 0 or self.sensor_resolution <= 0:
            raise ValueError("scene size and sensor resolution must be positive")
        ratio = self.scene_size / self.sensor_resolution
        if abs(ratio - round(ratio)) > 1e-9:
            raise ValueError(
                f"scene size {self.scene_size} m is not a multiple of the "
                f"sensor resolution {self.sensor_resolution} m"
            )

    @property
    def image_size(self) -> int:
        return int(round(self.scene_size / self.sensor_resolution))


@dataclass(frozen=True)
class Ontology:
    entities: tuple[Entity, ...]
    version: str = "1.0"
    scene: Optional[SceneExtentConfig] = None

    def entity(self, name: str) -> Entity:
        for e in self.entities:
            if e.name == name:
                return e
        raise KeyError(name)

    def has_entity(self, name: str) -> bool:
        return any(e.name == name for e in self.entities)

    @property
    def entity_names(self) -> list[str]:
        return [e.name for e in self.entities]

    def relations(self) -> list[TopologyRelation]:
        return [r for e in self.entities for r in e.relations]

    def context_links(self) -> list[ContextLink]:
        return [c for e in self.entities for c in e.contexts]

    def dimensions_of(self, entity: str, characteristic: str) -> list[Dimension]:
        """Base dimension followed by every context substitution for it."""
        ent = self.entity(entity)
        dims = [ent.characteristic(characteristic).dimension]
        dims += [c.dimension for c in ent.contexts if c.target_characteristic == characteristic]
        return dims


@dataclass(frozen=True)
class SceneElementSpecification:
    entity: str
    sampled: dict = field(default_factory=dict)

    def __getitem__(self, characteristic: str) -> SampledValue:
        return self.sampled[characteristic]

    def value(self, characteristic: str) -> float:
        return self.sampled[characteristic].value

    def key(self, characteristic: str) -> Optional[str]:
        return self.sampled[characteristic].key

    def context_keys(self) -> dict[str, str]:
        return {
            f"{self.entity}.{name}": sv.key
            for name, sv in self.sampled.items()
            if sv.key is not None
        }


@dataclass(frozen=True)
class OntologySnapshot:
    example_id: str
    specifications: tuple[SceneElementSpecification, ...]
    rng_seed: int
    draws: Optional[int] = None
    algorithm: str = "pcg64"

    def spec(self, entity: str) -> SceneElementSpecification:
        for s in self.specifications:
            if s.entity == entity:
                return s
        raise KeyError(entity)
