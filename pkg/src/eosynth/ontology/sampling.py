from __future__ import annotations

from typing import Iterable, Mapping, MutableMapping, Optional

from ..rng import Stream
from .model import (
    CHOICE_SET,
    CONSTANT,
    DISCRETE_UNIFORM_RANGE,
    TEMPLATE_QUERY,
    UNIFORM_RANGE,
    Dimension,
    Ontology,
    OntologyError,
    SampledValue,
    SceneElementSpecification,
    UnresolvedContextError,
)
from .validation import resolution_order


def resolve_dimension(o: Ontology, entity: str, characteristic: str,
                      context: Mapping[str, str]) -> Dimension:
    """Dimension of ``entity.characteristic`` after context substitution.

    Every context source that targets the characteristic must have a key in
    ``context``. The first link (declaration order) whose key matches wins;
    without a match the base dimension applies.
    """
    ent = o.entity(entity)
    base = ent.characteristic(characteristic).dimension
    links = [c for c in ent.contexts if c.target_characteristic == characteristic]
    chosen: Optional[Dimension] = None
    for link in links:
        if link.source not in context:
            raise UnresolvedContextError(
                f"context link {link} needs a sampled key for {link.source}"
            )
        if chosen is None and context[link.source] == link.key:
            chosen = link.dimension
    return chosen if chosen is not None else base


def draw_value(dim: Dimension, rng: Stream, forced_key: Optional[str] = None) -> SampledValue:
    if forced_key is not None:
        if dim.kind != CHOICE_SET:
            raise OntologyError(f"cannot force key {forced_key!r} on a {dim.kind} dimension")
        if forced_key not in dim.keys:
            raise OntologyError(f"forced key {forced_key!r} is not one of {list(dim.keys)}")
        item = dim.item(forced_key)
        return SampledValue(item.value, item.key)
    if dim.kind == CHOICE_SET:
        weights = [1.0 if i.weight is None else i.weight for i in dim.items]
        item = dim.items[rng.choice_index(weights)]
        return SampledValue(item.value, item.key)
    if dim.kind == UNIFORM_RANGE:
        return SampledValue(rng.uniform(dim.lower, dim.upper))
    if dim.kind == DISCRETE_UNIFORM_RANGE:
        return SampledValue(float(rng.integers(int(dim.lower), int(dim.upper))))
    if dim.kind == CONSTANT:
        return SampledValue(dim.value)
    if dim.kind == TEMPLATE_QUERY:
        return SampledValue(None, dim.query)
    raise OntologyError(f"unknown dimension kind {dim.kind!r}")


def sample_specification(o: Ontology, entity: str, context: Mapping[str, str],
                         rng: Stream) -> SceneElementSpecification:
    """Draw one value per characteristic of ``entity``.

    ``context`` maps ``"Entity.characteristic"`` to sampled semantic keys.
    An entry naming one of this entity's own characteristics forces that
    choice instead of drawing it.
    """
    ent = o.entity(entity)
    local = dict(context)
    sampled: dict[str, SampledValue] = {}
    for ch in ent.characteristics:
        ref = f"{entity}.{ch.name}"
        dim = resolve_dimension(o, entity, ch.name, local)
        sv = draw_value(dim, rng, forced_key=context.get(ref))
        sampled[ch.name] = sv
        if sv.key is not None:
            local[ref] = sv.key
    return SceneElementSpecification(entity, sampled)


def sample_entities(o: Ontology, entities: Iterable[str], context: MutableMapping[str, str],
                    rng: Stream) -> list[SceneElementSpecification]:
    """Sample several entities in context-resolution order.

    ``context`` is updated in place with every sampled semantic key.
    """
    wanted = list(entities)
    specs = []
    for name in resolution_order(o):
        if name not in wanted:
            continue
        spec = sample_specification(o, name, context, rng)
        context.update(spec.context_keys())
        specs.append(spec)
    return specs


def specification_within(o: Ontology, spec: SceneElementSpecification,
                         context: Mapping[str, str]) -> bool:
    """Check every sampled value against its context-resolved dimension."""
    ent = o.entity(spec.entity)
    local = dict(context)
    for ch in ent.characteristics:
        if ch.name not in spec.sampled:
            return False
        dim = resolve_dimension(o, spec.entity, ch.name, local)
        if not dim.contains(spec.sampled[ch.name]):
            return False
        key = spec.sampled[ch.name].key
        if key is not None:
            local[f"{spec.entity}.{ch.name}"] = key
    return True
