from __future__ import annotations

from dataclasses import dataclass

from .model import (
    CHOICE_SET,
    DIMENSION_KINDS,
    DISCRETE_UNIFORM_RANGE,
    MUST_BE_WITHIN_DISTANCE,
    PREDICATES,
    UNIFORM_RANGE,
    ContextLink,
    Dimension,
    Ontology,
)


@dataclass(frozen=True)
class Diagnostic:
    code: str
    message: str
    refs: tuple[str, ...] = ()

    def __str__(self) -> str:
        return f"{self.code}: {self.message}"


def _check_dimension(where: str, dim: Dimension) -> list[Diagnostic]:
    out = []
    if dim.kind not in DIMENSION_KINDS:
        return [Diagnostic("UNKNOWN_DIMENSION_KIND", f"{where}: unknown dimension kind {dim.kind!r}", (where,))]
    if dim.is_empty():
        code = "EMPTY_CHOICE_SET" if dim.kind == CHOICE_SET else "EMPTY_DIMENSION"
        return [Diagnostic(code, f"{where}: dimension has no values", (where,))]
    if dim.kind == CHOICE_SET:
        seen = set()
        for item in dim.items:
            if item.key in seen:
                out.append(Diagnostic("DUPLICATE_CHOICE_KEY", f"{where}: choice key {item.key!r} repeated", (where, item.key)))
            seen.add(item.key)
            if item.weight is not None and item.weight < 0:
                out.append(Diagnostic("NEGATIVE_WEIGHT", f"{where}: choice {item.key!r} has negative weight", (where, item.key)))
        if all(i.weight is not None for i in dim.items) and sum(i.weight for i in dim.items) <= 0:
            out.append(Diagnostic("ZERO_WEIGHTS", f"{where}: choice weights sum to zero", (where,)))
    if dim.kind in (UNIFORM_RANGE, DISCRETE_UNIFORM_RANGE):
        if dim.lower > dim.upper:
            out.append(Diagnostic("INVALID_RANGE", f"{where}: lower bound {dim.lower:g} exceeds upper {dim.upper:g}", (where,)))
        if dim.kind == DISCRETE_UNIFORM_RANGE and not (float(dim.lower).is_integer() and float(dim.upper).is_integer()):
            out.append(Diagnostic("NON_INTEGER_BOUNDS", f"{where}: discrete range needs integer bounds", (where,)))
    return out


def _source_keys(o: Ontology, link: ContextLink) -> set[str] | None:
    try:
        dims = o.dimensions_of(link.source_entity, link.source_characteristic)
    except KeyError:
        return None
    keys: set[str] = set()
    for d in dims:
        if d.kind == CHOICE_SET:
            keys.update(d.keys)
    return keys


def find_context_cycles(o: Ontology) -> list[list[ContextLink]]:
    """Cycles in the entity graph induced by cross-entity context links.

    Each cycle is reported once, as the list of links traversed.
    """
    edges: dict[str, list[ContextLink]] = {}
    for link in o.context_links():
        if link.source_entity != link.target_entity:
            edges.setdefault(link.source_entity, []).append(link)

    cycles: list[list[ContextLink]] = []
    seen_cycles: set[frozenset] = set()
    state: dict[str, int] = {}
    stack: list[ContextLink] = []

    def visit(node: str):
        state[node] = 1
        for link in edges.get(node, []):
            nxt = link.target_entity
            stack.append(link)
            if state.get(nxt) == 1:
                start = next(i for i, l in enumerate(stack) if l.source_entity == nxt)
                cycle = stack[start:]
                sig = frozenset(cycle)
                if sig not in seen_cycles:
                    seen_cycles.add(sig)
                    cycles.append(list(cycle))
            elif state.get(nxt) is None:
                visit(nxt)
            stack.pop()
        state[node] = 2

    for name in o.entity_names:
        if state.get(name) is None:
            visit(name)
    return cycles


def validate_ontology(o: Ontology) -> list[Diagnostic]:
    """Return one diagnostic per invariant violation; empty when valid."""
    diags: list[Diagnostic] = []
    names = [e.name for e in o.entities]
    seen = set()
    for name in names:
        if name in seen:
            diags.append(Diagnostic("DUPLICATE_ENTITY", f"entity {name!r} declared more than once", (name,)))
        seen.add(name)

    for ent in o.entities:
        char_names = set()
        for ch in ent.characteristics:
            where = f"{ent.name}.{ch.name}"
            if ch.name in char_names:
                diags.append(Diagnostic("DUPLICATE_CHARACTERISTIC", f"characteristic {where} declared more than once", (where,)))
            char_names.add(ch.name)
            diags += _check_dimension(where, ch.dimension)

        for rel in ent.relations:
            label = str(rel)
            if rel.predicate not in PREDICATES:
                diags.append(Diagnostic("UNKNOWN_PREDICATE", f"{label}: unknown topology predicate", (rel.predicate,)))
            if rel.subject == rel.object:
                diags.append(Diagnostic("SELF_RELATION", f"{label}: subject and object are the same entity", (rel.subject,)))
            for ref in (rel.subject, rel.object):
                if not o.has_entity(ref):
                    diags.append(Diagnostic("DANGLING_REFERENCE", f"{label}: entity {ref!r} does not exist", (ref,)))
            if rel.predicate == MUST_BE_WITHIN_DISTANCE and (rel.distance is None or rel.distance < 0):
                diags.append(Diagnostic("INVALID_DISTANCE", f"{label}: needs a non-negative distance", (label,)))

        order = [c.name for c in ent.characteristics]
        for link in ent.contexts:
            label = str(link)
            if link.target_entity != ent.name:
                diags.append(Diagnostic("MISPLACED_CONTEXT", f"{label}: declared on entity {ent.name!r}", (label,)))
            dangling = False
            for e_name, c_name in (
                (link.source_entity, link.source_characteristic),
                (link.target_entity, link.target_characteristic),
            ):
                if not o.has_entity(e_name):
                    diags.append(Diagnostic("DANGLING_REFERENCE", f"{label}: entity {e_name!r} does not exist", (e_name,)))
                    dangling = True
                elif not o.entity(e_name).has_characteristic(c_name):
                    ref = f"{e_name}.{c_name}"
                    diags.append(Diagnostic("DANGLING_REFERENCE", f"{label}: characteristic {ref!r} does not exist", (ref,)))
                    dangling = True
            diags += _check_dimension(label, link.dimension)
            if dangling:
                continue
            source_dim = o.entity(link.source_entity).characteristic(link.source_characteristic).dimension
            if source_dim.kind != CHOICE_SET:
                diags.append(Diagnostic("CONTEXT_SOURCE_NOT_CHOICE", f"{label}: source dimension is not a choice-set", (link.source,)))
            elif link.key not in (_source_keys(o, link) or set()):
                diags.append(Diagnostic("UNKNOWN_CONTEXT_KEY", f"{label}: key {link.key!r} is not a choice of {link.source}", (link.source, link.key)))
            if link.source_entity == link.target_entity:
                if order.index(link.source_characteristic) >= order.index(link.target_characteristic):
                    diags.append(Diagnostic(
                        "FORWARD_CONTEXT",
                        f"{label}: same-entity source must be declared before its target",
                        (link.source, link.target),
                    ))

    for cycle in find_context_cycles(o):
        path = " ; ".join(str(l) for l in cycle)
        diags.append(Diagnostic("CONTEXT_CYCLE", f"context links form a cycle: {path}", tuple(str(l) for l in cycle)))
    return diags


def resolution_order(o: Ontology) -> list[str]:
    """Entity names in topological order over context links.

    Ties keep declaration order, so the order is a pure function of the
    document.
    """
    indeg = {name: 0 for name in o.entity_names}
    out: dict[str, list[str]] = {name: [] for name in o.entity_names}
    for link in o.context_links():
        if link.source_entity == link.target_entity:
            continue
        if link.source_entity in out and link.target_entity in indeg:
            out[link.source_entity].append(link.target_entity)
            indeg[link.target_entity] += 1
    ready = [n for n in o.entity_names if indeg[n] == 0]
    order: list[str] = []
    while ready:
        node = ready.pop(0)
        order.append(node)
        for nxt in out[node]:
            indeg[nxt] -= 1
            if indeg[nxt] == 0:
                ready.append(nxt)
        ready.sort(key=o.entity_names.index)
    if len(order) != len(indeg):
        raise ValueError("context links are cyclic; no resolution order exists")
    return order
