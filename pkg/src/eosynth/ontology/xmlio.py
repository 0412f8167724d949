"""XML reading and writing for ontologies and their per-example snapshots.

Ontology documents::

    <ontology version="1.0">
      <scene size="20480" resolution="10"/>
      <entity name="WindFarm">
        <characteristic name="size">
          <dimension kind="choice-set" unit="m">
            <choice key="small" value="5000"/>
          </dimension>
        </characteristic>
        <context source="Scene.composition" key="owf-small" target="size">
          <dimension kind="choice-set" unit="m"><choice key="small" value="5000"/></dimension>
        </context>
        <relation predicate="MustNotOverlap" object="Land"/>
      </entity>
    </ontology>

Snapshots use the same element vocabulary::

    <snapshot example_id="000001" seed="7" draws="312" algorithm="pcg64">
      <specification entity="WindFarm">
        <value characteristic="size" value="5000" key="small"/>
      </specification>
    </snapshot>
"""
from __future__ import annotations

import math
import xml.etree.ElementTree as ET
from typing import Optional

from .model import (
    CHOICE_SET,
    CONSTANT,
    DIMENSION_KINDS,
    DISCRETE_UNIFORM_RANGE,
    TEMPLATE_QUERY,
    UNIFORM_RANGE,
    Characteristic,
    ChoiceItem,
    ContextCycleError,
    ContextLink,
    Dimension,
    Entity,
    Ontology,
    OntologyParseError,
    OntologySnapshot,
    OntologyValidationError,
    SampledValue,
    SceneElementSpecification,
    SceneExtentConfig,
    TopologyRelation,
)
from .validation import validate_ontology


def format_number(value: float) -> str:
    v = float(value)
    if math.isfinite(v) and v.is_integer() and abs(v) < 1e15:
        return str(int(v))
    return repr(v)


def _number(elem: ET.Element, attr: str, required: bool = True) -> Optional[float]:
    raw = elem.get(attr)
    if raw is None:
        if required:
            raise OntologyParseError(f"<{elem.tag}> is missing attribute {attr!r}")
        return None
    try:
        return float(raw)
    except ValueError:
        raise OntologyParseError(f"<{elem.tag}> attribute {attr}={raw!r} is not a number") from None


def _required(elem: ET.Element, attr: str) -> str:
    raw = elem.get(attr)
    if raw is None or raw == "":
        raise OntologyParseError(f"<{elem.tag}> is missing attribute {attr!r}")
    return raw


def _parse_root(text: str, tag: str) -> ET.Element:
    try:
        root = ET.fromstring(text)
    except ET.ParseError as exc:
        line, column = exc.position
        raise OntologyParseError(f"malformed XML: {exc}", line, column) from None
    if root.tag != tag:
        raise OntologyParseError(f"expected <{tag}> root element, found <{root.tag}>")
    return root


def _split_ref(ref: str, where: str) -> tuple[str, str]:
    if ref.count(".") != 1:
        raise OntologyParseError(f"{where}: reference {ref!r} must be 'Entity.characteristic'")
    entity, characteristic = ref.split(".")
    return entity, characteristic


def _parse_dimension(elem: Optional[ET.Element], where: str) -> Dimension:
    if elem is None:
        raise OntologyParseError(f"{where}: missing <dimension>")
    kind = _required(elem, "kind")
    if kind not in DIMENSION_KINDS:
        raise OntologyParseError(f"{where}: unknown dimension kind {kind!r}")
    unit = elem.get("unit", "")
    if kind == CHOICE_SET:
        items = []
        for c in elem.findall("choice"):
            items.append(ChoiceItem(
                key=_required(c, "key"),
                value=_number(c, "value"),
                unit=c.get("unit", unit),
                weight=_number(c, "weight", required=False),
            ))
        return Dimension(kind, items=tuple(items), unit=unit)
    if kind in (UNIFORM_RANGE, DISCRETE_UNIFORM_RANGE):
        return Dimension(kind, lower=_number(elem, "lower"), upper=_number(elem, "upper"), unit=unit)
    if kind == CONSTANT:
        return Dimension(kind, value=_number(elem, "value"), unit=unit)
    return Dimension(kind, query=_required(elem, "class"), unit=unit)


def parse_ontology(document: str, *, strict: bool = True) -> Ontology:
    """Parse an ontology document.

    With ``strict`` the result is validated and any violation raises
    :class:`OntologyValidationError` (or :class:`ContextCycleError` when the
    context links are cyclic).
    """
    root = _parse_root(document, "ontology")
    scene = None
    scene_elem = root.find("scene")
    if scene_elem is not None:
        try:
            scene = SceneExtentConfig(_number(scene_elem, "size"), _number(scene_elem, "resolution"))
        except ValueError as exc:
            raise OntologyParseError(f"<scene>: {exc}") from None

    entities = []
    for e in root.findall("entity"):
        name = _required(e, "name")
        chars = []
        for c in e.findall("characteristic"):
            cname = _required(c, "name")
            chars.append(Characteristic(cname, _parse_dimension(c.find("dimension"), f"{name}.{cname}")))
        contexts = []
        for ctx in e.findall("context"):
            src_entity, src_char = _split_ref(_required(ctx, "source"), name)
            target = _required(ctx, "target")
            contexts.append(ContextLink(
                source_entity=src_entity,
                source_characteristic=src_char,
                key=_required(ctx, "key"),
                target_entity=name,
                target_characteristic=target,
                dimension=_parse_dimension(ctx.find("dimension"), f"{name}.{target} context"),
            ))
        relations = []
        for r in e.findall("relation"):
            relations.append(TopologyRelation(
                subject=r.get("subject", name),
                predicate=_required(r, "predicate"),
                object=_required(r, "object"),
                distance=_number(r, "distance", required=False),
            ))
        entities.append(Entity(name, tuple(chars), tuple(relations), tuple(contexts)))

    onto = Ontology(tuple(entities), version=root.get("version", "1.0"), scene=scene)
    if strict:
        diags = validate_ontology(onto)
        if diags:
            if any(d.code == "CONTEXT_CYCLE" for d in diags):
                raise ContextCycleError(diags)
            raise OntologyValidationError(diags)
    return onto


def _dimension_elem(parent: ET.Element, dim: Dimension) -> ET.Element:
    d = ET.SubElement(parent, "dimension", kind=dim.kind)
    if dim.unit:
        d.set("unit", dim.unit)
    if dim.kind == CHOICE_SET:
        for item in dim.items:
            c = ET.SubElement(d, "choice", key=item.key, value=format_number(item.value))
            if item.unit and item.unit != dim.unit:
                c.set("unit", item.unit)
            if item.weight is not None:
                c.set("weight", format_number(item.weight))
    elif dim.kind in (UNIFORM_RANGE, DISCRETE_UNIFORM_RANGE):
        d.set("lower", format_number(dim.lower))
        d.set("upper", format_number(dim.upper))
    elif dim.kind == CONSTANT:
        d.set("value", format_number(dim.value))
    elif dim.kind == TEMPLATE_QUERY:
        d.set("class", dim.query)
    return d


def _to_text(root: ET.Element) -> str:
    ET.indent(root, space="  ")
    return '<?xml version="1.0" encoding="UTF-8"?>\n' + ET.tostring(root, encoding="unicode") + "\n"


def write_ontology(o: Ontology) -> str:
    root = ET.Element("ontology", version=o.version)
    if o.scene is not None:
        ET.SubElement(root, "scene", size=format_number(o.scene.scene_size),
                      resolution=format_number(o.scene.sensor_resolution))
    for ent in o.entities:
        e = ET.SubElement(root, "entity", name=ent.name)
        for ch in ent.characteristics:
            c = ET.SubElement(e, "characteristic", name=ch.name)
            _dimension_elem(c, ch.dimension)
        for link in ent.contexts:
            ctx = ET.SubElement(e, "context", source=link.source, key=link.key,
                                target=link.target_characteristic)
            _dimension_elem(ctx, link.dimension)
        for rel in ent.relations:
            r = ET.SubElement(e, "relation", predicate=rel.predicate, object=rel.object)
            if rel.subject != ent.name:
                r.set("subject", rel.subject)
            if rel.distance is not None:
                r.set("distance", format_number(rel.distance))
    return _to_text(root)


def write_snapshot(specifications, example_id: str, seed: int, draws: Optional[int] = None,
                   algorithm: str = "pcg64") -> str:
    root = ET.Element("snapshot", example_id=str(example_id), seed=str(int(seed)), algorithm=algorithm)
    if draws is not None:
        root.set("draws", str(int(draws)))
    for spec in specifications:
        s = ET.SubElement(root, "specification", entity=spec.entity)
        for name, sv in spec.sampled.items():
            v = ET.SubElement(s, "value", characteristic=name)
            if sv.value is not None:
                v.set("value", format_number(sv.value))
            if sv.key is not None:
                v.set("key", sv.key)
    return _to_text(root)


def snapshot_to_xml(snapshot: OntologySnapshot) -> str:
    return write_snapshot(snapshot.specifications, snapshot.example_id, snapshot.rng_seed,
                          snapshot.draws, snapshot.algorithm)


def parse_snapshot(document: str) -> OntologySnapshot:
    root = _parse_root(document, "snapshot")
    specs = []
    for s in root.findall("specification"):
        sampled = {}
        for v in s.findall("value"):
            sampled[_required(v, "characteristic")] = SampledValue(
                value=_number(v, "value", required=False), key=v.get("key"))
        specs.append(SceneElementSpecification(_required(s, "entity"), sampled))
    draws = root.get("draws")
    try:
        seed = int(_required(root, "seed"))
    except ValueError:
        raise OntologyParseError("snapshot seed is not an integer") from None
    return OntologySnapshot(
        example_id=_required(root, "example_id"),
        specifications=tuple(specs),
        rng_seed=seed,
        draws=int(draws) if draws is not None else None,
        algorithm=root.get("algorithm", "pcg64"),
    )
