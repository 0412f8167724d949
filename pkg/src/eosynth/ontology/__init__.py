"""Machine-readable expert knowledge: parse, validate, sample, snapshot."""
from __future__ import annotations

from importlib import resources

from .model import (
    CHOICE_SET,
    CONSTANT,
    DISCRETE_UNIFORM_RANGE,
    MUST_BE_COINCIDENT_WITH,
    MUST_BE_INSIDE,
    MUST_BE_WITHIN_DISTANCE,
    MUST_NOT_OVERLAP,
    TEMPLATE_QUERY,
    UNIFORM_RANGE,
    Characteristic,
    ChoiceItem,
    ContextCycleError,
    ContextLink,
    Dimension,
    Entity,
    Ontology,
    OntologyError,
    OntologyParseError,
    OntologySnapshot,
    OntologyValidationError,
    SampledValue,
    SceneElementSpecification,
    SceneExtentConfig,
    TopologyRelation,
    UnresolvedContextError,
)
from .sampling import (
    draw_value,
    resolve_dimension,
    sample_entities,
    sample_specification,
    specification_within,
)
from .validation import Diagnostic, find_context_cycles, resolution_order, validate_ontology
from .xmlio import parse_ontology, parse_snapshot, snapshot_to_xml, write_ontology, write_snapshot


def default_ontology_text() -> str:
    return resources.files("eosynth").joinpath("data/windfarm_ontology.xml").read_text(encoding="utf-8")


def load_default_ontology() -> Ontology:
    """The shipped offshore wind farm ontology."""
    return parse_ontology(default_ontology_text())


def load_ontology(path) -> Ontology:
    with open(path, encoding="utf-8") as fh:
        return parse_ontology(fh.read())
