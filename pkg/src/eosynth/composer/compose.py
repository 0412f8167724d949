from __future__ import annotations

from typing import Mapping, Optional

from ..ontology import Ontology, SceneExtentConfig, sample_entities
from ..rng import Stream
from .elements import SceneComposition
from .partition import procedural_partition
from .rigs import generate_rig_field
from .windfarm import generate_windfarm

COMPOSITION_CLASSES = ("owf-small", "owf-medium", "owf-large", "none-target-rigs", "none-target-land")
PARTITION_ENTITIES = ("Scene", "Sea", "Land", "Coast")


def scene_context(composition_class: str, *, coast: bool = False, template_sea: bool = False,
                  tidal: bool = False) -> dict[str, str]:
    """Forced Scene keys for one example; everything else is sampled."""
    if composition_class not in COMPOSITION_CLASSES:
        raise ValueError(f"unknown composition class {composition_class!r}")
    return {
        "Scene.composition": composition_class,
        "Scene.coast": "present" if coast else "absent",
        "Scene.texture_source": "template" if template_sea else "constant",
        "Scene.turbine_variants": "tidal" if tidal else "standard",
    }


def compose_scene(o: Ontology, context: Mapping[str, str], rng: Stream,
                  extent: Optional[SceneExtentConfig] = None) -> SceneComposition:
    """Partition, then the class-specific scene element.

    ``context`` carries the forced Scene keys (see :func:`scene_context`).
    """
    extent = extent or o.scene or SceneExtentConfig()
    ctx = dict(context)
    specs = sample_entities(o, PARTITION_ENTITIES, ctx, rng)
    by_name = {s.entity: s for s in specs}
    scene, land, coast = by_name["Scene"], by_name["Land"], by_name["Coast"]

    has_land = land.key("presence") == "present"
    has_coast = has_land and scene.key("coast") == "present"
    elements = procedural_partition(
        extent, rng,
        land=has_land,
        coast_width=coast.value("band_width") if has_coast else None,
        coverage=land.value("coverage"),
        side=land.key("side"),
        roughness=land.value("roughness"),
        wavelength=land.value("wavelength"),
        specs=by_name,
    )
    # Coast values are always drawn to keep the stream layout fixed, but only
    # recorded when a coast element exists.
    if not has_coast:
        specs = [s for s in specs if s.entity != "Coast"]
    comp = SceneComposition(extent, elements, rng.seed, tuple(specs),
                            scene.key("composition"), tuple(o.relations()))

    cls = scene.key("composition")
    extra = None
    if cls.startswith("owf-"):
        extra = generate_windfarm(o, comp, rng, ctx)
    elif cls == "none-target-rigs":
        extra = generate_rig_field(o, comp, rng, ctx)
    if extra is not None:
        comp.elements.append(extra)
        comp.specs = comp.specs + extra.specs
    return comp
