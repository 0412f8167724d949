"""Discrete scene composition: partition, wind farms, rig fields, topology."""
from __future__ import annotations

from .compose import COMPOSITION_CLASSES, compose_scene, scene_context
from .elements import (
    NONE_TARGET,
    TARGET,
    GenerationError,
    Geometry,
    PlacementError,
    ResampleSignal,
    SceneComposition,
    SceneElement,
)
from .layout import (
    DEFORMATIONS,
    BoundaryPolygon,
    Deformation,
    GridLayout,
    apply_deformation,
    clip_layout,
    deformation_from_spec,
    generate_boundary_polygon,
    generate_grid_layout,
    grid_layout,
    renormalize,
    sample_deformation,
    transform_points,
)
from .partition import PartitionError, partition_from_geojson, procedural_partition
from .rigs import generate_rig_field, noise_shapes, retain_rigs
from .topology import Violation, check_relations, check_topology, relation_holds
from .windfarm import generate_windfarm
