"""Recipes, annotations and the dataset build loop."""
from __future__ import annotations

from .annotation import (
    LABEL,
    AnnotationDoc,
    Box,
    derive_annotation,
    export_annotation,
    parse_annotation,
    rescale_boxes,
    rescale_for_training,
    rescale_image,
    turbine_box,
)
from .builder import (
    BuildError,
    TrainingExample,
    build_dataset,
    example_id,
    generate_example,
    regenerate_from_snapshot,
    render_example,
    shard_manifest,
    slot_classes,
    tree_hash,
    write_example,
)
from .recipes import DatasetRecipe, builtin_recipes, class_counts, get_recipe, load_recipe
