"""End-to-end dataset production: sample, compose, render, annotate, export."""
from __future__ import annotations

import json
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Optional

import numpy as np

from ..composer import (
    GenerationError,
    SceneComposition,
    check_topology,
    compose_scene,
    scene_context,
)
from ..ontology import (
    Ontology,
    OntologySnapshot,
    parse_ontology,
    snapshot_to_xml,
    write_ontology,
)
from ..rng import Stream, derive_seed, splitmix64, stable_hash
from ..templates import TemplateStore, default_store
from ..texture import plan_from_composition, render_scene, save_png
from .annotation import AnnotationDoc, Box, derive_annotation, export_annotation, rescale_for_training
from .recipes import DatasetRecipe, class_counts

log = logging.getLogger(__name__)

RETRIES = 10
MAX_FAILURE_RATE = 0.01
CONTEXT_KEYS = ("composition", "coast", "texture_source", "turbine_variants")


class BuildError(RuntimeError):
    pass


@dataclass(eq=False)
class TrainingExample:
    example_id: str
    composition_class: str
    image: np.ndarray
    boxes: list[Box]
    snapshot: OntologySnapshot
    composition: SceneComposition
    attempts: int = 1

    def annotation_doc(self) -> AnnotationDoc:
        h, w = self.image.shape
        return AnnotationDoc(f"{self.example_id}.png", w, h, 1, tuple(self.boxes))


def example_id(index: int, total: int) -> str:
    return str(index).zfill(max(6, len(str(max(total - 1, 0)))))


def slot_classes(recipe: DatasetRecipe) -> list[str]:
    """Composition class of every example slot, shuffled by the recipe seed."""
    counts = class_counts(recipe.class_mix, recipe.total_examples)
    slots = [cls for cls in recipe.class_mix for _ in range(counts[cls])]
    order = Stream(recipe.seed).permutation(len(slots))
    return [slots[i] for i in order]


def render_example(o: Ontology, store: Optional[TemplateStore], context: dict, seed: int,
                   eid: str) -> TrainingExample:
    """One attempt: everything downstream of the seed and the forced keys."""
    rng = Stream(seed)
    comp = compose_scene(o, context, rng)
    violations = check_topology(comp)
    if violations:
        raise GenerationError(f"composition violates {violations[0]}")
    image = render_scene(comp, plan_from_composition(comp), store, rng)
    boxes = derive_annotation(comp)
    snap = OntologySnapshot(eid, comp.specs, seed, rng.draws)
    return TrainingExample(eid, context["Scene.composition"], image, boxes, snap, comp)


def generate_example(o: Ontology, store: Optional[TemplateStore], recipe: DatasetRecipe,
                     index: int, composition_class: str) -> TrainingExample:
    eid = example_id(index, recipe.total_examples)
    ctx = scene_context(composition_class, coast=recipe.coast_enabled,
                        template_sea=recipe.template_sea_enabled, tidal=recipe.tidal_turbine_enabled)
    last: Optional[Exception] = None
    for attempt in range(RETRIES):
        seed = derive_seed(recipe.seed, index, attempt)
        try:
            ex = render_example(o, store, ctx, seed, eid)
        except GenerationError as exc:
            log.info("example %s attempt %d failed: %s", eid, attempt, exc)
            last = exc
            continue
        ex.attempts = attempt + 1
        return ex
    raise GenerationError(f"example {eid} failed {RETRIES} attempts: {last}")


def regenerate_from_snapshot(snapshot: OntologySnapshot, o: Ontology,
                             store: Optional[TemplateStore]) -> TrainingExample:
    """Rebuild an example from its snapshot's seed and Scene keys."""
    scene = snapshot.spec("Scene")
    ctx = {f"Scene.{k}": scene.key(k) for k in CONTEXT_KEYS}
    ex = render_example(o, store, ctx, snapshot.rng_seed, snapshot.example_id)
    if ex.snapshot.specifications != snapshot.specifications:
        raise GenerationError("replayed specifications differ from the snapshot; was the ontology changed?")
    return ex


def write_example(ex: TrainingExample, out: Path, rescale_to: Optional[int] = None) -> None:
    image, boxes = ex.image, ex.boxes
    if rescale_to:
        image, boxes = rescale_for_training(image, rescale_to, boxes)
    h, w = image.shape
    doc = AnnotationDoc(f"{ex.example_id}.png", w, h, 1, tuple(boxes))
    save_png(image, out / "images" / f"{ex.example_id}.png")
    (out / "annotations" / f"{ex.example_id}.xml").write_text(export_annotation(doc), encoding="utf-8")
    (out / "snapshots" / f"{ex.example_id}.snapshot.xml").write_text(snapshot_to_xml(ex.snapshot), encoding="utf-8")


# -- worker plumbing --------------------------------------------------------

_WORKER: dict = {}


def _init_worker(ontology_text: str, template_root: Optional[str], out: str,
                 recipe_json: dict, rescale: bool) -> None:
    _WORKER["ontology"] = parse_ontology(ontology_text)
    _WORKER["store"] = default_store(template_root)
    _WORKER["out"] = Path(out)
    _WORKER["recipe"] = DatasetRecipe.from_json(recipe_json)
    _WORKER["rescale"] = rescale


def _work(job: tuple[int, str]) -> dict:
    index, cls = job
    recipe = _WORKER["recipe"]
    try:
        ex = generate_example(_WORKER["ontology"], _WORKER["store"], recipe, index, cls)
    except GenerationError as exc:
        return {"index": index, "id": example_id(index, recipe.total_examples), "class": cls,
                "error": str(exc)}
    write_example(ex, _WORKER["out"], recipe.export_scale if _WORKER["rescale"] else None)
    return {"index": index, "id": ex.example_id, "class": cls, "seed": ex.snapshot.rng_seed,
            "attempts": ex.attempts, "boxes": len(ex.boxes)}


def shard_manifest(ids: list[str], recipe: DatasetRecipe) -> list[dict]:
    """Seeded uniform validation draw, then hash-sharded training examples."""
    n_val = math.floor(recipe.val_fraction * len(ids) + Fraction(1, 2))
    perm = Stream(splitmix64(recipe.seed ^ 0x5A1D)).permutation(len(ids))
    val = sorted(ids[i] for i in perm[:n_val])
    val_set = set(val)
    shards = [{"shard_id": f"train-{k:02d}", "role": "train", "example_ids": []}
              for k in range(recipe.train_shards)]
    for eid in ids:
        if eid not in val_set:
            shards[stable_hash(eid) % recipe.train_shards]["example_ids"].append(eid)
    shards.append({"shard_id": "val-00", "role": "val", "example_ids": val})
    return shards


def build_dataset(recipe: DatasetRecipe, ontology: Ontology, template_root=None, out=".",
                  workers: int = 1, rescale: bool = False) -> dict:
    """Write the dataset tree under ``out`` and return the manifest.

    ``template_root`` is a template directory; ``None`` falls back to the
    environment variable or the in-memory stand-in tiles. Outputs do not
    depend on ``workers``.
    """
    out = Path(out)
    for sub in ("images", "annotations", "snapshots"):
        (out / sub).mkdir(parents=True, exist_ok=True)
    jobs = list(enumerate(slot_classes(recipe)))
    init = (write_ontology(ontology), str(template_root) if template_root else None,
            str(out), recipe.to_json(), rescale)

    results: list[dict] = []
    complete = False
    try:
        if workers <= 1:
            _init_worker(*init)
            results = [_work(j) for j in jobs]
        else:
            with ProcessPoolExecutor(max_workers=workers, initializer=_init_worker, initargs=init) as pool:
                results = list(pool.map(_work, jobs, chunksize=max(1, len(jobs) // (workers * 8))))
        complete = True
    finally:
        manifest = _manifest(recipe, results, complete, rescale)
        (out / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n",
                                           encoding="utf-8")

    failures = manifest["failures"]
    if recipe.total_examples and len(failures) > MAX_FAILURE_RATE * recipe.total_examples:
        raise BuildError(f"{len(failures)} of {recipe.total_examples} examples failed")
    return manifest


def _manifest(recipe: DatasetRecipe, results: list[dict], complete: bool, rescale: bool) -> dict:
    results = sorted(results, key=lambda r: r["index"])
    ok = [r for r in results if "error" not in r]
    failures = [{"id": r["id"], "class": r["class"], "error": r["error"]} for r in results if "error" in r]
    counts: dict[str, int] = {}
    for r in ok:
        counts[r["class"]] = counts.get(r["class"], 0) + 1
    ids = [r["id"] for r in ok]
    return {
        "complete": complete,
        "recipe": recipe.to_json(),
        "image_size": recipe.export_scale if rescale else None,
        "total": len(ok),
        "class_counts": counts,
        "examples": [{k: r[k] for k in ("id", "class", "seed", "attempts", "boxes")} for r in ok],
        "failures": failures,
        "split": {"train": str(1 - recipe.val_fraction), "val": str(recipe.val_fraction)},
        "shards": shard_manifest(ids, recipe) if complete else [],
    }


def tree_hash(root) -> str:
    """sha256 over relative paths and bytes of every file under ``root``."""
    import hashlib

    h = hashlib.sha256()
    root = Path(root)
    for path in sorted(p for p in root.rglob("*") if p.is_file()):
        h.update(path.relative_to(root).as_posix().encode())
        h.update(b"\0")
        h.update(path.read_bytes())
    return h.hexdigest()
