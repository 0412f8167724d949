"""Command-line entry point.

Exit codes: 0 success, 1 domain failure (invalid ontology, failed build,
frame mismatch), 2 usage or I/O failure. Every subcommand accepts ``--json``
for machine-readable output on stdout. All randomness flows from ``--seed``
(default 7, never time-based).
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Optional, Sequence

from .dataset import BuildError, build_dataset, get_recipe, load_recipe
from .dataset.recipes import DEFAULT_SEED
from .evaluation import (
    AnchorConfig,
    EvalConfig,
    FrameMismatchError,
    anchor_scales,
    evaluate,
    format_report,
    ontology_target_sizes,
    table1_fixture,
)
from .evaluation.fixtures import MODELS
from .ontology import (
    OntologyError,
    load_default_ontology,
    load_ontology,
    validate_ontology,
)
from .templates import make_fixtures

EXIT_OK, EXIT_DOMAIN, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _emit(args, payload: dict, text: str) -> None:
    if args.json:
        print(json.dumps(payload, indent=2, sort_keys=True))
    elif text:
        print(text)


def _read_ontology(path: Optional[str]):
    if path is None:
        return load_default_ontology()
    if not Path(path).is_file():
        raise UsageError(f"ontology file not found: {path}")
    return load_ontology(path)


def _read_json(path: str) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from exc
    except json.JSONDecodeError as exc:
        raise UsageError(f"{path} is not valid JSON: {exc}") from exc


# -- subcommands -------------------------------------------------------------

def cmd_validate(args) -> int:
    try:
        o = _read_ontology(args.ontology)
    except OntologyError as exc:
        print(f"error: {exc}", file=sys.stderr)
        _emit(args, {"valid": False, "diagnostics": [str(exc)]}, "")
        return EXIT_DOMAIN
    diags = validate_ontology(o)
    for d in diags:
        print(str(d), file=sys.stderr)
    _emit(args, {"valid": not diags, "diagnostics": [str(d) for d in diags]},
          "ok" if not diags else f"{len(diags)} diagnostic(s)")
    return EXIT_OK if not diags else EXIT_DOMAIN


def _recipe(args):
    # Precedence: flags > recipe file > built-in defaults.
    if args.recipe_file:
        try:
            recipe = load_recipe(args.recipe_file)
        except OSError as exc:
            raise UsageError(f"cannot read recipe {args.recipe_file}: {exc.strerror}") from exc
        except (KeyError, ValueError) as exc:
            raise UsageError(f"bad recipe file {args.recipe_file}: {exc}") from exc
    else:
        try:
            recipe = get_recipe(args.recipe)
        except KeyError as exc:
            raise UsageError(str(exc.args[0])) from exc
    if args.total is not None and args.total < 0:
        raise UsageError("--total must be non-negative")
    return recipe.with_overrides(total_examples=args.total, seed=args.seed)


def cmd_generate(args) -> int:
    recipe = _recipe(args)
    if args.dry_run:
        _emit(args, {"recipe": recipe.to_json()},
              f"{recipe.name}: {recipe.total_examples} examples {recipe.class_counts()}")
        return EXIT_OK
    if not args.out:
        raise UsageError("--out is required unless --dry-run is given")
    if args.workers < 1:
        raise UsageError("--workers must be at least 1")
    o = _read_ontology(args.ontology)
    if validate_ontology(o):
        print("error: ontology has diagnostics; run validate-ontology", file=sys.stderr)
        return EXIT_DOMAIN
    try:
        manifest = build_dataset(recipe, o, args.templates, args.out, args.workers, args.rescale)
    except BuildError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except KeyboardInterrupt:
        print("interrupted; partial manifest marked incomplete", file=sys.stderr)
        return EXIT_DOMAIN
    counts = manifest["class_counts"]
    summary = {"out": str(args.out), "total": manifest["total"], "class_counts": counts,
               "failures": len(manifest["failures"])}
    _emit(args, summary, f"wrote {manifest['total']} examples to {args.out} "
          + " ".join(f"{k}={v}" for k, v in sorted(counts.items())))
    return EXIT_OK


def cmd_evaluate(args) -> int:
    pred, gt = _read_json(args.pred), _read_json(args.gt)
    try:
        config = EvalConfig.for_reading(args.nms_reading, score_threshold=args.score_threshold,
                                        nms_iou=args.nms_iou, merge_iou=args.merge_iou,
                                        match_iou=args.match_iou)
        report = evaluate(pred, gt, config)
    except FrameMismatchError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except (KeyError, TypeError, ValueError) as exc:
        raise UsageError(f"malformed evaluation input: {exc}") from exc
    text = format_report(report)
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / "report.json").write_text(json.dumps(report.to_json(), indent=2) + "\n", encoding="utf-8")
        (out / "report.txt").write_text(text, encoding="utf-8")
    _emit(args, report.to_json(), text.rstrip("\n"))
    return EXIT_OK


def _scale_text(v: float) -> str:
    return f"{v:g}"


def cmd_anchors(args) -> int:
    try:
        cfg = AnchorConfig(tuple(args.model_input), tuple(args.image_size), args.stride,
                           tuple(args.base_anchor))
        if args.from_ontology:
            sizes = ontology_target_sizes(_read_ontology(args.ontology), args.quantum)
        else:
            sizes = args.sizes
        scales = anchor_scales(cfg, sizes)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    _emit(args, {"sizes": list(sizes), "scales": scales}, " ".join(_scale_text(s) for s in scales))
    return EXIT_OK


def cmd_make_fixtures(args) -> int:
    out = Path(args.out)
    written: dict = {}
    if args.kind in ("templates", "all"):
        idx = make_fixtures(out / "templates" if args.kind == "all" else out, seed=args.seed,
                            tile_px=args.tile_px, per_class=args.per_class)
        written["templates"] = len(idx.tiles)
    if args.kind in ("eval", "all"):
        eval_dir = out / "eval" if args.kind == "all" else out
        eval_dir.mkdir(parents=True, exist_ok=True)
        for model in MODELS:
            pred, gt = table1_fixture(model)
            (eval_dir / f"{model}.pred.geojson").write_text(json.dumps(pred) + "\n", encoding="utf-8")
            (eval_dir / f"{model}.gt.geojson").write_text(json.dumps(gt) + "\n", encoding="utf-8")
        written["eval_models"] = sorted(MODELS)
    _emit(args, {"out": str(out), **written}, f"fixtures written to {out}")
    return EXIT_OK


# -- parser ------------------------------------------------------------------

def _positive(kind):
    def parse(text: str):
        try:
            v = kind(text)
        except ValueError:
            raise argparse.ArgumentTypeError(f"{text!r} is not a number")
        if not v > 0:
            raise argparse.ArgumentTypeError(f"{text!r} must be positive")
        return v
    return parse


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", help="machine-readable output")
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="eosynth", description="Synthetic EO training data for wind farm detection.")
    sub = p.add_subparsers(dest="command", required=True)

    v = sub.add_parser("validate-ontology", parents=[common], help="check an ontology file")
    v.add_argument("ontology", nargs="?", help="ontology XML (default: the shipped one)")
    v.set_defaults(func=cmd_validate)

    g = sub.add_parser("generate", parents=[common], help="build a dataset")
    src = g.add_mutually_exclusive_group()
    src.add_argument("--recipe", default="dataset-3", help="built-in recipe name")
    src.add_argument("--recipe-file", help="recipe JSON")
    g.add_argument("--ontology", help="ontology XML (default: the shipped one)")
    g.add_argument("--total", type=int, help="override the example count")
    g.add_argument("--seed", type=int, default=DEFAULT_SEED, help=f"master seed (default {DEFAULT_SEED})")
    g.add_argument("--workers", type=int, default=1)
    g.add_argument("--out", help="output directory")
    g.add_argument("--templates", help="template store root (default: $EOSYNTH_TEMPLATES or built-in tiles)")
    g.add_argument("--rescale", action="store_true", help="export at the recipe's training scale")
    g.add_argument("--dry-run", action="store_true", help="print the resolved recipe and exit")
    g.set_defaults(func=cmd_generate)

    e = sub.add_parser("evaluate", parents=[common], help="score predictions against ground truth")
    e.add_argument("--pred", required=True)
    e.add_argument("--gt", required=True)
    e.add_argument("--out", help="directory for report.json and report.txt")
    e.add_argument("--nms-reading", choices=("score", "overlap"), default="score",
                   help="whether 0.8 is a score filter or the NMS overlap")
    e.add_argument("--score-threshold", type=float)
    e.add_argument("--nms-iou", type=float)
    e.add_argument("--merge-iou", type=float)
    e.add_argument("--match-iou", type=float)
    e.set_defaults(func=cmd_evaluate)

    a = sub.add_parser("anchors", parents=[common], help="anchor scale factors per target size")
    a.add_argument("--model-input", type=_positive(float), nargs=2, default=[1024, 1024], metavar=("H", "W"))
    a.add_argument("--image-size", type=_positive(float), nargs=2, default=[2048, 2048], metavar=("H", "W"))
    a.add_argument("--stride", type=_positive(float), default=16)
    a.add_argument("--base-anchor", type=_positive(float), nargs=2, default=[4, 4], metavar=("H", "W"))
    a.add_argument("--sizes", type=_positive(float), nargs="+", default=[128, 256, 512, 1024, 1792])
    a.add_argument("--from-ontology", action="store_true", help="take sizes from the ontology")
    a.add_argument("--ontology", help="ontology XML (default: the shipped one)")
    a.add_argument("--quantum", type=_positive(int), default=128, help="pixel rounding for ontology sizes")
    a.set_defaults(func=cmd_anchors)

    f = sub.add_parser("make-fixtures", parents=[common], help="write stand-in templates and eval fixtures")
    f.add_argument("--out", required=True)
    f.add_argument("--kind", choices=("templates", "eval", "all"), default="all")
    f.add_argument("--seed", type=int, default=0)
    f.add_argument("--tile-px", type=_positive(int), default=2304)
    f.add_argument("--per-class", type=_positive(int), default=2)
    f.set_defaults(func=cmd_make_fixtures)
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OntologyError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
