from __future__ import annotations

import json
import subprocess
import sys

import pytest

from eosynth.cli import EXIT_DOMAIN, EXIT_OK, EXIT_USAGE, main
from eosynth.dataset import tree_hash
from eosynth.ontology import load_default_ontology, write_ontology


def run(capsys, *argv):
    rc = main(list(argv))
    out, err = capsys.readouterr()
    return rc, out, err


def test_anchors_default(capsys):
    rc, out, _ = run(capsys, "anchors")
    assert rc == EXIT_OK and out.strip() == "0.25 0.5 1 2 3.5"


def test_anchors_json_and_ontology(capsys):
    rc, out, _ = run(capsys, "anchors", "--json", "--model-input", "1024", "1024", "--image-size", "2048", "2048",
                     "--stride", "16", "--base-anchor", "4", "4", "--sizes", "128", "256", "512", "1024", "1792")
    assert rc == EXIT_OK and json.loads(out)["scales"] == [0.25, 0.5, 1.0, 2.0, 3.5]
    rc, out, _ = run(capsys, "anchors", "--from-ontology", "--json")
    doc = json.loads(out)
    assert rc == EXIT_OK and len(doc["sizes"]) == len(doc["scales"]) > 0


@pytest.mark.parametrize("argv", [["anchors", "--stride", "0"], ["anchors", "--sizes", "-3"],
                                  ["anchors", "--stride", "x"], ["frobnicate"], []])
def test_usage_errors(capsys, argv):
    with pytest.raises(SystemExit) as exc:
        main(argv)
    assert exc.value.code == EXIT_USAGE
    capsys.readouterr()


def test_validate_ontology(capsys, tmp_path):
    rc, out, _ = run(capsys, "validate-ontology")
    assert rc == EXIT_OK and out.strip() == "ok"
    rc, _, err = run(capsys, "validate-ontology", str(tmp_path / "missing.xml"))
    assert rc == EXIT_USAGE and "not found" in err
    bad = tmp_path / "bad.xml"
    bad.write_text("<ontology><entity name='A'>")
    rc, out, err = run(capsys, "validate-ontology", "--json", str(bad))
    assert rc == EXIT_DOMAIN and json.loads(out)["valid"] is False and err
    dangling = tmp_path / "dangling.xml"
    dangling.write_text(write_ontology(load_default_ontology()).replace('object="Coast"', 'object="Ghost"', 1))
    rc, _, err = run(capsys, "validate-ontology", str(dangling))
    assert rc == EXIT_DOMAIN and "Ghost" in err


def test_generate_dry_run(capsys):
    rc, out, _ = run(capsys, "generate", "--recipe", "dataset-3", "--total", "60", "--dry-run", "--json")
    doc = json.loads(out)["recipe"]
    assert rc == EXIT_OK and doc["seed"] == 7
    assert doc["class_counts"] == {"owf-small": 10, "owf-medium": 20, "owf-large": 10,
                                   "none-target-rigs": 10, "none-target-land": 10}


def test_generate_recipe_file_and_precedence(capsys, tmp_path):
    rc, out, _ = run(capsys, "generate", "--recipe", "dataset-2", "--dry-run", "--json")
    recipe = json.loads(out)["recipe"]
    recipe["total_examples"] = 8
    path = tmp_path / "r.json"
    path.write_text(json.dumps(recipe))
    rc, out, _ = run(capsys, "generate", "--recipe-file", str(path), "--dry-run", "--json")
    assert rc == EXIT_OK and json.loads(out)["recipe"]["total_examples"] == 8
    rc, out, _ = run(capsys, "generate", "--recipe-file", str(path), "--total", "4", "--seed", "3",
                     "--dry-run", "--json")
    doc = json.loads(out)["recipe"]
    assert (doc["total_examples"], doc["seed"]) == (4, 3)
    rc, _, err = run(capsys, "generate", "--recipe", "dataset-9", "--dry-run")
    assert rc == EXIT_USAGE and "dataset-9" in err
    rc, _, _ = run(capsys, "generate", "--recipe-file", str(tmp_path / "none.json"), "--dry-run")
    assert rc == EXIT_USAGE
    rc, _, err = run(capsys, "generate", "--total", "2")
    assert rc == EXIT_USAGE and "--out" in err


def test_generate_is_reproducible(capsys, tmp_path):
    hashes = []
    for name in ("a", "b"):
        rc, out, _ = run(capsys, "generate", "--recipe", "dataset-2", "--total", "4", "--out",
                         str(tmp_path / name), "--json")
        assert rc == EXIT_OK and json.loads(out)["total"] == 4
        hashes.append(tree_hash(tmp_path / name))
    assert hashes[0] == hashes[1]
    rc, out, _ = run(capsys, "generate", "--recipe", "dataset-2", "--total", "4", "--seed", "8",
                     "--out", str(tmp_path / "c"))
    assert rc == EXIT_OK and out.startswith("wrote 4 examples")
    assert tree_hash(tmp_path / "c") != hashes[0]


def test_generate_rejects_invalid_ontology(capsys, tmp_path):
    path = tmp_path / "o.xml"
    path.write_text(write_ontology(load_default_ontology()).replace('object="Coast"', 'object="Ghost"', 1))
    rc, _, _ = run(capsys, "generate", "--total", "1", "--ontology", str(path), "--out", str(tmp_path / "out"))
    assert rc == EXIT_DOMAIN


def test_make_fixtures_and_evaluate(capsys, tmp_path):
    rc, out, _ = run(capsys, "make-fixtures", "--out", str(tmp_path), "--kind", "all", "--tile-px", "256",
                     "--per-class", "1", "--json")
    doc = json.loads(out)
    assert rc == EXIT_OK and doc["templates"] == 3 and "model-3" in doc["eval_models"]
    assert (tmp_path / "templates" / "index.json").is_file()

    pred, gt = tmp_path / "eval" / "model-3.pred.geojson", tmp_path / "eval" / "model-3.gt.geojson"
    rc, out, _ = run(capsys, "evaluate", "--pred", str(pred), "--gt", str(gt), "--out", str(tmp_path / "rep"))
    assert rc == EXIT_OK
    combined = [ln for ln in out.splitlines() if ln.startswith("Combined")][0].split()
    assert combined[1:9] == ["67", "61", "11", "6", "0.910", "0.847", "0.878", "0.901"]
    assert (tmp_path / "rep" / "report.txt").read_text().rstrip("\n") == out.rstrip("\n")
    assert json.loads((tmp_path / "rep" / "report.json").read_text())["rows"][0]["tp"] == 61

    rc, out, _ = run(capsys, "evaluate", "--pred", str(pred), "--gt", str(gt), "--json",
                     "--nms-reading", "overlap", "--match-iou", "0.5")
    cfg = json.loads(out)["config"]
    assert rc == EXIT_OK and (cfg["score_threshold"], cfg["nms_iou"], cfg["match_iou"]) == (0.0, 0.8, 0.5)


def test_evaluate_errors(capsys, tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    a.write_text(json.dumps({"type": "FeatureCollection", "frame": "x", "features": []}))
    b.write_text(json.dumps({"type": "FeatureCollection", "frame": "y", "features": []}))
    rc, _, err = run(capsys, "evaluate", "--pred", str(a), "--gt", str(b))
    assert rc == EXIT_DOMAIN and "frame" in err
    c = tmp_path / "c.json"
    c.write_text("{oops")
    assert run(capsys, "evaluate", "--pred", str(c), "--gt", str(b))[0] == EXIT_USAGE
    d = tmp_path / "d.json"
    d.write_text(json.dumps({"frame": "y", "features": [{"properties": {}}]}))
    assert run(capsys, "evaluate", "--pred", str(d), "--gt", str(b))[0] == EXIT_USAGE
    assert run(capsys, "evaluate", "--pred", str(tmp_path / "none.json"), "--gt", str(b))[0] == EXIT_USAGE


def test_console_script_entry():
    proc = subprocess.run([sys.executable, "-m", "eosynth.cli", "anchors"], capture_output=True, text=True)
    assert proc.returncode == 0 and proc.stdout.strip() == "0.25 0.5 1 2 3.5"
