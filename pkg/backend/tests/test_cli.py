"""Tests de la CLI scripts/cpoly.py (codes de sortie et fichiers produits)."""
import importlib.util
import json
import re
from pathlib import Path

import pytest

from backend.models import load_scene

_SCRIPT = Path(__file__).resolve().parents[2] / "scripts" / "cpoly.py"
_spec = importlib.util.spec_from_file_location("cpoly", _SCRIPT)
cpoly = importlib.util.module_from_spec(_spec)
_spec.loader.exec_module(cpoly)


def test_verify_exit_codes(scene_path, capsys):
    """Test: 0 pour une scène propre, 2 pour une scène non réduite."""
    assert cpoly.main(["verify", str(scene_path("reuleaux"))]) == 0
    assert "proper" in capsys.readouterr().out
    assert cpoly.main(["verify", str(scene_path("not_reduced")), "--json"]) == 2
    assert json.loads(capsys.readouterr().out)["status"] == "not_reduced"


def test_structure_json(scene_path, capsys):
    assert cpoly.main(["structure", str(scene_path("lens")), "--json"]) == 0
    data = json.loads(capsys.readouterr().out)
    assert data["bound"]["total"] == 2


def test_structure_errors(scene_path, tmp_path):
    """Test: scène vide → 2, disques tangents → 3, fichier absent → 2."""
    assert cpoly.main(["structure", str(scene_path("disjoint"))]) == 2
    tangent = tmp_path / "tangent.json"
    tangent.write_text(
        json.dumps({"domain": {"kind": "disk"}, "homothets": [{"cx": 0, "cy": 0}, {"cx": 2, "cy": 0}]}),
        encoding="utf-8",
    )
    assert cpoly.main(["structure", str(tangent)]) == 3
    assert cpoly.main(["structure", str(tmp_path / "missing.json")]) == 2


def test_construct_writes_scene(tmp_path):
    out = tmp_path / "scene.json"
    assert cpoly.main(["construct", "sharp-upper", "--n", "2", "-o", str(out)]) == 0
    schema = load_scene(out)
    assert len(schema.homothets) == 2
    assert cpoly.main(["verify", str(out)]) == 0


def test_construct_rejects_unknown_kind():
    with pytest.raises(SystemExit):
        cpoly.main(["construct", "spiral"])


def test_experiment_writes_reports(tmp_path, capsys):
    out = tmp_path / "report.csv"
    code = cpoly.main(
        ["experiment", "--random-kind", "ellipse", "--translative", "--n", "2", "--trials", "2",
         "--seed", "4", "--no-oracle", "--out", str(out), "--json"]
    )
    assert code == 0
    summary = json.loads(capsys.readouterr().out)
    assert summary["histogram"] == {"2": 2}
    assert out.read_text(encoding="utf-8").startswith("trial,digest,")
    assert (tmp_path / "report.summary.json").exists()


def test_experiment_from_config(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"domain": {"kind": "disk"}, "n": 3, "trials": 1, "oracle": False}), encoding="utf-8")
    assert cpoly.main(["experiment", "--config", str(cfg), "--seed", "2"]) == 0


def test_render_writes_svg(scene_path, tmp_path):
    out = tmp_path / "fig.svg"
    assert cpoly.main(["render", str(scene_path("reuleaux")), "-o", str(out), "--gaps", "--edge-colors"]) == 0
    assert "<svg" in out.read_text(encoding="utf-8")


def test_usage_paths_exist():
    """Les chemins de corpus cités dans l'aide de la CLI existent dans le dépôt."""
    root = _SCRIPT.parents[1]
    paths = re.findall(r"backend/data/\S+\.json", cpoly.__doc__)
    assert paths
    for path in paths:
        assert (root / path).is_file(), path


def test_experiment_pair_suite(capsys):
    code = cpoly.main(
        ["experiment", "--random-kind", "ellipse", "--n", "2", "--trials", "5", "--seed", "7",
         "--no-oracle", "--pair-suite", "--json"]
    )
    assert code == 0
    data = json.loads(capsys.readouterr().out)
    assert data["pairs"] == data["two"] == 5
    assert data["violations"] == []


def test_experiment_notch_fraction(capsys):
    code = cpoly.main(
        ["experiment", "--random-kind", "disk", "--n", "3", "--trials", "2", "--seed", "5",
         "--no-oracle", "--notch-fraction", "1.0", "--json"]
    )
    assert code == 0
    assert json.loads(capsys.readouterr().out)["bound_violations"] == 0
