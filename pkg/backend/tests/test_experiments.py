"""Tests du générateur aléatoire, des lots d'essais et du rendu SVG."""
import csv
import logging
from pathlib import Path

import numpy as np
import pytest

from backend.constructions import build_zero_vertex
from backend.domains import Disk, Ellipse, HomothetSpec, place
from backend.errors import ModelViolation
from backend.engine import (
    PairKind,
    check_proper,
    compute_structure,
    exterior_gauss_extent,
    make_mixed_scene,
    make_scene,
    pairwise_boundary_points,
)
from backend.models import ConstructRequest, DiskDomain, ExperimentConfig, load_experiment_config
from backend.services import experiments
from backend.services.experiments import (
    CSV_COLUMNS,
    TrialRecord,
    construct_scene,
    hemisphere_failures,
    hereditary_failures,
    random_scene,
    run_experiment,
    run_pair_suite,
    run_trial,
    spread_gaps,
    summarize,
    trial_rng,
    write_csv,
    write_summary,
)
from backend.services.render import render_svg

CORPUS_DIR = Path(__file__).resolve().parent.parent / "data" / "corpus"


def test_trial_rng_is_counter_based():
    """Test: (seed, essai) identiques → mêmes tirages; essais différents → tirages différents."""
    a = trial_rng(42, 3).uniform(size=4)
    b = trial_rng(42, 3).uniform(size=4)
    c = trial_rng(42, 4).uniform(size=4)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)


def test_random_translative_ellipse_pair():
    cfg = ExperimentConfig(random_kinds=["ellipse"], n=2, translative=True, oracle=False)
    scene, _ = random_scene(cfg, trial_rng(0, 0))
    assert scene.n == 2
    assert scene.translative
    assert check_proper(scene).proper


def test_random_disks_every_body_has_an_edge():
    """Test: 8 disques homothétiques → chaque famille d'arêtes est non vide."""
    cfg = ExperimentConfig(domain=DiskDomain(), n=8, oracle=False)
    scene, _ = random_scene(cfg, trial_rng(11, 0))
    s = compute_structure(scene)
    assert scene.n == 8
    assert all(size >= 1 for size in s.family_sizes)
    assert 8 <= s.total <= 14


def test_random_pairs_cross_twice_and_translates_span_a_hemisphere():
    cfg = ExperimentConfig(random_kinds=["ellipse", "superellipse"], n=2, translative=True, oracle=False)
    for trial in range(5):
        scene, _ = random_scene(cfg, trial_rng(5, trial))
        a, b = scene.bodies
        assert pairwise_boundary_points(a, b).kind is PairKind.TWO
        assert exterior_gauss_extent(a, b) >= np.pi - 1e-7


def test_run_trial_record():
    cfg = ExperimentConfig(random_kinds=["ellipse"], n=3, translative=True, oracle=False)
    record = run_trial(cfg, 0)
    assert record.trial == 0
    assert record.total == 3
    assert record.holds
    assert record.oracle_count is None and record.oracle_match is None
    assert record.lemma_violations == 0
    assert len(record.digest) == 16


def test_run_trial_with_oracle():
    cfg = ExperimentConfig(random_kinds=["ellipse"], n=2, translative=True, seed=3)
    record = run_trial(cfg, 1)
    assert record.oracle_match is True or "oracle_excluded" in record.notes


def test_experiment_summary_and_reports(tmp_path):
    """Test: lot homothétique de disques → bornes respectées, CSV et résumé écrits."""
    cfg = ExperimentConfig(domain=DiskDomain(), n=2, n_max=4, trials=4, seed=9, oracle=False)
    result = run_experiment(cfg)
    assert not result.failed
    assert result.summary["trials"] == 4
    assert result.summary["bound_violations"] == 0
    assert sum(result.summary["histogram"].values()) == 4

    out = tmp_path / "report.csv"
    write_csv(result.records, out)
    with out.open(encoding="utf-8") as f:
        rows = list(csv.reader(f))
    assert rows[0] == CSV_COLUMNS
    assert len(rows) == 5
    assert all(row[CSV_COLUMNS.index("holds")] == "true" for row in rows[1:])

    write_summary(result.summary, tmp_path / "summary.json")
    assert (tmp_path / "summary.json").read_text(encoding="utf-8").endswith("\n")


def test_experiment_is_deterministic(tmp_path):
    """Test: même config et même graine → CSV identiques à l'octet près."""
    cfg = ExperimentConfig(random_kinds=["ellipse", "disk"], n=2, n_max=3, trials=3, seed=21, oracle=False)
    write_csv(run_experiment(cfg).records, tmp_path / "a.csv")
    write_csv(run_experiment(cfg).records, tmp_path / "b.csv")
    assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()


@pytest.mark.slow
def test_workers_do_not_change_results(tmp_path):
    base = dict(random_kinds=["ellipse"], n=2, n_max=4, trials=4, seed=13, oracle=False)
    serial = run_experiment(ExperimentConfig(**base, workers=1)).records
    parallel = run_experiment(ExperimentConfig(**base, workers=2)).records
    assert serial == parallel


def test_experiment_config_validation():
    with pytest.raises(ValueError):
        ExperimentConfig(n=4, n_max=3)
    with pytest.raises(ValueError):
        ExperimentConfig(mixed=True, translative=True)
    with pytest.raises(ValueError):
        ExperimentConfig(trials=0)


def test_construct_scene_kinds():
    scene = construct_scene("sharp-upper", ConstructRequest(n=3))
    assert compute_structure(scene).total == 4
    assert construct_scene("three-circle", ConstructRequest(seed=1)).n == 2
    assert construct_scene("zero-vertex", ConstructRequest(n=2)).n == 2
    with pytest.raises(ValueError):
        construct_scene("unknown", ConstructRequest())


def test_render_is_deterministic(load):
    """Test: même scène → mêmes octets SVG; les lacunes ajoutent des régions ombrées."""
    scene = load("reuleaux")
    s = compute_structure(scene)
    first = render_svg(scene, s)
    assert first.startswith("<?xml")
    assert "<svg" in first
    assert first == render_svg(scene, s)
    assert len(render_svg(scene, s, gaps=True)) > len(first)


def test_render_without_structure():
    """Le rendu d'une scène non strictement convexe ne trace que les corps et H."""
    svg = render_svg(build_zero_vertex(2))
    assert "<svg" in svg


def _lens():
    return make_scene(Disk(), [HomothetSpec((0.0, 0.0), 1.0), HomothetSpec((1.0, 0.0), 1.0)])


def test_four_crossing_draw_is_rejected(monkeypatch):
    """Test: un tirage mixte dont deux corps se croisent 4 fois est rejeté, pas propagé."""
    crossed = make_mixed_scene(
        [
            place(Ellipse(1.0, 0.5), HomothetSpec((0.0, 0.0), 1.0)),
            place(Ellipse(1.0, 0.5, rotation=np.pi / 2), HomothetSpec((0.0, 0.0), 1.0)),
        ]
    )
    with pytest.raises(ModelViolation):
        compute_structure(crossed)
    draws = iter([crossed, _lens()])
    monkeypatch.setattr(experiments, "_draw_scene", lambda *args: next(draws))
    cfg = ExperimentConfig(mixed=True, n=2, oracle=False)
    scene, rejections = random_scene(cfg, trial_rng(0, 0))
    assert rejections == 1
    assert scene.n == 2


def test_mixed_corpus_trials_hold():
    cfg = load_experiment_config(CORPUS_DIR / "mixed_smooth.json").model_copy(update={"oracle": False, "n_max": 4})
    for trial in (0, 5, 8):
        record = run_trial(cfg, trial)
        assert record.holds
        assert record.lemma_violations == 0, record.notes


def test_notched_disks_give_the_upper_count():
    """Test: 4 disques en entailles → le corps 0 porte 3 arêtes, total 2(n-1) = 6."""
    cfg = ExperimentConfig(domain=DiskDomain(), n=4, notch_fraction=1.0, oracle=False)
    scene, _ = random_scene(cfg, trial_rng(4, 0))
    s = compute_structure(scene)
    assert scene.regime == "homothetic"
    assert s.total == 6
    assert s.family_sizes[0] == 3


def test_notches_need_homothets():
    with pytest.raises(ValueError):
        ExperimentConfig(translative=True, notch_fraction=0.5)
    with pytest.raises(ValueError):
        ExperimentConfig(notch_scale_range=(0.8, 2.0))


def _record(n: int, total: int) -> TrialRecord:
    return TrialRecord(
        trial=0, digest="0" * 16, n=n, m=0, pairwise_count=total, inherited_count=0, total=total,
        lower=n, upper=2 * (n - 1), holds=True, oracle_count=None, oracle_match=None,
        lemma_violations=0, singleton_family=0, rejections=0,
    )


def test_spread_gaps_and_summary():
    records = [_record(2, 2), _record(3, 3), _record(3, 4), _record(4, 5), _record(4, 6)]
    assert spread_gaps(records) == {"n_without_lower": [4], "n_without_excess": []}
    records.append(_record(5, 5))
    gaps = spread_gaps(records)
    assert gaps["n_without_excess"] == [5]
    assert summarize(records)["spread_violations"] == 0
    summary = summarize(records, require_spread=True)
    assert summary["spread_violations"] == 2
    assert experiments.ExperimentResult(records, summary).failed


def test_structural_checks_on_known_scenes(load):
    assert hereditary_failures(load("reuleaux")) == []
    assert hereditary_failures(load("lens")) == []
    assert hemisphere_failures(load("lens")) == []
    assert hemisphere_failures(load("reuleaux")) == []


def test_run_trial_records_structural_checks():
    cfg = ExperimentConfig(domain=DiskDomain(), n=3, n_max=4, notch_fraction=0.5, oracle=False)
    record = run_trial(cfg, 2)
    assert record.inherited_capped
    assert record.hereditary_failures == 0
    assert record.hemisphere_failures == 0
    assert "hereditary" not in record.notes


def test_pair_suite_small():
    cfg = ExperimentConfig(random_kinds=["disk", "ellipse", "superellipse"], n=2, trials=25, seed=7)
    result = run_pair_suite(cfg)
    assert result.pairs == 25
    assert result.two == 25
    assert not result.failed


def test_pair_suite_refuses_mixed():
    with pytest.raises(ValueError):
        run_pair_suite(ExperimentConfig(mixed=True, n=2, trials=2))


def test_experiment_logs_outcome(caplog):
    caplog.set_level(logging.INFO, logger="backend.services.experiments")
    run_experiment(ExperimentConfig(domain=DiskDomain(), n=2, trials=2, seed=1, oracle=False))
    messages = [r.getMessage() for r in caplog.records]
    assert any(m.startswith("🧪 experiment: 2 trials") for m in messages)
    assert any(m.startswith("✅ experiment passed") for m in messages)


@pytest.mark.slow
def test_mixed_corpus_has_no_violations():
    cfg = load_experiment_config(CORPUS_DIR / "mixed_smooth.json").model_copy(update={"oracle": False})
    result = run_experiment(cfg)
    assert result.summary["bound_violations"] == 0
    assert result.summary["lemma_violations"] == 0


@pytest.mark.slow
def test_homothetic_corpus_spreads_over_both_bounds():
    """Test: chaque n atteint n, et chaque n ≥ 3 dépasse n au moins une fois."""
    cfg = load_experiment_config(CORPUS_DIR / "homothetic_smooth.json").model_copy(
        update={"oracle": False, "check_lemmas": False}
    )
    result = run_experiment(cfg)
    assert result.summary["spread"] == {"n_without_lower": [], "n_without_excess": []}
    assert not result.failed


@pytest.mark.slow
def test_pair_corpus_crosses_twice():
    result = run_pair_suite(load_experiment_config(CORPUS_DIR / "pair_crossings.json"))
    assert result.two == 1000
    assert result.violations == []


@pytest.mark.slow
def test_hemisphere_corpus_subset():
    cfg = load_experiment_config(CORPUS_DIR / "hemisphere_pairs.json").model_copy(update={"trials": 100})
    summary = run_experiment(cfg).summary
    assert summary["hemisphere_violations"] == 0
    assert summary["lemma_violations"] == 0
