"""Tests des trois constructions d'optimalité."""
import math

import numpy as np
import pytest

from backend import config
from backend.constructions import (
    ConstructionParams,
    analyse_three_circle,
    build_sharp_upper,
    build_three_circle_domain,
    build_zero_vertex,
    notch_normals,
    three_circle_disks,
)
from backend.domains import BallPolygon, Disk, Ellipse
from backend.engine import check_proper, compute_structure, verify_bounds
from backend.errors import AntipodalConditionFailed, NotProper, UnsupportedScene
from backend.models import ExperimentConfig, domain_schema
from backend.oracle import match_points, run_oracle
from backend.services.experiments import random_scene, trial_rng


@pytest.mark.parametrize("n, expected", [(2, 2), (3, 4), (4, 6)])
def test_sharp_upper_disk(n, expected):
    """Test: disque (m = 0) → exactement 2(n-1) sommets."""
    scene = build_sharp_upper(Disk(), n)
    assert scene.n == n
    bound = verify_bounds(compute_structure(scene))
    assert bound.total == expected == bound.upper


def test_sharp_upper_reuleaux():
    """Test: Reuleaux (m = 3), n = 2 → 2(n-1) + m = 5 sommets, dont 3 hérités."""
    domain = BallPolygon(three_circle_disks(1.0))
    scene = build_sharp_upper(domain, 2)
    s = compute_structure(scene)
    assert s.total == 5
    assert s.inherited_count == 3


def test_sharp_upper_ellipse():
    scene = build_sharp_upper(Ellipse(1.0, 0.5), 2)
    assert compute_structure(scene).total == 2


@pytest.mark.slow
@pytest.mark.parametrize("n", [2, 3, 4, 5])
@pytest.mark.parametrize("make_domain", [Disk, lambda: build_three_circle_domain(0.8)], ids=["disk", "three_circle"])
def test_sharp_upper_matches_oracle(make_domain, n):
    domain = make_domain()
    scene = build_sharp_upper(domain, n)
    s = compute_structure(scene)
    assert s.total == 2 * (n - 1) + domain.m
    assert s.min_vertex_angle >= 2.0 * config.ORACLE_TAU
    report = run_oracle(scene)
    assert report.count == s.total
    _, worst = match_points([v.point for v in s.vertices], report.points)
    assert worst <= 1e-6


def test_sharp_upper_three_circle_keeps_wide_angles():
    """Test: n = 5 sur le domaine à trois cercles → 2(n-1) + 3 = 11 sommets, aucun trop aigu pour l'oracle."""
    s = compute_structure(build_sharp_upper(build_three_circle_domain(0.8), 5))
    assert s.total == 11
    assert s.inherited_count == 3
    assert s.min_vertex_angle >= 2.0 * config.ORACLE_TAU


def test_sharp_upper_refuses_sharp_vertices():
    with pytest.raises(NotProper):
        build_sharp_upper(Disk(), 3, ConstructionParams(min_vertex_angle=3.0))


def test_notch_normals_follow_smooth_arcs():
    """Les entailles se répartissent au prorata des arcs lisses et évitent les coins."""
    domain = build_three_circle_domain(0.8)
    arcs = domain.smooth_normal_arcs()
    normals = notch_normals(domain, 4)
    assert len(normals) == 4
    counts = [sum(arc.contains(float(t)) for t in normals) for arc in arcs]
    assert sorted(counts) == [1, 1, 2]
    for feature in domain.singular_features():
        assert not any(feature.normal_arc.contains(float(t)) for t in normals)
    assert np.allclose(notch_normals(Disk(), 3), [math.pi / 3, math.pi, 5 * math.pi / 3])


def test_sharp_upper_rejects_small_n():
    with pytest.raises(ValueError):
        build_sharp_upper(Disk(), 1)


def test_three_circle_reuleaux_boundary_case():
    """Test: s = 1 → σ = ν = π/3 (triangle de Reuleaux)."""
    report = analyse_three_circle(BallPolygon(three_circle_disks(1.0)))
    assert report.sigma == pytest.approx(math.pi / 3, abs=1e-12)
    assert report.nu == pytest.approx(math.pi / 3, abs=1e-12)


def test_three_circle_strict():
    """Test: s = 0.8 → σ < π/3 < ν et σ + ν = 2π/3."""
    domain = build_three_circle_domain(0.8)
    report = analyse_three_circle(domain)
    assert domain.m == 3
    assert report.sigma < math.pi / 3 < report.nu
    assert report.sigma + report.nu == pytest.approx(2 * math.pi / 3, abs=1e-12)


def test_three_circle_invalid_side():
    with pytest.raises(ValueError):
        build_three_circle_domain(0.5)
    with pytest.raises(AntipodalConditionFailed):
        build_three_circle_domain(1.5)


def test_three_circle_two_homothets_have_inherited_vertex():
    """Test: toute scène propre de 2 homothétiques sur ce domaine → total ≥ 3, ≥ 1 sommet hérité."""
    domain = build_three_circle_domain(0.8)
    cfg = ExperimentConfig(domain=domain_schema(domain), n=2, oracle=False)
    for trial in range(3):
        scene, _ = random_scene(cfg, trial_rng(7, trial))
        s = compute_structure(scene)
        assert s.total >= 3
        assert s.inherited_count >= 1


def test_zero_vertex_two_squares():
    """Test: deux carrés arrondis translatés le long d'un axe → aucun point singulier."""
    scene = build_zero_vertex(2)
    assert scene.n == 2
    assert run_oracle(scene).count == 0


def test_zero_vertex_diagonal_control():
    """Test: décalage diagonal → deux coins à angle droit (contrôle négatif)."""
    scene = build_zero_vertex(2, ConstructionParams(offset=(0.3, 0.3)))
    report = run_oracle(scene)
    assert report.count == 2
    assert all(angle == pytest.approx(math.pi / 2, abs=1e-3) for _, angle in report.singular_points)


@pytest.mark.slow
@pytest.mark.parametrize("n", [3, 4])
def test_zero_vertex_polygons(n):
    scene = build_zero_vertex(n)
    assert scene.n == n
    assert run_oracle(scene).count == 0
    assert run_oracle(scene, samples=16384).count == 0


def test_zero_vertex_is_not_strictly_convex():
    """Le moteur refuse ces scènes; seul l'oracle les vérifie."""
    scene = build_zero_vertex(2)
    assert not scene.bodies[0].is_strictly_convex()
    with pytest.raises(UnsupportedScene):
        check_proper(scene)
