"""Tests des modèles de domaines: γ, fonction d'appui, appartenance, coins."""
import math

import numpy as np
import pytest

from backend.domains import (
    BallPolygon,
    Circle,
    Disk,
    DomainModel,
    Ellipse,
    HomothetSpec,
    RoundedPolygon,
    Superellipse,
    interior_witness,
    max_membership,
    place,
)
from backend.errors import DegenerateGeometry, ImproperIntersection
from backend.geometry import TWO_PI, Point2

THETAS = np.linspace(0.0, TWO_PI, 97, endpoint=False)
SQRT3_2 = math.sqrt(3.0) / 2.0


def reuleaux() -> BallPolygon:
    return BallPolygon([Circle(Point2(0.0, 0.0), 1.0), Circle(Point2(1.0, 0.0), 1.0), Circle(Point2(0.5, SQRT3_2), 1.0)])


def test_disk_gauss_map():
    disk = Disk()
    assert np.allclose(disk.boundary_at_normal(0.0), [1.0, 0.0])
    assert disk.support(1.3) == pytest.approx(1.0)
    assert disk.m == 0
    assert disk.is_smooth() and disk.is_strictly_convex()


def test_ellipse_support_and_boundary():
    """Test: h(0) = a, h(π/2) = b, γ(π/2) = (0, b)."""
    ellipse = Ellipse(2.0, 1.0)
    assert ellipse.support(0.0) == pytest.approx(2.0)
    assert ellipse.support(math.pi / 2) == pytest.approx(1.0)
    assert np.allclose(ellipse.boundary_at_normal(math.pi / 2), [0.0, 1.0], atol=1e-12)
    # ✅ h(θ) = <γ(θ), u(θ)> sur tout le cercle
    pts = ellipse.boundary_at_normal(THETAS)
    assert np.allclose(np.sum(pts * np.stack([np.cos(THETAS), np.sin(THETAS)], axis=-1), axis=-1), ellipse.support(THETAS))


def test_rotated_ellipse_boundary_on_curve():
    ellipse = Ellipse(1.5, 0.7, rotation=0.4)
    assert np.allclose(ellipse.signed_membership(ellipse.boundary_at_normal(THETAS)), 0.0, atol=1e-12)


def test_generic_radial_matches_closed_form():
    """Test: l'inversion 1D générique de γ retrouve la fonction radiale exacte."""
    ellipse = Ellipse(1.8, 0.6, rotation=0.3)
    phi = np.linspace(-math.pi, math.pi, 41)
    assert np.allclose(DomainModel.radial(ellipse, phi), ellipse.radial(phi), atol=1e-9)


def test_superellipse_p2_is_disk():
    sq = Superellipse(2.0)
    assert np.allclose(sq.boundary_at_normal(THETAS), Disk().boundary_at_normal(THETAS), atol=1e-12)
    assert np.allclose(sq.support(THETAS), 1.0)


def test_superellipse_boundary_satisfies_equation():
    """Test: γ en forme close (exposant conjugué) tombe sur |x|^p + |y|^p = 1."""
    sq = Superellipse(4.0)
    pts = sq.boundary_at_normal(THETAS)
    assert np.allclose(np.abs(pts[:, 0]) ** 4 + np.abs(pts[:, 1]) ** 4, 1.0, atol=1e-12)
    assert np.allclose(sq.signed_membership(pts), 0.0, atol=1e-12)


def test_invalid_parameters():
    with pytest.raises(ValueError):
        Ellipse(0.0, 1.0)
    with pytest.raises(ValueError):
        Superellipse(1.0)
    with pytest.raises(ValueError):
        RoundedPolygon(4, 1.0, 1.0)
    with pytest.raises(ValueError):
        RoundedPolygon(2, 1.0, 0.2)


def test_reuleaux_features():
    """Test: triangle de Reuleaux → 3 coins d'arc normal π/3 aux centres des disques."""
    domain = reuleaux()
    assert domain.m == 3
    for feature in domain.singular_features():
        assert feature.normal_arc.extent == pytest.approx(math.pi / 3, abs=1e-12)
    for arc in domain.smooth_normal_arcs():
        assert arc.extent == pytest.approx(math.pi / 3, abs=1e-12)
    corners = sorted((round(f.point.x, 9), round(f.point.y, 9)) for f in domain.singular_features())
    assert corners == sorted([(0.0, 0.0), (1.0, 0.0), (0.5, round(SQRT3_2, 9))])


def test_lens_features():
    lens = BallPolygon([Circle(Point2(0.0, 0.0), 1.0), Circle(Point2(1.0, 0.0), 1.0)])
    assert lens.m == 2
    ys = sorted(f.point.y for f in lens.singular_features())
    assert ys == pytest.approx([-SQRT3_2, SQRT3_2])
    assert all(f.point.x == pytest.approx(0.5) for f in lens.singular_features())


def test_ball_polygon_membership_and_corners():
    domain = reuleaux()
    assert domain.signed_membership(Point2(0.5, 0.3).as_array()) < 0.0
    assert domain.signed_membership(np.array([3.0, 3.0])) > 0.0
    # γ au milieu d'un arc normal de coin = le coin lui-même
    feature = domain.singular_features()[0]
    assert np.allclose(domain.boundary_at_normal(feature.normal_arc.midpoint), feature.point.as_array())
    assert np.allclose(domain.signed_membership(domain.boundary_at_normal(THETAS)), 0.0, atol=1e-12)


def test_ball_polygon_errors():
    """Test: disques confondus, redondants ou disjoints → intersection impropre; tangents → dégénéré."""
    with pytest.raises(ImproperIntersection):
        BallPolygon([Circle(Point2(0.0, 0.0), 1.0), Circle(Point2(0.0, 0.0), 1.0)])
    with pytest.raises(ImproperIntersection, match="redundant"):
        BallPolygon([Circle(Point2(0.0, 0.0), 1.0), Circle(Point2(0.5, 0.0), 1.0), Circle(Point2(0.0, 0.0), 10.0)])
    with pytest.raises(ImproperIntersection):
        BallPolygon([Circle(Point2(0.0, 0.0), 1.0), Circle(Point2(3.0, 0.0), 1.0)])
    with pytest.raises(DegenerateGeometry):
        BallPolygon([Circle(Point2(0.0, 0.0), 1.0), Circle(Point2(2.0, 0.0), 1.0)])


def test_rounded_polygon_faces_and_corners():
    """Test: carré arrondi d'apothème 1 → face en x = 1, coin arrondi de rayon 0.2."""
    square = RoundedPolygon(4, 1.0, 0.2)
    assert not square.is_strictly_convex()
    assert square.is_smooth() and square.m == 0
    assert np.allclose(square.boundary_at_normal(0.0), [1.0, 0.0])
    assert square.support(math.pi / 4) == pytest.approx(0.8 * math.sqrt(2.0) + 0.2)
    assert square.signed_membership(np.array([1.0, 0.5])) == pytest.approx(0.0, abs=1e-9)
    assert square.signed_membership(square.boundary_at_normal(math.pi / 4)) == pytest.approx(0.0, abs=1e-9)
    assert square.signed_membership(np.array([0.99, 0.99])) > 0.0


def test_placed_body_is_homothet():
    """Test: H = x + λC → h_H(θ) = λh(θ) + <x, u(θ)>."""
    body = place(Disk(), HomothetSpec(Point2(1.0, 2.0), 2.0))
    assert body.support(0.0) == pytest.approx(3.0)
    assert body.support(math.pi / 2) == pytest.approx(4.0)
    assert np.allclose(body.boundary_at_normal(0.0), [3.0, 2.0])
    assert body.signed_membership(np.array([1.0, 2.0])) == pytest.approx(-2.0)
    with pytest.raises(ValueError):
        HomothetSpec(Point2(0.0, 0.0), 0.0)


def test_placed_ball_polygon_features_move():
    body = place(reuleaux(), HomothetSpec((2.0, 0.0), 0.5))
    points = sorted((round(f.point.x, 9), round(f.point.y, 9)) for f in body.singular_features())
    assert points[0] == (2.0, 0.0)
    assert points[1] == (2.25, round(0.5 * SQRT3_2, 9))


def test_interior_witness():
    lens = [place(Disk()), place(Disk(), HomothetSpec((1.0, 0.0)))]
    witness = interior_witness(lens)
    assert witness is not None
    assert max_membership(lens, witness.as_array()) < 0.0

    disjoint = [place(Disk()), place(Disk(), HomothetSpec((3.0, 0.0)))]
    assert interior_witness(disjoint) is None


DOMAINS = {
    "disk": Disk(),
    "ellipse": Ellipse(1.0, 0.5, rotation=0.7),
    "superellipse": Superellipse(4.0, 1.0, 0.7),
    "reuleaux": reuleaux(),
    "lens": BallPolygon([Circle(Point2(0.0, 0.0), 1.0), Circle(Point2(1.0, 0.0), 1.0)]),
    "rounded_square": RoundedPolygon(4, 1.0, 0.2),
}


@pytest.mark.parametrize("name", sorted(DOMAINS))
def test_boundary_stays_behind_every_support_line(name):
    """Test: <γ(θ'), u(θ)> ≤ h(θ) pour tous θ, θ' échantillonnés."""
    domain = DOMAINS[name]
    points = np.asarray(domain.boundary_at_normal(THETAS))
    dots = points @ np.stack([np.cos(THETAS), np.sin(THETAS)])
    support = np.asarray(domain.support(THETAS))
    assert np.all(dots <= support[None, :] + 1e-9)
    # égalité sur la diagonale: γ(θ) touche sa propre droite d'appui
    assert np.allclose(np.diag(dots), support, atol=1e-9)


@pytest.mark.parametrize("name", sorted(DOMAINS))
def test_gauss_extents_cover_the_circle(name):
    domain = DOMAINS[name]
    smooth = sum(arc.extent for arc in domain.smooth_normal_arcs())
    singular = sum(f.normal_arc.extent for f in domain.singular_features())
    assert smooth + singular == pytest.approx(TWO_PI, abs=1e-9)


@pytest.mark.parametrize("name", sorted(DOMAINS))
def test_boundary_traversal_is_monotone(name):
    """Test: l'angle polaire de γ(θ) autour d'un point intérieur croît avec θ, un seul tour."""
    domain = DOMAINS[name]
    thetas = np.linspace(0.0, TWO_PI, 720, endpoint=False)
    rel = np.asarray(domain.boundary_at_normal(thetas)) - domain.interior_point().as_array()
    polar = np.unwrap(np.arctan2(rel[:, 1], rel[:, 0]))
    steps = np.diff(polar)
    assert np.all(steps >= -1e-12)
    assert math.pi < polar[-1] - polar[0] < TWO_PI
    if domain.is_smooth() and domain.is_strictly_convex():
        # injectif: deux normales distinctes, deux points distincts
        assert np.all(steps > 0.0)


@pytest.mark.parametrize("p", [1.5, 4.0, 6.0])
def test_superellipse_symmetric_at_quarter_turn(p):
    x, y = Superellipse(p, 1.0, 1.0).boundary_at_normal(math.pi / 4)
    assert x == pytest.approx(y, abs=1e-12)
    assert abs(x) ** p + abs(y) ** p == pytest.approx(1.0, abs=1e-9)


def test_placing_ball_polygon_keeps_normal_arcs():
    """Test: une homothétie ne change pas les arcs normaux des coins, seulement leurs points."""
    domain = reuleaux()
    spec = HomothetSpec((0.3, -0.2), 1.7)
    body = place(domain, spec)
    for moved, original in zip(body.singular_features(), domain.singular_features()):
        assert moved.normal_arc.start == pytest.approx(original.normal_arc.start, abs=1e-15)
        assert moved.normal_arc.extent == pytest.approx(original.normal_arc.extent, abs=1e-15)
        expected = np.array([0.3, -0.2]) + 1.7 * original.point.as_array()
        assert np.allclose(moved.point.as_array(), expected, atol=1e-12)
    for arc in domain.smooth_normal_arcs():
        mid = arc.midpoint
        assert np.allclose(
            body.boundary_at_normal(mid), np.array([0.3, -0.2]) + 1.7 * domain.boundary_at_normal(mid), atol=1e-12
        )
