"""
Générateurs des trois constructions d'optimalité:

- build_sharp_upper: C plus n-1 homothétiques agrandis qui entaillent C
  près de son bord → exactement 2(n-1) + m sommets;
- build_three_circle_domain: intersection de trois disques dont chaque arc
  lisse a son antipode dans l'arc normal d'un coin;
- build_zero_vertex: polygones arrondis dont l'intersection n'a aucun sommet.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import root

from . import config
from .domains import BallPolygon, Circle, DomainModel, HomothetSpec, RoundedPolygon, place
from .engine import SceneSpec, compute_structure, make_scene
from .errors import AntipodalConditionFailed, CPolygonError, NotProper, SmoothingFailed
from .geometry import DEFAULT_TOLERANCES, TWO_PI, Point2, Tolerances, antipode, unit_vector

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ConstructionParams:
    mu: float = 1.5
    delta: float = 0.05  # fraction du diamètre de C
    side: float = 0.8
    apothem: float = 1.0
    corner_radius: float = 0.2
    offset: tuple[float, float] = (0.3, 0.0)
    enlarge: float = 2.0
    max_backoff: int = 20
    backoff: float = 0.7
    min_vertex_angle: float = 2.0 * config.ORACLE_TAU

    def __post_init__(self) -> None:
        if not self.mu > 1.0:
            raise ValueError(f"mu must be > 1, got {self.mu}")
        if not self.delta > 0.0:
            raise ValueError(f"delta must be > 0, got {self.delta}")
        if not self.enlarge > 1.0:
            raise ValueError(f"enlarge must be > 1, got {self.enlarge}")
        if not (0.0 < self.corner_radius < self.apothem):
            raise ValueError("corner_radius must lie in (0, apothem)")
        if self.max_backoff < 0:
            raise ValueError("max_backoff must be >= 0")
        if not 0.0 < self.backoff < 1.0:
            raise ValueError(f"backoff must lie in (0, 1), got {self.backoff}")
        if self.min_vertex_angle < 0.0:
            raise ValueError("min_vertex_angle must be >= 0")


DEFAULT_PARAMS = ConstructionParams()


def domain_diameter(domain: DomainModel, samples: int = 720) -> float:
    """Largeur maximale h(θ) + h(θ + π), égale au diamètre pour un convexe."""
    thetas = np.linspace(0.0, math.pi, samples, endpoint=False)
    return float(np.max(np.asarray(domain.support(thetas)) + np.asarray(domain.support(thetas + math.pi))))


def notch_normals(
    domain: DomainModel,
    count: int,
    rng: np.random.Generator | None = None,
    jitter: float = 0.0,
) -> np.ndarray:
    """`count` normales réparties sur les arcs lisses de C, au prorata de leur étendue.

    Un arc recevant q entailles est coupé en q tranches égales, une normale au
    milieu de chacune; `jitter` (fraction de demi-tranche) les déplace au hasard.
    Les coins de C restent ainsi à une demi-tranche au moins de chaque entaille.
    """
    arcs = domain.smooth_normal_arcs()
    extents = np.array([arc.extent for arc in arcs])
    quota = count * extents / extents.sum()
    shares = np.floor(quota).astype(int)
    order = np.argsort(-(quota - shares), kind="stable")
    shares[order[: count - int(shares.sum())]] += 1
    normals = []
    for arc, q in zip(arcs, shares):
        for k in range(q):
            slot = arc.extent / q
            shift = rng.uniform(-jitter, jitter) * slot / 2.0 if rng is not None and jitter > 0.0 else 0.0
            normals.append(arc.start + slot * (k + 0.5) + shift)
    return np.array(normals)


def notch_center(outer: DomainModel, body: DomainModel, theta: float, mu: float, delta: float) -> np.ndarray:
    """Centre de `body` à l'échelle mu, tangent à `outer` en γ(θ) puis enfoncé de delta.

    Pour body = outer c'est l'homothétie de centre γ(θ) et de rapport mu: elle
    contient C, et le recul delta n'entaille qu'une calotte autour de θ.
    """
    p = np.asarray(outer.boundary_at_normal(theta)) - delta * unit_vector(theta)
    return p - mu * np.asarray(body.boundary_at_normal(theta))


def sharp_upper_placements(domain: DomainModel, n: int, mu: float, delta: float) -> list[HomothetSpec]:
    """C puis n-1 homothéties de centre γ(θ_k), rapport mu, poussées de delta vers l'intérieur."""
    placements = [HomothetSpec(Point2(0.0, 0.0), 1.0)]
    for theta in notch_normals(domain, n - 1):
        center = notch_center(domain, domain, float(theta), mu, delta)
        placements.append(HomothetSpec(Point2.from_array(center), mu))
    return placements


def build_sharp_upper(
    domain: DomainModel,
    n: int,
    params: ConstructionParams = DEFAULT_PARAMS,
    tol: Tolerances = DEFAULT_TOLERANCES,
) -> SceneSpec:
    """Scène à 2(n-1) + m sommets, tous d'angle extérieur ≥ params.min_vertex_angle.

    delta part de params.delta · diamètre et recule d'un facteur params.backoff
    tant que le compte n'est pas atteint. Reculer ferme aussi les angles des
    entailles: un compte atteint avec un angle trop petit est un échec.
    """
    if n < 2:
        raise ValueError(f"n must be >= 2, got {n}")
    target = 2 * (n - 1) + domain.m
    delta = params.delta * domain_diameter(domain)
    last_error: str = "no attempt"
    for attempt in range(params.max_backoff + 1):
        scene = make_scene(domain, sharp_upper_placements(domain, n, params.mu, delta), tol)
        try:
            s = compute_structure(scene)
        except CPolygonError as exc:
            last_error = str(exc)
        else:
            if s.total == target and s.min_vertex_angle >= params.min_vertex_angle:
                logger.info(
                    "sharp-upper n=%d m=%d: %d vertices (delta=%.4g, min angle %.4f)",
                    n, domain.m, s.total, delta, s.min_vertex_angle,
                )
                return scene
            if s.total == target:
                raise NotProper(
                    f"sharp-upper reached {target} vertices but its smallest vertex angle "
                    f"{s.min_vertex_angle:.4f} is below {params.min_vertex_angle:.4f}; raise mu"
                )
            last_error = f"{s.total} vertices instead of {target}"
        logger.info("sharp-upper attempt %d rejected (%s), shrinking delta", attempt, last_error)
        delta *= params.backoff
    raise NotProper(f"sharp-upper construction failed after backoff: {last_error}")


@dataclass(frozen=True)
class ThreeCircleReport:
    smooth_extents: tuple[float, ...]
    vertex_extents: tuple[float, ...]

    @property
    def sigma(self) -> float:
        return max(self.smooth_extents)

    @property
    def nu(self) -> float:
        return min(self.vertex_extents)


def three_circle_disks(s: float) -> list[Circle]:
    """Disques de rayon s centrés aux sommets d'un triangle équilatéral de côté 1."""
    circumradius = 1.0 / math.sqrt(3.0)
    return [
        Circle(Point2.from_array(circumradius * unit_vector(math.pi / 2 + k * TWO_PI / 3)), s)
        for k in range(3)
    ]


def analyse_three_circle(domain: BallPolygon) -> ThreeCircleReport:
    return ThreeCircleReport(
        tuple(arc.extent for arc in domain.smooth_normal_arcs()),
        tuple(f.normal_arc.extent for f in domain.singular_features()),
    )


def build_three_circle_domain(s: float = DEFAULT_PARAMS.side, tol: Tolerances = DEFAULT_TOLERANCES) -> BallPolygon:
    """Polygone de boules à trois coins; chaque arc lisse a son antipode dans un arc de coin.

    s = 1 donne le triangle de Reuleaux (σ = ν = π/3); pour s < 1 les arcs
    lisses rétrécissent et σ < π/3 < ν.
    """
    if not (math.isfinite(s) and s > 1.0 / math.sqrt(3.0)):
        raise ValueError(f"three-circle side must exceed 1/sqrt(3) for a non-empty interior, got {s}")
    domain = BallPolygon(three_circle_disks(s), tol)
    report = analyse_three_circle(domain)
    if domain.m != 3 or report.sigma > report.nu + tol.refine_tol:
        raise AntipodalConditionFailed(f"smooth arc extent {report.sigma:.6f} exceeds vertex arc extent {report.nu:.6f}")
    slack = 1e-9
    for arc in domain.smooth_normal_arcs():
        start, end = antipode(arc.start), antipode(arc.end)
        if not any(
            f.normal_arc.contains(start, slack) and f.normal_arc.contains(end, slack)
            for f in domain.singular_features()
        ):
            raise AntipodalConditionFailed("antipode of a smooth arc is not inside a vertex normal arc")
    return domain


def zero_vertex_placements(domain: RoundedPolygon, n: int, enlarge: float, tol: Tolerances) -> list[HomothetSpec]:
    """C plus n-1 copies agrandies dont les deux faces autour du coin k coïncident avec celles de C."""
    normals = domain.face_normals()
    placements = [HomothetSpec(Point2(0.0, 0.0), 1.0)]
    for k in range(1, n):
        pair = (normals[k], normals[(k + 1) % domain.n])
        targets = np.array([domain.support(t) for t in pair])

        def residual(x: np.ndarray) -> np.ndarray:
            body = place(domain, HomothetSpec(Point2.from_array(x), enlarge))
            return np.array([body.support(t) for t in pair]) - targets

        solution = root(residual, np.zeros(2), method="hybr", tol=tol.refine_tol)
        misfit = float(np.max(np.abs(residual(solution.x))))
        if not solution.success or misfit >= tol.eps_geom:
            raise SmoothingFailed(f"junction {k}: support lines do not coincide (residual {misfit:.3e})")
        placements.append(HomothetSpec(Point2.from_array(solution.x), enlarge))
    return placements


def build_zero_vertex(
    n: int,
    params: ConstructionParams = DEFAULT_PARAMS,
    tol: Tolerances = DEFAULT_TOLERANCES,
) -> SceneSpec:
    """Intersection lisse (aucun sommet) de n polygones arrondis.

    n = 2: deux carrés arrondis translatés de `offset`. n >= 3: n-gone arrondi
    et n-1 copies agrandies, chacune arrondissant un coin de C tangentiellement.
    """
    if n < 2:
        raise ValueError(f"n must be >= 2, got {n}")
    if n == 2:
        domain = RoundedPolygon(4, params.apothem, params.corner_radius)
        placements = [HomothetSpec(Point2(0.0, 0.0), 1.0), HomothetSpec(Point2(*params.offset), 1.0)]
    else:
        domain = RoundedPolygon(n, params.apothem, params.corner_radius)
        placements = zero_vertex_placements(domain, n, params.enlarge, tol)
    return make_scene(domain, placements, tol)
