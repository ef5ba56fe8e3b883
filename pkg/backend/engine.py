"""
Cœur C-polygone: croisements de bords deux à deux, propreté, familles
d'arêtes, sommets (par paires / hérités), lacunes, bornes de comptage,
famille à arête unique et propriété d'hémisphère des translatés.

Tout est exprimé en coordonnées d'angle normal: les homothétiques d'un même
domaine partagent le paramètre θ de γ.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from functools import lru_cache
from itertools import combinations
from typing import Sequence

import numpy as np
from scipy.optimize import minimize_scalar

from .domains import DomainModel, HomothetSpec, PlacedBody, interior_witness, max_membership, place
from .errors import DegenerateGeometry, ModelViolation, NotProper, TheoryViolation, UnsupportedScene
from .geometry import (
    DEFAULT_TOLERANCES,
    FULL_CIRCLE,
    TWO_PI,
    NormalArc,
    Point2,
    Tolerances,
    normalize_angle,
    wrap_pi,
)

logger = logging.getLogger(__name__)

# fermeture entre arêtes consécutives et fusion des sommets entre paires
VERTEX_TOL = 1e-6
_MAX_TANGENCY_CANDIDATES = 16


# --------------------------------------------------------------------------- #
# Scènes
# --------------------------------------------------------------------------- #


@dataclass(frozen=True)
class SceneSpec:
    bodies: tuple[PlacedBody, ...]
    shared_domain: DomainModel | None = None
    tolerances: Tolerances = DEFAULT_TOLERANCES

    def __post_init__(self) -> None:
        object.__setattr__(self, "bodies", tuple(self.bodies))
        if len(self.bodies) < 2:
            raise ValueError(f"a scene needs at least 2 bodies, got {len(self.bodies)}")
        if self.shared_domain is None:
            for k, body in enumerate(self.bodies):
                if not (body.is_smooth() and body.is_strictly_convex()):
                    raise UnsupportedScene(
                        f"mixed scenes require smooth strictly convex bodies (body {k} is not)"
                    )
        elif any(body.domain is not self.shared_domain for body in self.bodies):
            raise ValueError("shared_domain set but a body uses another domain")

    @property
    def n(self) -> int:
        return len(self.bodies)

    @property
    def m(self) -> int:
        return self.shared_domain.m if self.shared_domain is not None else 0

    @property
    def translative(self) -> bool:
        return self.shared_domain is not None and all(b.scale == 1.0 for b in self.bodies)

    @property
    def regime(self) -> str:
        if self.shared_domain is None:
            return "mixed"
        return "translative" if self.translative else "homothetic"


def make_scene(
    domain: DomainModel,
    placements: Sequence[HomothetSpec],
    tol: Tolerances = DEFAULT_TOLERANCES,
) -> SceneSpec:
    """Scène H = ∩ (x_i + λ_i C) pour un domaine commun C."""
    return SceneSpec(tuple(place(domain, spec) for spec in placements), domain, tol)


def make_mixed_scene(bodies: Sequence[PlacedBody], tol: Tolerances = DEFAULT_TOLERANCES) -> SceneSpec:
    """Scène à un domaine par corps; des domaines tous égaux redonnent une scène d'homothétiques."""
    bodies = tuple(bodies)
    first = bodies[0].domain
    if all(type(b.domain) is type(first) and b.domain.parameters() == first.parameters() for b in bodies):
        return make_scene(first, [b.placement for b in bodies], tol)
    return SceneSpec(bodies, None, tol)


def sub_scene(scene: SceneSpec, drop: int) -> SceneSpec:
    """La scène privée du corps `drop` (réduction héréditaire)."""
    bodies = tuple(b for k, b in enumerate(scene.bodies) if k != drop)
    return SceneSpec(bodies, scene.shared_domain, scene.tolerances)


# --------------------------------------------------------------------------- #
# Croisements deux à deux
# --------------------------------------------------------------------------- #


class PairKind(str, Enum):
    DISJOINT = "disjoint"
    NESTED = "nested"
    TWO = "two"


@dataclass(frozen=True)
class PairResult:
    kind: PairKind
    points: tuple[Point2, ...] = ()
    params_a: tuple[float, ...] = ()
    params_b: tuple[float, ...] = ()


@dataclass(frozen=True)
class _Crossings:
    params: tuple[float, ...]
    tangent: bool
    f0: float


def _bisect(fun, lo: np.ndarray, hi: np.ndarray, f_lo: np.ndarray, tol: float) -> np.ndarray:
    """Dichotomie vectorisée sur des encadrements de changement de signe."""
    if lo.size == 0:
        return lo
    iterations = max(1, int(math.ceil(math.log2(float(np.max(hi - lo)) / tol))))
    s_lo = np.sign(f_lo)
    for _ in range(iterations):
        mid = 0.5 * (lo + hi)
        same = np.sign(fun(mid)) == s_lo
        lo = np.where(same, mid, lo)
        hi = np.where(same, hi, mid)
    return 0.5 * (lo + hi)


@lru_cache(maxsize=4096)
def _crossings(a: PlacedBody, b: PlacedBody, tol: Tolerances) -> _Crossings:
    """Paramètres θ sur bd(a) où bd(a) traverse bd(b).

    Balayage uniforme de f(θ) = membership_b(γ_a(θ)), encadrement des
    changements de signe puis dichotomie. Les minima locaux de |f| sans
    changement de signe sont raffinés: valeur ~0 → tangence, valeur de signe
    opposé → paire de racines cachée entre deux échantillons.
    """
    def fun(theta):
        return np.asarray(b.signed_membership(a.boundary_at_normal(theta)))

    count = tol.scan_samples
    step = TWO_PI / count
    thetas = np.arange(count) * step
    f = fun(thetas)
    outside = f > 0.0
    nxt = np.roll(np.arange(count), -1)
    changes = np.flatnonzero(outside != outside[nxt])
    roots = list(_bisect(fun, thetas[changes], thetas[changes] + step, f[changes], tol.refine_tol))

    near_change = np.zeros(count, dtype=bool)
    near_change[changes] = True
    near_change[nxt[changes]] = True
    prv = np.roll(np.arange(count), 1)
    absf = np.abs(f)
    variation = np.abs(f[nxt] - f) + np.abs(f[prv] - f)
    candidates = np.flatnonzero(
        (absf <= absf[prv]) & (absf <= absf[nxt]) & ~near_change & ~near_change[prv] & (absf < variation + tol.eps_geom)
    )
    candidates = candidates[np.argsort(absf[candidates])][:_MAX_TANGENCY_CANDIDATES]

    tangent = False
    for i in candidates:
        sign = 1.0 if f[i] > 0.0 else -1.0
        lo, hi = thetas[i] - step, thetas[i] + step
        res = minimize_scalar(
            lambda t: sign * float(fun(t)), bounds=(lo, hi), method="bounded", options={"xatol": tol.refine_tol}
        )
        value = float(res.fun)
        if abs(value) <= tol.eps_geom:
            tangent = True
        elif value < 0.0:
            t_star = float(res.x)
            f_lo = np.array([f[i], sign * value])
            hidden = _bisect(fun, np.array([lo, t_star]), np.array([t_star, hi]), f_lo, tol.refine_tol)
            logger.debug("hidden crossing pair near θ=%.6f", t_star)
            roots.extend(hidden)

    params = tuple(sorted(normalize_angle(t) for t in roots))
    return _Crossings(params, tangent, float(f[0]))


def _require_strictly_convex(*bodies: PlacedBody) -> None:
    for body in bodies:
        if not body.is_strictly_convex():
            raise UnsupportedScene(f"{body.domain!r} is not strictly convex")


def _check_crossings(c: _Crossings, tol: Tolerances) -> None:
    if c.tangent:
        raise DegenerateGeometry("tangential contact between two boundaries")
    params = c.params
    for k in range(len(params)):
        gap = abs(float(wrap_pi(params[k] - params[k - 1]))) if len(params) > 1 else math.inf
        if gap < tol.eps_angle:
            raise DegenerateGeometry("coincident boundary crossings (tangency)")
    if len(params) not in (0, 2):
        raise ModelViolation(f"{len(params)} boundary crossings between two bodies (expected 0 or 2)")


def pairwise_boundary_points(a: PlacedBody, b: PlacedBody, tol: Tolerances = DEFAULT_TOLERANCES) -> PairResult:
    """bd(a) ∩ bd(b) pour deux corps strictement convexes: 0 ou 2 points."""
    _require_strictly_convex(a, b)
    fwd = _crossings(a, b, tol)
    _check_crossings(fwd, tol)
    rev = _crossings(b, a, tol)
    _check_crossings(rev, tol)
    if len(fwd.params) != len(rev.params):
        raise ModelViolation("asymmetric crossing count between two bodies")

    if not fwd.params:
        if fwd.f0 < 0.0 or rev.f0 < 0.0:
            return PairResult(PairKind.NESTED)
        return PairResult(PairKind.DISJOINT)

    pts_a = a.boundary_at_normal(np.array(fwd.params))
    pts_b = b.boundary_at_normal(np.array(rev.params))
    if np.hypot(*(pts_a[0] - pts_a[1])) <= tol.eps_geom:
        raise DegenerateGeometry("coincident boundary crossings (tangency)")
    # appariement des paramètres de b aux points de a
    direct = np.hypot(*(pts_a[0] - pts_b[0])) + np.hypot(*(pts_a[1] - pts_b[1]))
    swapped = np.hypot(*(pts_a[0] - pts_b[1])) + np.hypot(*(pts_a[1] - pts_b[0]))
    params_b = rev.params if direct <= swapped else rev.params[::-1]
    points = tuple(Point2.from_array(p) for p in pts_a)
    return PairResult(PairKind.TWO, points, fwd.params, tuple(params_b))


def exterior_gauss_extent(a: PlacedBody, b: PlacedBody, tol: Tolerances = DEFAULT_TOLERANCES) -> float:
    """Étendue de Gauss de {θ : γ_a(θ) hors de b}."""
    _require_strictly_convex(a, b)
    c = _crossings(a, b, tol)
    _check_crossings(c, tol)
    if not c.params:
        return TWO_PI if c.f0 > 0.0 else 0.0
    total = 0.0
    for arc in _arcs_between(c.params):
        if float(b.signed_membership(a.boundary_at_normal(arc.midpoint))) > 0.0:
            total += arc.extent
    return total


def _arcs_between(cuts: Sequence[float]) -> list[NormalArc]:
    """Arcs délimités par des coupes triées (arcs vides ignorés)."""
    if len(cuts) == 1:
        return [NormalArc(cuts[0], TWO_PI)]
    arcs = []
    for cur, nxt in zip(cuts, list(cuts[1:]) + [cuts[0]]):
        extent = normalize_angle(nxt - cur)
        if extent > 0.0:
            arcs.append(NormalArc(cur, extent))
    return arcs


# --------------------------------------------------------------------------- #
# Propreté
# --------------------------------------------------------------------------- #


class ProperStatus(str, Enum):
    PROPER = "proper"
    EMPTY_INTERIOR = "empty_interior"
    NOT_REDUCED = "not_reduced"


@dataclass(frozen=True)
class ProperReport:
    status: ProperStatus
    body: int | None = None
    witness: Point2 | None = None

    @property
    def proper(self) -> bool:
        return self.status is ProperStatus.PROPER


def _pair_table(scene: SceneSpec) -> dict[tuple[int, int], PairResult]:
    tol = scene.tolerances
    return {
        (i, j): pairwise_boundary_points(scene.bodies[i], scene.bodies[j], tol)
        for i, j in combinations(range(scene.n), 2)
    }


def _family_arcs(scene: SceneSpec, j: int) -> tuple[list[NormalArc], int]:
    """Arcs maximaux de bd(H_j) contenus dans les autres corps.

    Renvoie (arcs d'étendue > eps_angle, nombre d'arcs singletons écartés).
    """
    tol = scene.tolerances
    body = scene.bodies[j]
    others = [b for k, b in enumerate(scene.bodies) if k != j]
    cuts = sorted({t for other in others for t in _crossings(body, other, tol).params})

    def inside_others(theta: float) -> bool:
        return float(max_membership(others, body.boundary_at_normal(theta))) <= tol.eps_geom

    if not cuts:
        return ([FULL_CIRCLE] if inside_others(0.0) else []), 0
    kept, discarded = [], 0
    for arc in _arcs_between(cuts):
        if not inside_others(arc.midpoint):
            continue
        if arc.extent > tol.eps_angle:
            kept.append(arc)
        else:
            discarded += 1
    return kept, discarded


def check_proper(scene: SceneSpec) -> ProperReport:
    """Intérieur non vide ET intersection réduite (chaque bord touche l'intérieur des autres)."""
    pairs = _pair_table(scene)
    for (i, j), pair in pairs.items():
        if pair.kind is PairKind.DISJOINT:
            logger.debug("bodies %d and %d are disjoint", i, j)
            return ProperReport(ProperStatus.EMPTY_INTERIOR)

    chord_midpoints = [
        Point2((p.x + q.x) / 2.0, (p.y + q.y) / 2.0)
        for pair in pairs.values()
        if pair.kind is PairKind.TWO
        for p, q in [pair.points]
    ]
    witness = interior_witness(scene.bodies, scene.tolerances, chord_midpoints)
    if witness is None:
        return ProperReport(ProperStatus.EMPTY_INTERIOR)

    for j in range(scene.n):
        arcs, _ = _family_arcs(scene, j)
        if not arcs:
            return ProperReport(ProperStatus.NOT_REDUCED, j, witness)
    return ProperReport(ProperStatus.PROPER, None, witness)


# --------------------------------------------------------------------------- #
# Structure
# --------------------------------------------------------------------------- #


@dataclass(frozen=True)
class Pairwise:
    i: int
    j: int


@dataclass(frozen=True)
class Inherited:
    owner: int
    feature: int


@dataclass(frozen=True)
class VertexRec:
    point: Point2
    kind: Pairwise | Inherited
    normal_arc: NormalArc

    @property
    def label(self) -> str:
        return "pairwise" if isinstance(self.kind, Pairwise) else "inherited"


@dataclass(frozen=True)
class EdgeRec:
    owner: int
    normal_arc: NormalArc
    endpoints: tuple[int, int]
    inherited: tuple[int, ...] = ()


@dataclass(frozen=True)
class GapRec:
    owner: int
    open_arc: NormalArc
    chord: tuple[Point2, Point2]
    body: PlacedBody = field(repr=False, compare=False)

    def contains(self, q: Point2, eps: float = 1e-9) -> bool:
        """q ∈ conv(adhérence de l'arc): dans H_j et du côté de l'arc par rapport à la corde."""
        if float(self.body.signed_membership(q)) > eps:
            return False
        p0, p1 = self.chord
        cross = (p1.x - p0.x) * (q.y - p0.y) - (p1.y - p0.y) * (q.x - p0.x)
        return cross <= eps


@dataclass(frozen=True)
class CPolygonStruct:
    scene: SceneSpec
    vertices: tuple[VertexRec, ...]
    edges: tuple[EdgeRec, ...]
    edge_families: tuple[tuple[int, ...], ...]
    gap_families: tuple[tuple[GapRec, ...], ...]
    proper: bool = True
    discarded: int = 0

    @property
    def pairwise_count(self) -> int:
        return sum(isinstance(v.kind, Pairwise) for v in self.vertices)

    @property
    def inherited_count(self) -> int:
        return sum(isinstance(v.kind, Inherited) for v in self.vertices)

    @property
    def total(self) -> int:
        return len(self.vertices)

    @property
    def family_sizes(self) -> tuple[int, ...]:
        return tuple(len(f) for f in self.edge_families)

    @property
    def min_vertex_angle(self) -> float:
        """Plus petit angle extérieur (étendue de Gauss) parmi les sommets."""
        return min((v.normal_arc.extent for v in self.vertices), default=math.pi)


def _gaps_for(body: PlacedBody, j: int, family: list[EdgeRec]) -> tuple[GapRec, ...]:
    arcs = sorted((e.normal_arc for e in family), key=lambda a: a.start)
    gaps = []
    for cur, nxt in zip(arcs, arcs[1:] + arcs[:1]):
        extent = TWO_PI - cur.extent if len(arcs) == 1 else normalize_angle(nxt.start - cur.end)
        if extent <= 0.0:
            continue
        gap = NormalArc(cur.end, extent)
        chord = (
            Point2.from_array(body.boundary_at_normal(gap.start)),
            Point2.from_array(body.boundary_at_normal(gap.end)),
        )
        gaps.append(GapRec(j, gap, chord, body))
    return tuple(gaps)


def _check_vertex_dedup(scene: SceneSpec, pairs: dict[tuple[int, int], PairResult]) -> None:
    """Trois bords par un même point: deux croisements de paires distinctes confondus sur bd(H)."""
    on_boundary = []
    for (i, j), pair in pairs.items():
        others = [b for k, b in enumerate(scene.bodies) if k not in (i, j)]
        for p in pair.points:
            if not others or float(max_membership(others, p.as_array())) <= VERTEX_TOL:
                on_boundary.append(((i, j), p))
    for (key_a, p), (key_b, q) in combinations(on_boundary, 2):
        if key_a != key_b and p.distance(q) <= VERTEX_TOL:
            raise DegenerateGeometry(
                f"three boundaries through one point near ({p.x:.6g}, {p.y:.6g}) (pairs {key_a}, {key_b})"
            )


def compute_structure(scene: SceneSpec) -> CPolygonStruct:
    """Sommets, arêtes, familles d'arêtes et lacunes de H, dans le sens direct."""
    _require_strictly_convex(*scene.bodies)
    report = check_proper(scene)
    if not report.proper:
        raise NotProper(f"scene is not proper: {report.status.value} (body {report.body})", report)
    pairs = _pair_table(scene)
    for key, pair in pairs.items():
        if pair.kind is not PairKind.TWO:
            raise ModelViolation(f"bodies {key} of a proper scene do not cross twice ({pair.kind.value})")
    _check_vertex_dedup(scene, pairs)

    raw: list[tuple[int, NormalArc]] = []
    discarded = 0
    for j in range(scene.n):
        arcs, dropped = _family_arcs(scene, j)
        discarded += dropped
        raw.extend((j, arc) for arc in arcs)
    # les arcs normaux des arêtes sont disjoints sur le cercle de Gauss de H
    raw.sort(key=lambda item: item[1].start)
    if len(raw) < 2:
        raise ModelViolation("a proper scene must have at least two edges")

    vertices: list[VertexRec] = []
    edge_inherited: list[list[int]] = [[] for _ in raw]
    edge_end_vertex: list[int] = []
    for k, (owner, arc) in enumerate(raw):
        body = scene.bodies[owner]
        features = body.singular_features()
        inside = [
            (arc.offset(f.normal_arc.start), idx, f)
            for idx, f in enumerate(features)
            if arc.contains_open(f.normal_arc.midpoint, scene.tolerances.eps_angle)
        ]
        for _, idx, f in sorted(inside, key=lambda item: item[0]):
            edge_inherited[k].append(len(vertices))
            vertices.append(VertexRec(f.point, Inherited(owner, idx), f.normal_arc))

        nxt_owner, nxt_arc = raw[(k + 1) % len(raw)]
        if nxt_owner == owner:
            raise ModelViolation(f"consecutive edges share owner {owner} (alternation broken)")
        p = body.boundary_at_normal(arc.end)
        q = scene.bodies[nxt_owner].boundary_at_normal(nxt_arc.start)
        if np.hypot(*(p - q)) > VERTEX_TOL:
            raise ModelViolation(f"edges of bodies {owner} and {nxt_owner} do not meet (gap {np.hypot(*(p - q)):.3e})")
        jump = normalize_angle(nxt_arc.start - arc.end)
        if jump <= scene.tolerances.eps_angle or jump >= TWO_PI - scene.tolerances.eps_angle:
            raise DegenerateGeometry(f"tangential vertex between bodies {owner} and {nxt_owner}")
        edge_end_vertex.append(len(vertices))
        vertices.append(VertexRec(Point2.from_array(0.5 * (p + q)), Pairwise(owner, nxt_owner), NormalArc(arc.end, jump)))

    edges = tuple(
        EdgeRec(owner, arc, (edge_end_vertex[k - 1], edge_end_vertex[k]), tuple(edge_inherited[k]))
        for k, (owner, arc) in enumerate(raw)
    )
    families = tuple(tuple(k for k, e in enumerate(edges) if e.owner == j) for j in range(scene.n))
    gaps = tuple(
        _gaps_for(scene.bodies[j], j, [edges[k] for k in families[j]]) for j in range(scene.n)
    )
    struct = CPolygonStruct(scene, tuple(vertices), edges, families, gaps, True, discarded)
    logger.debug(
        "structure: n=%d pairwise=%d inherited=%d families=%s",
        scene.n, struct.pairwise_count, struct.inherited_count, struct.family_sizes,
    )
    return struct


def gap_family(s: CPolygonStruct, j: int) -> list[GapRec]:
    return list(s.gap_families[j])


# --------------------------------------------------------------------------- #
# Bornes
# --------------------------------------------------------------------------- #


@dataclass(frozen=True)
class BoundReport:
    n: int
    m: int
    pairwise_count: int
    inherited_count: int
    total: int
    lower: int
    upper: int
    holds: bool
    regime: str


def verify_bounds(s: CPolygonStruct) -> BoundReport:
    """n ≤ total ≤ n + m (translatés), 2(n-1) + m (homothétiques), 2(n-1) (mixte lisse)."""
    scene = s.scene
    n, m = scene.n, scene.m
    if scene.regime == "translative":
        upper = n + m
    elif scene.regime == "homothetic":
        upper = 2 * (n - 1) + m
    else:
        upper = 2 * (n - 1)
    total = s.total
    return BoundReport(
        n=n,
        m=m,
        pairwise_count=s.pairwise_count,
        inherited_count=s.inherited_count,
        total=total,
        lower=n,
        upper=upper,
        holds=n <= total <= upper,
        regime=scene.regime,
    )


# --------------------------------------------------------------------------- #
# Lacunes: vérifications
# --------------------------------------------------------------------------- #


@dataclass(frozen=True)
class LemmaViolation:
    check: str
    body: int
    other: int | None
    point: Point2 | None
    detail: str


@dataclass(frozen=True)
class LemmaReport:
    violations: tuple[LemmaViolation, ...] = ()

    @property
    def ok(self) -> bool:
        return not self.violations

    def count(self, check: str) -> int:
        return sum(v.check == check for v in self.violations)


_EDGE_SAMPLES = 8


def _gaps_containing(gaps: Sequence[GapRec], q: Point2, eps: float) -> list[int]:
    return [k for k, g in enumerate(gaps) if g.contains(q, eps)]


def check_gap_lemmas(s: CPolygonStruct) -> LemmaReport:
    """Trois contrôles sur les lacunes:

    - boundary_in_gaps: tout point de bd(H) hors de bd(H_j) est dans exactement une lacune de j;
    - crossings_share_gap: les deux points de bd(H_i) ∩ bd(H_j) sont dans une même lacune de j;
    - family_in_single_gap: les arêtes d'une famille i tombent toutes dans une seule lacune de j.
    """
    scene = s.scene
    eps = max(scene.tolerances.eps_geom, 1e-9)
    violations: list[LemmaViolation] = []

    for j in range(scene.n):
        gaps = s.gap_families[j]
        for edge in s.edges:
            if edge.owner == j:
                continue
            body = scene.bodies[edge.owner]
            for theta in edge.normal_arc.sample(_EDGE_SAMPLES):
                q = Point2.from_array(body.boundary_at_normal(theta))
                hits = _gaps_containing(gaps, q, eps)
                if len(hits) != 1:
                    violations.append(
                        LemmaViolation("boundary_in_gaps", j, edge.owner, q, f"point lies in {len(hits)} gaps")
                    )

    for (i, j) in combinations(range(scene.n), 2):
        pair = pairwise_boundary_points(scene.bodies[i], scene.bodies[j], scene.tolerances)
        for owner, other, params in ((j, i, pair.params_b), (i, j, pair.params_a)):
            gaps = s.gap_families[owner]
            slack = scene.tolerances.eps_angle
            hit_sets = [{k for k, g in enumerate(gaps) if g.open_arc.contains(t, slack)} for t in params]
            if not set.intersection(*hit_sets):
                violations.append(
                    LemmaViolation("crossings_share_gap", owner, other, pair.points[0], "crossings in different gaps")
                )

    for j in range(scene.n):
        gaps = s.gap_families[j]
        for i in range(scene.n):
            if i == j:
                continue
            body = scene.bodies[i]
            used = set()
            for k in s.edge_families[i]:
                q = Point2.from_array(body.boundary_at_normal(s.edges[k].normal_arc.midpoint))
                used.update(_gaps_containing(gaps, q, eps)[:1])
            if len(used) > 1:
                violations.append(
                    LemmaViolation("family_in_single_gap", j, i, None, f"family spans gaps {sorted(used)}")
                )

    if violations:
        logger.warning("%d gap check violations", len(violations))
    return LemmaReport(tuple(violations))


# --------------------------------------------------------------------------- #
# Famille à arête unique
# --------------------------------------------------------------------------- #


def find_singleton_edge_family(s: CPolygonStruct) -> int:
    for j, family in enumerate(s.edge_families):
        if len(family) == 1:
            return j
    raise TheoryViolation(f"no singleton edge family (sizes {s.family_sizes})")


def gap_descent_singleton(s: CPolygonStruct, start: int | None = None) -> int:
    """Descente dans les lacunes vers une famille à arête unique.

    On part d'une famille multi-arêtes k et d'une de ses lacunes: les arêtes
    de H entre deux arêtes consécutives de k. L'arête adjacente au premier
    sommet borne appartient à une famille l; si l a plusieurs arêtes, elles
    sont toutes dans cette lacune, et la lacune de l entre ses deux premières
    arêtes y est strictement contenue. On recommence jusqu'à une famille
    singleton.
    """
    owners = [e.owner for e in s.edges]
    count = len(owners)
    if start is None:
        start = next((j for j, f in enumerate(s.edge_families) if len(f) > 1), 0)
    if len(s.edge_families[start]) == 1:
        return start

    first = s.edge_families[start][0]
    window = []
    pos = (first + 1) % count
    while owners[pos] != start:
        window.append(pos)
        pos = (pos + 1) % count

    while window:
        family = owners[window[0]]
        if len(s.edge_families[family]) == 1:
            return family
        hits = [k for k, pos in enumerate(window) if owners[pos] == family]
        if len(hits) < len(s.edge_families[family]) or len(hits) < 2:
            raise TheoryViolation(f"family {family} is not contained in a single gap")
        window = window[hits[0] + 1 : hits[1]]
    raise TheoryViolation("gap descent reached an empty gap")
