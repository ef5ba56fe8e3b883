"""
Modèles de domaines convexes C et application des homothéties.

Chaque domaine est exposé via une interface uniforme (DomainModel):
    - support(θ): fonction d'appui h_C(u(θ))
    - boundary_at_normal(θ): application de Gauss inverse γ(θ)
    - singular_features(): les m points singuliers et leurs arcs de normales
    - interior_point(), signed_membership(q)
    - is_strictly_convex(), is_smooth()

Toutes les méthodes acceptent un angle seul ou un tableau numpy d'angles
(résultats de forme (..., 2) pour les points).
"""
from __future__ import annotations

import logging
import math
from abc import ABC, abstractmethod
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np
from scipy.optimize import minimize

from .errors import DegenerateGeometry, ImproperIntersection
from .geometry import (
    DEFAULT_TOLERANCES,
    FULL_CIRCLE,
    ORIGIN,
    TWO_PI,
    NormalArc,
    Point2,
    Tolerances,
    arc_intersect,
    normalize_angle,
    normalize_angles,
    unit_vector,
)

logger = logging.getLogger(__name__)


def _as_points(q) -> tuple[np.ndarray, bool]:
    """Point2, tableau (2,) ou (..., 2) → (tableau, entrée ponctuelle ?)."""
    if isinstance(q, Point2):
        return q.as_array(), True
    arr = np.asarray(q, dtype=float)
    return arr, arr.ndim == 1


def _scalar_or_array(value: np.ndarray):
    value = np.asarray(value)
    return float(value) if value.ndim == 0 else value


def _rotate(points: np.ndarray, angle: float) -> np.ndarray:
    c, s = math.cos(angle), math.sin(angle)
    x, y = points[..., 0], points[..., 1]
    return np.stack([c * x - s * y, s * x + c * y], axis=-1)


@dataclass(frozen=True)
class SingularFeature:
    point: Point2
    normal_arc: NormalArc


class DomainModel(ABC):
    """Domaine convexe compact vu à travers son application de Gauss inverse.

    γ est la paramétrisation canonique du bord: les homothéties (λ > 0)
    conservent les normales, donc tous les homothétiques partagent ce paramètre.
    """

    kind: str = ""

    _RADIAL_GRID = 1024
    _RADIAL_STEPS = 42

    @abstractmethod
    def boundary_at_normal(self, theta):
        """γ(θ): point du bord dont la droite d'appui a pour normale u(θ)."""

    @abstractmethod
    def parameters(self) -> dict:
        """Paramètres du domaine, nommés comme dans le schéma JSON des scènes."""

    def support(self, theta):
        theta = np.asarray(theta, dtype=float)
        value = np.sum(self.boundary_at_normal(theta) * unit_vector(theta), axis=-1)
        return _scalar_or_array(value)

    def singular_features(self) -> list[SingularFeature]:
        return []

    @property
    def m(self) -> int:
        return len(self.singular_features())

    def smooth_normal_arcs(self) -> list[NormalArc]:
        """Complément des arcs singuliers: les arcs de Gauss des morceaux lisses."""
        features = sorted(self.singular_features(), key=lambda f: f.normal_arc.start)
        if not features:
            return [FULL_CIRCLE]
        arcs = []
        for cur, nxt in zip(features, features[1:] + features[:1]):
            gap = normalize_angle(nxt.normal_arc.start - cur.normal_arc.end)
            if gap > 0.0:
                arcs.append(NormalArc(cur.normal_arc.end, gap))
        return arcs

    def interior_point(self) -> Point2:
        pts = self.boundary_at_normal(np.linspace(0.0, TWO_PI, 64, endpoint=False))
        return Point2.from_array(pts.mean(axis=0))

    def is_strictly_convex(self) -> bool:
        return True

    def is_smooth(self) -> bool:
        return not self.singular_features()

    @cached_property
    def _center(self) -> np.ndarray:
        return self.interior_point().as_array()

    @cached_property
    def _radial_table(self) -> tuple[np.ndarray, np.ndarray]:
        thetas = np.linspace(0.0, TWO_PI, self._RADIAL_GRID + 1)
        rel = self.boundary_at_normal(thetas) - self._center
        alphas = np.unwrap(np.arctan2(rel[:, 1], rel[:, 0]))
        return thetas, alphas

    def radial(self, phi):
        """Fonction radiale depuis interior_point(), par inversion 1D de γ.

        L'angle polaire de γ(θ) - c croît avec θ; on encadre sur une grille
        puis on dichotomise. Le rayon est lu sur la droite d'appui en θ*, ce
        qui reste exact sur les segments plats et aux coins.
        """
        thetas, alphas = self._radial_table
        center = self._center
        phi = np.asarray(phi, dtype=float)
        target = alphas[0] + np.mod(phi - alphas[0], TWO_PI)
        k = np.clip(np.searchsorted(alphas, target, side="right") - 1, 0, self._RADIAL_GRID - 1)
        lo, hi, alpha_lo = thetas[k], thetas[k + 1], alphas[k]
        for _ in range(self._RADIAL_STEPS):
            mid = 0.5 * (lo + hi)
            rel = self.boundary_at_normal(mid) - center
            alpha_mid = alpha_lo + np.mod(np.arctan2(rel[..., 1], rel[..., 0]) - alpha_lo + math.pi, TWO_PI) - math.pi
            below = alpha_mid < target
            lo = np.where(below, mid, lo)
            hi = np.where(below, hi, mid)
        theta = 0.5 * (lo + hi)
        u_theta = unit_vector(theta)
        h_rel = np.asarray(self.support(theta)) - np.sum(center * u_theta, axis=-1)
        return h_rel / np.sum(unit_vector(phi) * u_theta, axis=-1)

    def signed_membership(self, q):
        """< 0 strictement dedans, 0 sur le bord, > 0 dehors: |q - c| - r(dir(q - c))."""
        pts, single = _as_points(q)
        rel = pts - self._center
        dist = np.hypot(rel[..., 0], rel[..., 1])
        value = dist - self.radial(np.arctan2(rel[..., 1], rel[..., 0]))
        return float(value) if single else value

    def __repr__(self) -> str:
        params = ", ".join(f"{k}={v!r}" for k, v in self.parameters().items() if k != "kind")
        return f"{type(self).__name__}({params})"


class Disk(DomainModel):
    kind = "disk"

    def boundary_at_normal(self, theta):
        return unit_vector(theta)

    def support(self, theta):
        return _scalar_or_array(np.ones_like(np.asarray(theta, dtype=float)))

    def interior_point(self) -> Point2:
        return ORIGIN

    def radial(self, phi):
        return np.ones_like(np.asarray(phi, dtype=float))

    def signed_membership(self, q):
        pts, single = _as_points(q)
        value = np.hypot(pts[..., 0], pts[..., 1]) - 1.0
        return float(value) if single else value

    def parameters(self) -> dict:
        return {"kind": self.kind}


class Ellipse(DomainModel):
    kind = "ellipse"

    def __init__(self, a: float, b: float, rotation: float = 0.0):
        if not (math.isfinite(a) and math.isfinite(b) and a > 0 and b > 0):
            raise ValueError(f"ellipse axes must be positive, got a={a}, b={b}")
        self.a, self.b, self.rotation = float(a), float(b), float(rotation)

    def support(self, theta):
        psi = np.asarray(theta, dtype=float) - self.rotation
        return _scalar_or_array(np.hypot(self.a * np.cos(psi), self.b * np.sin(psi)))

    def boundary_at_normal(self, theta):
        psi = np.asarray(theta, dtype=float) - self.rotation
        c, s = np.cos(psi), np.sin(psi)
        h = np.hypot(self.a * c, self.b * s)
        local = np.stack([self.a * self.a * c / h, self.b * self.b * s / h], axis=-1)
        return _rotate(local, self.rotation)

    def interior_point(self) -> Point2:
        return ORIGIN

    def radial(self, phi):
        psi = np.asarray(phi, dtype=float) - self.rotation
        return 1.0 / np.hypot(np.cos(psi) / self.a, np.sin(psi) / self.b)

    def parameters(self) -> dict:
        return {"kind": self.kind, "a": self.a, "b": self.b, "rotation": self.rotation}


class Superellipse(DomainModel):
    """|x/a|^p + |y/b|^p <= 1, p > 1.

    γ en forme close via l'exposant conjugué q = p/(p-1):
    h(θ) = (|a cos θ|^q + |b sin θ|^q)^(1/q).
    """

    kind = "superellipse"

    def __init__(self, p: float, a: float = 1.0, b: float = 1.0):
        if not (math.isfinite(p) and p > 1.0):
            raise ValueError(f"superellipse exponent must be > 1, got p={p}")
        if not (math.isfinite(a) and math.isfinite(b) and a > 0 and b > 0):
            raise ValueError(f"superellipse axes must be positive, got a={a}, b={b}")
        self.p, self.a, self.b = float(p), float(a), float(b)
        self._q = self.p / (self.p - 1.0)

    def support(self, theta):
        theta = np.asarray(theta, dtype=float)
        q = self._q
        ac, bs = np.abs(self.a * np.cos(theta)), np.abs(self.b * np.sin(theta))
        return _scalar_or_array((ac**q + bs**q) ** (1.0 / q))

    def boundary_at_normal(self, theta):
        theta = np.asarray(theta, dtype=float)
        c, s = np.cos(theta), np.sin(theta)
        h = np.asarray(self.support(theta))
        e = self._q - 1.0
        x = self.a * np.sign(c) * (np.abs(self.a * c) / h) ** e
        y = self.b * np.sign(s) * (np.abs(self.b * s) / h) ** e
        return np.stack([x, y], axis=-1)

    def interior_point(self) -> Point2:
        return ORIGIN

    def radial(self, phi):
        phi = np.asarray(phi, dtype=float)
        p = self.p
        return (np.abs(np.cos(phi) / self.a) ** p + np.abs(np.sin(phi) / self.b) ** p) ** (-1.0 / p)

    def parameters(self) -> dict:
        return {"kind": self.kind, "p": self.p, "a": self.a, "b": self.b}


@dataclass(frozen=True)
class Circle:
    center: Point2
    radius: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.radius) and self.radius > 0):
            raise ValueError(f"disk radius must be positive, got {self.radius}")


def _inside_arc(ci: Circle, cj: Circle) -> NormalArc | None:
    """Directions θ telles que ci.center + ci.radius·u(θ) est dans le disque cj.

    Renvoie None si l'ensemble est vide, FULL_CIRCLE s'il couvre tout.
    """
    dx, dy = cj.center.x - ci.center.x, cj.center.y - ci.center.y
    d = math.hypot(dx, dy)
    if d == 0.0:
        return FULL_CIRCLE if ci.radius <= cj.radius else None
    kappa = (ci.radius**2 + d * d - cj.radius**2) / (2.0 * ci.radius * d)
    if kappa <= -1.0:
        return FULL_CIRCLE
    if kappa >= 1.0:
        return None
    half = math.acos(kappa)
    return NormalArc(math.atan2(dy, dx) - half, 2.0 * half)


class BallPolygon(DomainModel):
    """Intersection d'au moins deux disques (polygone de boules).

    Les points singuliers sont les jonctions entre arcs de cercles, calculées
    en forme close à partir des paires de cercles; aucune recherche de racine.
    """

    kind = "ball_polygon"

    def __init__(self, disks: Iterable[Circle | tuple], tol: Tolerances = DEFAULT_TOLERANCES):
        self.disks: tuple[Circle, ...] = tuple(
            d if isinstance(d, Circle) else Circle(Point2(*d[0]), float(d[1])) for d in disks
        )
        if len(self.disks) < 2:
            raise ValueError("a ball polygon needs at least 2 disks")
        self._check_pairs(tol)

        pieces: list[tuple[int, NormalArc]] = []
        for i, ci in enumerate(self.disks):
            arcs = [FULL_CIRCLE]
            for j, cj in enumerate(self.disks):
                if i == j:
                    continue
                inside = _inside_arc(ci, cj)
                if inside is None:
                    arcs = []
                    break
                arcs = [piece for arc in arcs for piece in arc_intersect(arc, inside)]
            pieces.extend((i, arc) for arc in arcs if arc.extent > tol.eps_angle)

        if not pieces:
            raise ImproperIntersection("ball polygon has empty interior")
        contributors = {i for i, _ in pieces}
        missing = sorted(set(range(len(self.disks))) - contributors)
        if missing:
            raise ImproperIntersection(f"disk {missing[0]} is redundant (intersection not reduced)")

        pieces.sort(key=lambda item: item[1].start)
        features: list[SingularFeature] = []
        for (i, cur), (_, nxt) in zip(pieces, pieces[1:] + pieces[:1]):
            gap = normalize_angle(nxt.start - cur.end)
            if gap <= tol.eps_angle:
                raise DegenerateGeometry("tangential junction between two circular arcs")
            ci = self.disks[i]
            point = ci.center.as_array() + ci.radius * unit_vector(cur.end)
            features.append(SingularFeature(Point2.from_array(point), NormalArc(cur.end, gap)))

        self._pieces = tuple(pieces)
        self._features = tuple(features)
        self._starts = np.array([arc.start for _, arc in pieces])
        self._extents = np.array([arc.extent for _, arc in pieces])
        self._piece_circle = np.array([i for i, _ in pieces])
        self._centers = np.array([d.center.as_array() for d in self.disks])
        self._radii = np.array([d.radius for d in self.disks])
        self._vertices = np.array([f.point.as_array() for f in features])
        logger.debug("ball polygon with %d disks, m=%d", len(self.disks), len(features))

    def _check_pairs(self, tol: Tolerances) -> None:
        for i, ci in enumerate(self.disks):
            for j in range(i + 1, len(self.disks)):
                cj = self.disks[j]
                d = ci.center.distance(cj.center)
                if d < tol.eps_geom and abs(ci.radius - cj.radius) < tol.eps_geom:
                    raise ImproperIntersection(f"disks {i} and {j} coincide (intersection not reduced)")
                if d >= tol.eps_geom and (
                    abs(d - (ci.radius + cj.radius)) < tol.eps_geom
                    or abs(d - abs(ci.radius - cj.radius)) < tol.eps_geom
                ):
                    raise DegenerateGeometry(f"circles {i} and {j} are tangent")
                if d > ci.radius + cj.radius:
                    raise ImproperIntersection("ball polygon has empty interior")

    @property
    def arcs(self) -> tuple[tuple[int, NormalArc], ...]:
        """(indice du disque, arc de normales) de chaque morceau lisse, triés."""
        return self._pieces

    def boundary_at_normal(self, theta):
        theta = normalize_angles(theta)
        idx = np.searchsorted(self._starts, theta, side="right") - 1
        idx = np.where(idx < 0, len(self._starts) - 1, idx)
        offset = np.mod(theta - self._starts[idx], TWO_PI)
        on_arc = np.asarray(offset <= self._extents[idx])
        circle = self._piece_circle[idx]
        radius = np.asarray(self._radii[circle])[..., None]
        arc_pts = self._centers[circle] + radius * unit_vector(theta)
        return np.where(on_arc[..., None], arc_pts, self._vertices[idx])

    def singular_features(self) -> list[SingularFeature]:
        return list(self._features)

    def smooth_normal_arcs(self) -> list[NormalArc]:
        return [arc for _, arc in self._pieces]

    def signed_membership(self, q):
        # max_i(|q - c_i| - r_i): même signe et même lieu d'annulation que la fonction radiale
        pts, single = _as_points(q)
        rel = pts[..., None, :] - self._centers
        value = np.max(np.hypot(rel[..., 0], rel[..., 1]) - self._radii, axis=-1)
        return float(value) if single else value

    def parameters(self) -> dict:
        return {
            "kind": self.kind,
            "disks": [{"cx": d.center.x, "cy": d.center.y, "r": d.radius} for d in self.disks],
        }


class RoundedPolygon(DomainModel):
    """Polygone régulier à coins arrondis: lisse mais PAS strictement convexe.

    Normales des faces en 2πk/n; le polygone intérieur (apothème A - r) est
    épaissi par un disque de rayon r.
    """

    kind = "rounded_polygon"

    def __init__(self, n: int, apothem: float, corner_radius: float):
        if int(n) != n or n < 3:
            raise ValueError(f"rounded polygon needs an integer n >= 3, got {n}")
        if not (math.isfinite(apothem) and apothem > 0):
            raise ValueError(f"apothem must be positive, got {apothem}")
        if not (0.0 < corner_radius < apothem):
            raise ValueError(
                f"corner_radius must lie in (0, apothem) so straight segments remain, got {corner_radius}"
            )
        self.n, self.apothem, self.corner_radius = int(n), float(apothem), float(corner_radius)
        self._sector = TWO_PI / self.n
        self._inner_circumradius = (self.apothem - self.corner_radius) / math.cos(math.pi / self.n)

    def face_normals(self) -> np.ndarray:
        return np.arange(self.n) * self._sector

    def boundary_at_normal(self, theta):
        theta = normalize_angles(theta)
        k = np.minimum(np.floor(theta / self._sector), self.n - 1)
        off = theta - k * self._sector
        corner = self._inner_circumradius * unit_vector((k + 0.5) * self._sector)
        rounded = corner + self.corner_radius * unit_vector(theta)
        # normale exacte d'une face: milieu du segment plat
        face = self.apothem * unit_vector(k * self._sector)
        return np.where(np.asarray(off == 0.0)[..., None], face, rounded)

    def interior_point(self) -> Point2:
        return ORIGIN

    def is_strictly_convex(self) -> bool:
        return False

    def is_smooth(self) -> bool:
        return True

    def parameters(self) -> dict:
        return {
            "kind": self.kind,
            "n": self.n,
            "apothem": self.apothem,
            "corner_radius": self.corner_radius,
        }


def make_disk() -> Disk:
    return Disk()


def make_ellipse(a: float, b: float, rotation: float = 0.0) -> Ellipse:
    return Ellipse(a, b, rotation)


def make_superellipse(p: float, a: float = 1.0, b: float = 1.0) -> Superellipse:
    return Superellipse(p, a, b)


def make_ball_polygon(disks: Sequence[Circle | tuple], tol: Tolerances = DEFAULT_TOLERANCES) -> BallPolygon:
    return BallPolygon(disks, tol)


def make_rounded_polygon(n: int, apothem: float, corner_radius: float) -> RoundedPolygon:
    return RoundedPolygon(n, apothem, corner_radius)


@dataclass(frozen=True)
class HomothetSpec:
    center: Point2
    scale: float = 1.0

    def __post_init__(self) -> None:
        if not isinstance(self.center, Point2):
            object.__setattr__(self, "center", Point2(*self.center))
        if not (math.isfinite(self.scale) and self.scale > 0):
            raise ValueError(f"homothet scale must be positive and finite, got {self.scale}")
        object.__setattr__(self, "scale", float(self.scale))


IDENTITY = HomothetSpec(ORIGIN, 1.0)


@dataclass(frozen=True)
class PlacedBody:
    """H = x + λC: fonction d'appui λh + <x, u>, γ_H = x + λγ."""

    domain: DomainModel
    placement: HomothetSpec = IDENTITY

    @property
    def scale(self) -> float:
        return self.placement.scale

    @cached_property
    def _offset(self) -> np.ndarray:
        return self.placement.center.as_array()

    def support(self, theta):
        theta = np.asarray(theta, dtype=float)
        value = self.scale * np.asarray(self.domain.support(theta)) + np.sum(
            self._offset * unit_vector(theta), axis=-1
        )
        return _scalar_or_array(value)

    def boundary_at_normal(self, theta):
        return self._offset + self.scale * self.domain.boundary_at_normal(theta)

    def singular_features(self) -> list[SingularFeature]:
        return [
            SingularFeature(Point2.from_array(self._offset + self.scale * f.point.as_array()), f.normal_arc)
            for f in self.domain.singular_features()
        ]

    def interior_point(self) -> Point2:
        return Point2.from_array(self._offset + self.scale * self.domain.interior_point().as_array())

    def signed_membership(self, q):
        pts, single = _as_points(q)
        value = self.scale * np.asarray(self.domain.signed_membership((pts - self._offset) / self.scale))
        return float(value) if single else value

    def is_strictly_convex(self) -> bool:
        return self.domain.is_strictly_convex()

    def is_smooth(self) -> bool:
        return self.domain.is_smooth()


def place(domain: DomainModel, spec: HomothetSpec = IDENTITY) -> PlacedBody:
    return PlacedBody(domain, spec)


def max_membership(bodies: Sequence[PlacedBody], q) -> np.ndarray:
    """max_i signed_membership_i(q): < 0 exactement à l'intérieur de l'intersection."""
    pts, _ = _as_points(q)
    return np.max(np.stack([np.asarray(b.signed_membership(pts)) for b in bodies]), axis=0)


def _bounding_box(bodies: Sequence[PlacedBody]) -> tuple[float, float, float, float] | None:
    right = min(b.support(0.0) for b in bodies)
    top = min(b.support(0.5 * math.pi) for b in bodies)
    left = max(-b.support(math.pi) for b in bodies)
    bottom = max(-b.support(1.5 * math.pi) for b in bodies)
    if left >= right or bottom >= top:
        return None
    return left, right, bottom, top


def interior_witness(
    bodies: Sequence[PlacedBody],
    tol: Tolerances = DEFAULT_TOLERANCES,
    candidates: Iterable[Point2] = (),
    refine: bool = False,
) -> Point2 | None:
    """Point strictement intérieur à tous les corps (profondeur > eps_geom), ou None.

    Candidats: points fournis (milieux de cordes), points intérieurs des corps
    et leur barycentre; puis raffinement local (Nelder-Mead sur la profondeur)
    et, en dernier recours, une grille dense sur la boîte englobante.
    `refine=True` pousse toujours le témoin vers le point le plus profond.
    """
    def depth(z: np.ndarray) -> float:
        return float(max_membership(bodies, z))

    pts = [c.as_array() for c in candidates] + [b.interior_point().as_array() for b in bodies]
    pts = np.array(pts)
    pts = np.vstack([pts, pts.mean(axis=0)])
    values = max_membership(bodies, pts)
    best, best_val = pts[int(np.argmin(values))], float(np.min(values))

    if best_val >= -tol.eps_geom or refine:
        result = minimize(depth, best, method="Nelder-Mead", options={"xatol": 1e-10, "fatol": 1e-13, "maxiter": 300})
        if result.fun < best_val:
            best, best_val = np.asarray(result.x), float(result.fun)

    if best_val >= -tol.eps_geom:
        box = _bounding_box(bodies)
        if box is None:
            return None
        left, right, bottom, top = box
        gx, gy = np.meshgrid(np.linspace(left, right, 65), np.linspace(bottom, top, 65))
        grid = np.stack([gx.ravel(), gy.ravel()], axis=-1)
        values = max_membership(bodies, grid)
        k = int(np.argmin(values))
        if values[k] < best_val:
            best, best_val = grid[k], float(values[k])
        if best_val >= -tol.eps_geom:
            logger.debug("interior witness search failed (best depth %.3e)", best_val)
            return None

    return Point2.from_array(best)
