"""
Primitives géométriques partagées par tous les modules.

- Point2: point du plan (coordonnées finies)
- angles normaux: flottants canonisés dans [0, 2π)
- NormalArc: arc de directions normales, sens trigonométrique, avec
  une valeur distinguée FULL_CIRCLE
- Tolerances: tolérances numériques portées par chaque scène
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

TWO_PI = 2.0 * math.pi

# Un angle normal est un float canonisé dans [0, 2π) par normalize_angle.
NormalAngle = float


def normalize_angle(theta: float) -> NormalAngle:
    """Unique site de normalisation des angles: renvoie θ mod 2π dans [0, 2π)."""
    t = math.fmod(float(theta), TWO_PI)
    if t < 0.0:
        t += TWO_PI
    if t >= TWO_PI:  # -1e-17 + 2π arrondit à 2π
        t = 0.0
    return t


def normalize_angles(theta: np.ndarray) -> np.ndarray:
    """Version vectorisée de normalize_angle."""
    t = np.mod(np.asarray(theta, dtype=float), TWO_PI)
    return np.where(t >= TWO_PI, 0.0, t)


def wrap_pi(x: np.ndarray) -> np.ndarray:
    """Ramène une différence d'angles dans [-π, π)."""
    return np.mod(np.asarray(x, dtype=float) + math.pi, TWO_PI) - math.pi


def unit_vector(theta) -> np.ndarray:
    """u(θ) = (cos θ, sin θ), de forme (..., 2)."""
    theta = np.asarray(theta, dtype=float)
    return np.stack([np.cos(theta), np.sin(theta)], axis=-1)


def antipode(theta: NormalAngle) -> NormalAngle:
    """θ + π ramené dans [0, 2π)."""
    return normalize_angle(theta + math.pi)


@dataclass(frozen=True)
class Point2:
    x: float
    y: float

    def __post_init__(self) -> None:
        x, y = float(self.x), float(self.y)
        if not (math.isfinite(x) and math.isfinite(y)):
            raise ValueError(f"Point2 requires finite coordinates, got ({x}, {y})")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)

    @classmethod
    def from_array(cls, arr) -> Point2:
        arr = np.asarray(arr, dtype=float)
        return cls(float(arr[0]), float(arr[1]))

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y], dtype=float)

    def distance(self, other: Point2) -> float:
        return math.hypot(self.x - other.x, self.y - other.y)

    def __iter__(self):
        yield self.x
        yield self.y


ORIGIN = Point2(0.0, 0.0)


@dataclass(frozen=True)
class NormalArc:
    """Arc fermé de directions normales, de `start` sur `extent` radians (sens direct).

    L'arc complet est une valeur distinguée (`full=True`, voir FULL_CIRCLE):
    il n'a ni début ni fin, ce qui évite toute ambiguïté aux extrémités.
    """

    start: NormalAngle
    extent: float
    full: bool = False

    def __post_init__(self) -> None:
        if self.full:
            object.__setattr__(self, "start", 0.0)
            object.__setattr__(self, "extent", TWO_PI)
            return
        start, extent = float(self.start), float(self.extent)
        if not (math.isfinite(start) and math.isfinite(extent)):
            raise ValueError("NormalArc requires finite start and extent")
        if not 0.0 < extent <= TWO_PI:
            raise ValueError(f"NormalArc extent must lie in (0, 2π], got {extent}")
        object.__setattr__(self, "start", normalize_angle(start))
        object.__setattr__(self, "extent", extent)

    @classmethod
    def full_circle(cls) -> NormalArc:
        return FULL_CIRCLE

    @classmethod
    def between(cls, a: NormalAngle, b: NormalAngle) -> NormalArc:
        """Arc parcouru dans le sens direct de a vers b (a == b est refusé)."""
        extent = normalize_angle(b - a)
        if extent == 0.0:
            raise ValueError(f"empty arc between {a} and {b}")
        return cls(a, extent)

    @property
    def end(self) -> NormalAngle:
        return normalize_angle(self.start + self.extent)

    @property
    def midpoint(self) -> NormalAngle:
        return normalize_angle(self.start + 0.5 * self.extent)

    def offset(self, theta: NormalAngle) -> float:
        """Position de θ mesurée depuis `start`, dans [0, 2π)."""
        return normalize_angle(theta - self.start)

    def contains(self, theta: NormalAngle, slack: float = 0.0) -> bool:
        if self.full:
            return True
        d = self.offset(theta)
        return d <= self.extent + slack or d >= TWO_PI - slack

    def contains_open(self, theta: NormalAngle, margin: float = 0.0) -> bool:
        """θ strictement à l'intérieur, à au moins `margin` des extrémités."""
        if self.full:
            return True
        d = self.offset(theta)
        return margin < d < self.extent - margin

    def complement(self) -> NormalArc | None:
        if self.full or self.extent >= TWO_PI:
            return None
        return NormalArc(self.end, TWO_PI - self.extent)

    def sample(self, count: int) -> np.ndarray:
        """`count` angles intérieurs, équirépartis (milieux de cellules)."""
        fractions = (np.arange(count) + 0.5) / count
        return normalize_angles(self.start + fractions * self.extent)

    def __repr__(self) -> str:
        if self.full:
            return "NormalArc(FULL)"
        return f"NormalArc(start={self.start:.6f}, extent={self.extent:.6f})"


FULL_CIRCLE = NormalArc(0.0, TWO_PI, full=True)


def arc_contains(arc: NormalArc, theta: NormalAngle) -> bool:
    return arc.contains(theta)


def arc_intersect(a: NormalArc, b: NormalArc) -> list[NormalArc]:
    """Intersection ensembliste de deux arcs: 0, 1 ou 2 morceaux maximaux disjoints.

    Les contacts ponctuels (étendue nulle) sont ignorés.
    """
    if a.full:
        return [b]
    if b.full:
        return [a]
    # repère de a: A = [0, a.extent]
    b_start = a.offset(b.start)
    b_end = b_start + b.extent
    pieces = [(b_start, min(b_end, TWO_PI))]
    if b_end > TWO_PI:
        pieces.append((0.0, b_end - TWO_PI))
    clipped = []
    for lo, hi in pieces:
        lo, hi = max(lo, 0.0), min(hi, a.extent)
        if hi > lo:
            clipped.append((lo, hi))
    clipped.sort()
    # a d'étendue 2π: les morceaux se touchent à travers 0 ≡ 2π
    if len(clipped) == 2 and clipped[0][0] == 0.0 and clipped[1][1] >= TWO_PI:
        clipped = [(clipped[1][0], clipped[1][1] + clipped[0][1])]
    return [NormalArc(a.start + lo, min(hi - lo, TWO_PI)) for lo, hi in clipped]


@dataclass(frozen=True)
class Tolerances:
    """Tolérances numériques, portées par chaque scène (jamais globales)."""

    eps_geom: float = 1e-9
    eps_angle: float = 1e-7
    refine_tol: float = 1e-12
    scan_samples: int = 4096

    def __post_init__(self) -> None:
        for name in ("eps_geom", "eps_angle", "refine_tol"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0.0):
                raise ValueError(f"{name} must be strictly positive, got {value}")
        if not self.refine_tol < self.eps_geom < 1.0:
            raise ValueError("tolerances require refine_tol < eps_geom < 1")
        if int(self.scan_samples) != self.scan_samples or self.scan_samples < 64:
            raise ValueError(f"scan_samples must be an integer >= 64, got {self.scan_samples}")
        object.__setattr__(self, "scan_samples", int(self.scan_samples))

    def with_overrides(self, **overrides) -> Tolerances:
        return replace(self, **{k: v for k, v in overrides.items() if v is not None})


DEFAULT_TOLERANCES = Tolerances()
