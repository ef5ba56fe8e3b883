"""
Oracle indépendant: trace bd(H) par lancer de rayons depuis un point
intérieur et détecte les points singuliers par concentration de l'angle de
rotation. N'utilise que signed_membership (jamais γ), ce qui le rend valable
aussi pour les polygones arrondis non strictement convexes.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.optimize import linear_sum_assignment

from . import config
from .domains import PlacedBody, interior_witness, max_membership
from .engine import SceneSpec
from .errors import NoInterior
from .geometry import DEFAULT_TOLERANCES, TWO_PI, Point2, Tolerances, unit_vector, wrap_pi

logger = logging.getLogger(__name__)

_MAX_DOUBLINGS = 60
_LOCATE_SHRINK = 10.0
_LOCATE_MIN_STEP = 1e-7


@dataclass(frozen=True)
class TracedBoundary:
    anchor: Point2
    samples: np.ndarray = field(repr=False)
    directions: np.ndarray = field(repr=False)
    bodies: tuple[PlacedBody, ...] = field(repr=False)
    tolerances: Tolerances = DEFAULT_TOLERANCES

    @property
    def points(self) -> list[Point2]:
        return [Point2.from_array(p) for p in self.samples]

    def residual(self) -> float:
        """max |max-membership| sur les échantillons."""
        return float(np.max(np.abs(max_membership(self.bodies, self.samples))))

    def is_convex(self, eps: float | None = None) -> bool:
        eps = self.tolerances.eps_geom if eps is None else eps
        seg = np.roll(self.samples, -1, axis=0) - self.samples
        nxt = np.roll(seg, -1, axis=0)
        cross = seg[:, 0] * nxt[:, 1] - seg[:, 1] * nxt[:, 0]
        return bool(np.all(cross >= -eps))


@dataclass(frozen=True)
class OracleReport:
    singular_points: tuple[tuple[Point2, float], ...] = ()

    @property
    def count(self) -> int:
        return len(self.singular_points)

    @property
    def points(self) -> list[Point2]:
        return [p for p, _ in self.singular_points]


def shoot_rays(
    bodies: Sequence[PlacedBody],
    anchor: Point2,
    directions: np.ndarray,
    tol: Tolerances = DEFAULT_TOLERANCES,
) -> np.ndarray:
    """Points de bord sur les rayons anchor + t·u(φ): doublement puis dichotomie sur t."""
    directions = np.asarray(directions, dtype=float)
    origin = anchor.as_array()
    dirs = unit_vector(directions)

    def outside(t: np.ndarray) -> np.ndarray:
        return max_membership(bodies, origin + t[:, None] * dirs) > 0.0

    hi = np.ones(directions.shape[0])
    for _ in range(_MAX_DOUBLINGS):
        out = outside(hi)
        if out.all():
            break
        hi = np.where(out, hi, 2.0 * hi)
    else:
        raise NoInterior("ray shooting never left the intersection (unbounded?)")

    lo = np.zeros_like(hi)
    iterations = max(1, int(math.ceil(math.log2(float(hi.max()) / tol.refine_tol))))
    for _ in range(iterations):
        mid = 0.5 * (lo + hi)
        out = outside(mid)
        hi = np.where(out, mid, hi)
        lo = np.where(out, lo, mid)
    return origin + (0.5 * (lo + hi))[:, None] * dirs


def trace_bodies(
    bodies: Sequence[PlacedBody],
    tol: Tolerances = DEFAULT_TOLERANCES,
    samples: int = config.ORACLE_SAMPLES,
    anchor: Point2 | None = None,
) -> TracedBoundary:
    """Trace le bord de ∩ bodies (un seul corps admis) sur `samples` rayons équirépartis."""
    bodies = tuple(bodies)
    if samples < 3:
        raise ValueError(f"need at least 3 ray samples, got {samples}")
    if anchor is None:
        anchor = interior_witness(bodies, tol, refine=True)
        if anchor is None:
            raise NoInterior("no interior witness for ray shooting")
    directions = np.arange(samples) * (TWO_PI / samples)
    points = shoot_rays(bodies, anchor, directions, tol)
    return TracedBoundary(anchor, points, directions, bodies, tol)


def trace_boundary(scene: SceneSpec, samples: int = config.ORACLE_SAMPLES) -> TracedBoundary:
    if samples < 256:
        raise ValueError(f"trace_boundary needs at least 256 samples, got {samples}")
    return trace_bodies(scene.bodies, scene.tolerances, samples)


def _turning(points: np.ndarray, window: int, cyclic: bool) -> np.ndarray:
    """Angle entre sécante entrante et sortante sur une fenêtre de `window` échantillons."""
    if cyclic:
        prev = np.roll(points, window, axis=0)
        nxt = np.roll(points, -window, axis=0)
        mid = points
    else:
        prev, mid, nxt = points[: -2 * window], points[window:-window], points[2 * window :]
    s_in, s_out = mid - prev, nxt - mid
    return wrap_pi(np.arctan2(s_out[:, 1], s_out[:, 0]) - np.arctan2(s_in[:, 1], s_in[:, 0]))


def _suppress(turning: np.ndarray, candidates: np.ndarray, window: int) -> list[int]:
    """Suppression des non-maxima: une seule candidate par voisinage de `window` rayons."""
    count = turning.shape[0]
    kept: list[int] = []
    for i in sorted(candidates, key=lambda k: (-turning[k], k)):
        if all(min(abs(i - j), count - abs(i - j)) > window for j in kept):
            kept.append(int(i))
    return sorted(kept)


def _locate_corner(
    bodies: Sequence[PlacedBody],
    anchor: Point2,
    phi: float,
    step: float,
    tol: Tolerances,
) -> tuple[np.ndarray, float]:
    """Coin par intersection de sécantes de part et d'autre, en resserrant le pas."""
    origin = anchor.as_array()
    corner = shoot_rays(bodies, anchor, np.array([phi]), tol)[0]
    angle = 0.0
    while step >= _LOCATE_MIN_STEP:
        offsets = np.array([-2.0, -1.0, 1.0, 2.0]) * step
        a2, a1, b1, b2 = shoot_rays(bodies, anchor, phi + offsets, tol)
        d_in, d_out = a1 - a2, b2 - b1
        denom = d_in[0] * d_out[1] - d_in[1] * d_out[0]
        if abs(denom) <= 1e-12 * float(np.hypot(*d_in) * np.hypot(*d_out)):
            break
        s = ((b1[0] - a1[0]) * d_out[1] - (b1[1] - a1[1]) * d_out[0]) / denom
        corner = a1 + s * d_in
        angle = abs(float(wrap_pi(math.atan2(d_out[1], d_out[0]) - math.atan2(d_in[1], d_in[0]))))
        rel = corner - origin
        phi = math.atan2(rel[1], rel[0])
        step /= _LOCATE_SHRINK
    return corner, angle


def detect_singular(
    trace: TracedBoundary,
    tau: float = config.ORACLE_TAU,
    levels: int = config.ORACLE_LEVELS,
    window: int = config.ORACLE_WINDOW,
    ratio: float = config.ORACLE_RATIO,
    dedup: float = config.ORACLE_DEDUP,
) -> OracleReport:
    """Points singuliers de la trace.

    Un coin concentre sa rotation entre deux rayons: raffiner la densité
    angulaire la conserve. Un arc lisse très courbé voit sa rotation
    fenêtrée diminuer de moitié à chaque niveau; il est rejeté dès que le
    rapport entre deux niveaux tombe sous `ratio`.
    """
    if tau <= 0.0 or levels < 1 or window < 1:
        raise ValueError("detect_singular needs tau > 0, levels >= 1 and window >= 1")
    turning = _turning(trace.samples, window, cyclic=True)
    raw = np.flatnonzero(turning > tau)
    candidates = _suppress(turning, raw, window)
    step0 = TWO_PI / trace.directions.shape[0]

    found: list[tuple[np.ndarray, float]] = []
    for i in candidates:
        phi, previous, step = float(trace.directions[i]), float(turning[i]), step0
        confirmed = True
        for _ in range(levels):
            step /= 2.0
            dirs = phi + np.arange(-3 * window, 3 * window + 1) * step
            pts = shoot_rays(trace.bodies, trace.anchor, dirs, trace.tolerances)
            local = _turning(pts, window, cyclic=False)
            k = int(np.argmax(local))
            value = float(local[k])
            if value <= tau or value < ratio * previous:
                confirmed = False
                break
            phi, previous = float(dirs[k + window]), value
        if not confirmed:
            logger.debug("rejected smooth high-curvature candidate at φ=%.6f", trace.directions[i])
            continue
        corner, angle = _locate_corner(trace.bodies, trace.anchor, phi, (window + 1) * step, trace.tolerances)
        found.append((corner, angle if angle > tau else previous))

    merged: list[tuple[np.ndarray, float]] = []
    for point, angle in sorted(found, key=lambda item: -item[1]):
        if all(np.hypot(*(point - q)) > dedup for q, _ in merged):
            merged.append((point, angle))
    anchor = trace.anchor.as_array()
    merged.sort(key=lambda item: math.atan2(*(item[0] - anchor)[::-1]) % TWO_PI)
    return OracleReport(tuple((Point2.from_array(p), a) for p, a in merged))


def run_oracle(
    scene: SceneSpec,
    samples: int | None = None,
    tau: float | None = None,
    levels: int | None = None,
) -> OracleReport:
    trace = trace_boundary(scene, samples or config.ORACLE_SAMPLES)
    return detect_singular(
        trace,
        tau=config.ORACLE_TAU if tau is None else tau,
        levels=config.ORACLE_LEVELS if levels is None else levels,
    )


def oracle_vertex_count(scene: SceneSpec) -> int:
    return run_oracle(scene).count


def match_points(a: Sequence[Point2], b: Sequence[Point2]) -> tuple[list[tuple[int, int]], float]:
    """Appariement de coût minimal (hongrois); renvoie les paires et la plus grande distance appariée."""
    if not a or not b:
        return [], 0.0
    pa = np.array([p.as_array() for p in a])
    pb = np.array([p.as_array() for p in b])
    cost = np.hypot(pa[:, None, 0] - pb[None, :, 0], pa[:, None, 1] - pb[None, :, 1])
    rows, cols = linear_sum_assignment(cost)
    pairs = [(int(r), int(c)) for r, c in zip(rows, cols)]
    return pairs, float(cost[rows, cols].max())
