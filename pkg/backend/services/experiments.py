"""
Génération aléatoire de scènes et lots d'essais.

Chaque essai tire ses nombres d'un générateur Philox (Philox4x64-10) de clé
`seed` et de compteur (0, 0, 0, indice d'essai): le résultat d'un essai ne
dépend ni de l'ordre d'exécution ni du nombre de workers.
"""
from __future__ import annotations

import csv
import json
import logging
import math
import time
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from functools import partial
from pathlib import Path

import numpy as np

from .. import config
from ..constructions import (
    ConstructionParams,
    build_sharp_upper,
    build_three_circle_domain,
    build_zero_vertex,
    domain_diameter,
    notch_center,
    notch_normals,
)
from ..domains import Circle, DomainModel, HomothetSpec, place
from ..domains import Disk, Ellipse, Superellipse, make_ball_polygon
from ..engine import (
    PairKind,
    SceneSpec,
    check_gap_lemmas,
    check_proper,
    compute_structure,
    exterior_gauss_extent,
    find_singleton_edge_family,
    gap_descent_singleton,
    make_mixed_scene,
    make_scene,
    pairwise_boundary_points,
    sub_scene,
    verify_bounds,
)
from ..errors import (
    DegenerateGeometry,
    GenerationExhausted,
    ImproperIntersection,
    ModelViolation,
    NotProper,
    TheoryViolation,
)
from ..geometry import Point2, Tolerances, unit_vector
from ..models import ConstructRequest, ExperimentConfig, build_domain, domain_schema, scene_digest
from ..oracle import match_points, run_oracle

logger = logging.getLogger(__name__)

CSV_COLUMNS = [
    "trial",
    "digest",
    "n",
    "m",
    "pairwise_count",
    "inherited_count",
    "total",
    "lower",
    "upper",
    "holds",
    "oracle_count",
    "oracle_match",
    "lemma_violations",
    "singleton_family",
    "rejections",
    "notes",
]

_SMOOTH_KINDS = ("disk", "ellipse", "superellipse")
_HEMISPHERE_SLACK = 1e-7
# rejets d'une tentative: scène impropre, dégénérée, ou paire hors modèle (4 croisements en mixte)
_REJECTED = (NotProper, DegenerateGeometry, ImproperIntersection, ModelViolation)


def trial_rng(seed: int, trial: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=seed, counter=[0, 0, 0, trial]))


def random_domain(kind: str, rng: np.random.Generator, cfg: ExperimentConfig, tol: Tolerances) -> DomainModel:
    if kind == "disk":
        return Disk()
    if kind == "ellipse":
        return Ellipse(1.0, rng.uniform(*cfg.axis_range), rng.uniform(0.0, math.pi))
    if kind == "superellipse":
        return Superellipse(rng.uniform(*cfg.exponent_range), 1.0, rng.uniform(*cfg.axis_range))
    if kind == "ball_polygon":
        # k disques unité autour d'un petit cercle → m = k
        k = int(rng.integers(2, 5))
        rho = rng.uniform(0.3, 0.6)
        angles = np.arange(k) * (2.0 * math.pi / k) + rng.uniform(-0.1, 0.1, size=k) * (2.0 * math.pi / k)
        centers = rho * unit_vector(angles)
        return make_ball_polygon([Circle(Point2.from_array(c), 1.0) for c in centers], tol)
    raise ValueError(f"unknown random domain kind {kind!r}")


def _placements(
    domains: list[DomainModel],
    rng: np.random.Generator,
    cfg: ExperimentConfig,
    translative: bool,
) -> list[HomothetSpec]:
    n = len(domains)
    scales = np.ones(n) if translative else rng.uniform(*cfg.scale_range, size=n)
    if cfg.placement == "box":
        centers = rng.uniform(-cfg.box, cfg.box, size=(n, 2))
        return [HomothetSpec(Point2.from_array(c), float(s)) for c, s in zip(centers, scales)]
    # fan: la droite d'appui de normale ψ_i passe à la profondeur d_i au-delà de l'origine
    base = rng.uniform(0.0, 2.0 * math.pi)
    psi = base + np.arange(n) * (2.0 * math.pi / n) + rng.uniform(-0.3, 0.3, size=n) * (2.0 * math.pi / n)
    depth = rng.uniform(*cfg.depth_range, size=n)
    placements = []
    for domain, s, angle, d in zip(domains, scales, psi, depth):
        offset = (d - s * float(domain.support(angle))) * unit_vector(angle)
        placements.append(HomothetSpec(Point2.from_array(offset), float(s)))
    return placements


def _notch_placements(
    domains: list[DomainModel],
    rng: np.random.Generator,
    cfg: ExperimentConfig,
) -> list[HomothetSpec]:
    """Corps 0 à l'origine, les autres agrandis et tangents à lui puis enfoncés.

    Chaque entaille découpe une calotte du corps 0 autour de sa normale: le
    corps 0 garde une arête entre deux entailles, d'où total = 2(n-1) + m quand
    toutes les calottes restent séparées.
    """
    outer = domains[0]
    diameter = domain_diameter(outer)
    normals = notch_normals(outer, len(domains) - 1, rng, jitter=0.5)
    placements = [HomothetSpec(Point2(0.0, 0.0), 1.0)]
    for domain, theta in zip(domains[1:], normals):
        mu = rng.uniform(*cfg.notch_scale_range)
        delta = rng.uniform(*cfg.notch_depth_range) * diameter
        center = notch_center(outer, domain, float(theta), mu, delta)
        placements.append(HomothetSpec(Point2.from_array(center), float(mu)))
    return placements


def _draw_scene(
    cfg: ExperimentConfig,
    rng: np.random.Generator,
    n: int,
    fixed: DomainModel | None,
    tol: Tolerances,
) -> SceneSpec:
    notch = not cfg.translative and rng.uniform() < cfg.notch_fraction
    if cfg.mixed:
        domains = [random_domain(str(rng.choice(_SMOOTH_KINDS)), rng, cfg, tol) for _ in range(n)]
    else:
        domains = [fixed or random_domain(str(rng.choice(cfg.random_kinds)), rng, cfg, tol)] * n
    if notch:
        specs = _notch_placements(domains, rng, cfg)
    else:
        specs = _placements(domains, rng, cfg, cfg.translative)
    if cfg.mixed:
        return make_mixed_scene([place(d, s) for d, s in zip(domains, specs)], tol)
    return make_scene(domains[0], specs, tol)


def random_scene(cfg: ExperimentConfig, rng: np.random.Generator) -> tuple[SceneSpec, int]:
    """Scène propre et non dégénérée tirée par rejet; renvoie aussi le nombre de rejets.

    n est tiré une seule fois par essai: les rejets, plus fréquents pour n
    grand, ne biaisent pas la distribution de n.
    """
    tol = cfg.resolved_tolerances()
    fixed = build_domain(cfg.domain, tol) if cfg.domain is not None else None
    n = int(rng.integers(cfg.n, (cfg.n_max or cfg.n) + 1))
    reasons: Counter = Counter()
    for _ in range(cfg.max_retries):
        try:
            scene = _draw_scene(cfg, rng, n, fixed, tol)
            compute_structure(scene)
        except _REJECTED as exc:
            reasons[type(exc).__name__] += 1
            logger.debug("rejected scene: %s", exc)
            continue
        rejections = sum(reasons.values())
        if rejections:
            logger.debug("accepted scene (n=%d) after %d rejections %s", n, rejections, dict(reasons))
        return scene, rejections
    raise GenerationExhausted(f"no proper scene with n={n} after {cfg.max_retries} attempts ({dict(reasons)})")


@dataclass
class TrialRecord:
    trial: int
    digest: str
    n: int
    m: int
    pairwise_count: int
    inherited_count: int
    total: int
    lower: int
    upper: int
    holds: bool
    oracle_count: int | None
    oracle_match: bool | None
    lemma_violations: int
    singleton_family: int
    rejections: int
    notes: str = ""
    hereditary_failures: int = 0
    hemisphere_failures: int = 0
    inherited_capped: bool = True
    runtime: float = field(default=0.0, compare=False)

    def csv_row(self) -> list:
        row = []
        for name in CSV_COLUMNS:
            value = getattr(self, name)
            if value is None:
                value = ""
            elif isinstance(value, bool):
                value = "true" if value else "false"
            row.append(value)
        return row


def hereditary_failures(scene: SceneSpec) -> list[int]:
    """Corps dont le retrait laisse une scène non propre (vide si n < 3)."""
    if scene.n < 3:
        return []
    return [drop for drop in range(scene.n) if not check_proper(sub_scene(scene, drop)).proper]


def hemisphere_failures(scene: SceneSpec) -> list[tuple[int, int]]:
    """Paires ordonnées de translatés dont l'image de Gauss extérieure couvre moins d'un demi-cercle."""
    if not scene.translative:
        return []
    tol = scene.tolerances
    return [
        (i, j)
        for i in range(scene.n)
        for j in range(scene.n)
        if i != j and exterior_gauss_extent(scene.bodies[i], scene.bodies[j], tol) < math.pi - _HEMISPHERE_SLACK
    ]


def run_trial(cfg: ExperimentConfig, trial: int) -> TrialRecord:
    """Un essai: scène aléatoire, structure, bornes, lacunes, hérédité, famille singleton, oracle."""
    start = time.perf_counter()
    rng = trial_rng(cfg.seed, trial)
    scene, rejections = random_scene(cfg, rng)
    s = compute_structure(scene)
    bound = verify_bounds(s)
    notes: list[str] = []

    lemma_violations = check_gap_lemmas(s).violations if cfg.check_lemmas else ()
    hereditary = hereditary_failures(scene) if cfg.check_lemmas else []
    hemisphere = hemisphere_failures(scene) if cfg.check_lemmas else []
    singleton = find_singleton_edge_family(s)
    descended = gap_descent_singleton(s)
    if len(s.edge_families[descended]) != 1:
        raise TheoryViolation(f"gap descent stopped on family {descended} of size {len(s.edge_families[descended])}")

    oracle_count, oracle_match = None, None
    if cfg.oracle:
        if s.min_vertex_angle < 2.0 * config.ORACLE_TAU:
            notes.append("oracle_excluded:small_angle")
            logger.info("trial %d excluded from oracle check (min vertex angle %.4f)", trial, s.min_vertex_angle)
        else:
            report = run_oracle(scene, samples=cfg.oracle_samples)
            oracle_count = report.count
            _, worst = match_points([v.point for v in s.vertices], report.points)
            oracle_match = report.count == s.total and worst <= config.MATCH_TOL
            if not oracle_match:
                notes.append(f"oracle_distance:{worst:.3e}")
    if not bound.holds:
        notes.append("bound_violation")
    inherited_capped = bound.inherited_count <= bound.m
    if not inherited_capped:
        notes.append(f"inherited_cap:{bound.inherited_count}>{bound.m}")
    notes.extend(f"hereditary:{drop}" for drop in hereditary)
    notes.extend(f"hemisphere:{i}-{j}" for i, j in hemisphere)

    return TrialRecord(
        trial=trial,
        digest=scene_digest(scene),
        n=bound.n,
        m=bound.m,
        pairwise_count=bound.pairwise_count,
        inherited_count=bound.inherited_count,
        total=bound.total,
        lower=bound.lower,
        upper=bound.upper,
        holds=bound.holds,
        oracle_count=oracle_count,
        oracle_match=oracle_match,
        lemma_violations=len(lemma_violations) + len(hereditary) + len(hemisphere),
        singleton_family=singleton,
        rejections=rejections,
        notes=";".join(notes),
        hereditary_failures=len(hereditary),
        hemisphere_failures=len(hemisphere),
        inherited_capped=inherited_capped,
        runtime=time.perf_counter() - start,
    )


_FAILURE_KEYS = (
    "bound_violations",
    "oracle_mismatches",
    "lemma_violations",
    "inherited_cap_violations",
    "spread_violations",
)


@dataclass
class ExperimentResult:
    records: list[TrialRecord]
    summary: dict

    @property
    def failed(self) -> bool:
        return any(self.summary[key] for key in _FAILURE_KEYS)


def spread_gaps(records: list[TrialRecord]) -> dict[str, list[int]]:
    """Valeurs de n sans essai au minimum n, et (n ≥ 3) sans essai au-delà de n."""
    totals: dict[int, set[int]] = {}
    for r in records:
        totals.setdefault(r.n, set()).add(r.total)
    return {
        "n_without_lower": sorted(n for n, seen in totals.items() if n not in seen),
        "n_without_excess": sorted(n for n, seen in totals.items() if n >= 3 and max(seen) <= n),
    }


def summarize(records: list[TrialRecord], require_spread: bool = False) -> dict:
    histogram = Counter(r.total for r in records)
    per_n: dict[int, Counter] = {}
    for r in records:
        per_n.setdefault(r.n, Counter())[r.total] += 1
    runtimes = [r.runtime for r in records]
    spread = spread_gaps(records)
    return {
        "trials": len(records),
        "histogram": {str(k): histogram[k] for k in sorted(histogram)},
        "histogram_by_n": {str(n): {str(k): c[k] for k in sorted(c)} for n, c in sorted(per_n.items())},
        "bound_violations": sum(not r.holds for r in records),
        "oracle_mismatches": sum(r.oracle_match is False for r in records),
        "oracle_exclusions": sum("oracle_excluded" in r.notes for r in records),
        "lemma_violations": sum(r.lemma_violations for r in records),
        "hereditary_violations": sum(r.hereditary_failures for r in records),
        "hemisphere_violations": sum(r.hemisphere_failures for r in records),
        "inherited_max": max((r.inherited_count for r in records), default=0),
        "inherited_cap_violations": sum(not r.inherited_capped for r in records),
        "spread": spread,
        "spread_violations": len(spread["n_without_lower"]) + len(spread["n_without_excess"]) if require_spread else 0,
        "rejections": sum(r.rejections for r in records),
        "runtime_mean": float(np.mean(runtimes)) if runtimes else 0.0,
        "runtime_max": float(np.max(runtimes)) if runtimes else 0.0,
    }


def run_experiment(cfg: ExperimentConfig) -> ExperimentResult:
    """Exécute `trials` essais (en parallèle si workers > 1), fusionnés par indice d'essai."""
    logger.info("🧪 experiment: %d trials, n=%d..%d, seed=%d", cfg.trials, cfg.n, cfg.n_max or cfg.n, cfg.seed)
    worker = partial(run_trial, cfg)
    if cfg.workers > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            records = list(pool.map(worker, range(cfg.trials)))
    else:
        records = [worker(t) for t in range(cfg.trials)]
    result = ExperimentResult(records, summarize(records, cfg.require_spread))
    if result.failed:
        logger.error(
            "❌ experiment failed: %s",
            ", ".join(f"{result.summary[key]} {key}" for key in _FAILURE_KEYS if result.summary[key]),
        )
    else:
        logger.info("✅ experiment passed: histogram %s", result.summary["histogram"])
    return result


@dataclass
class PairSuiteResult:
    pairs: int
    two: int = 0
    tangent_rejections: int = 0
    improper_rejections: int = 0
    violations: list[str] = field(default_factory=list)

    @property
    def failed(self) -> bool:
        return bool(self.violations) or self.two != self.pairs


def run_pair_suite(cfg: ExperimentConfig) -> PairSuiteResult:
    """`cfg.trials` paires propres d'homothétiques: chacune doit croiser en exactement deux points.

    Les tirages tangents sont rejetés et comptés à part, les paires disjointes
    ou emboîtées aussi; une paire à 0 ou 4 croisements est une violation.
    """
    if cfg.mixed:
        raise ValueError("the pair suite draws homothets of one domain; drop 'mixed'")
    tol = cfg.resolved_tolerances()
    fixed = build_domain(cfg.domain, tol) if cfg.domain is not None else None
    result = PairSuiteResult(cfg.trials)
    for trial in range(cfg.trials):
        rng = trial_rng(cfg.seed, trial)
        for _ in range(cfg.max_retries):
            try:
                a, b = _draw_scene(cfg, rng, 2, fixed, tol).bodies
                pair = pairwise_boundary_points(a, b, tol)
            except ImproperIntersection:
                continue
            except DegenerateGeometry as exc:
                result.tangent_rejections += 1
                logger.debug("pair %d: tangency rejected (%s)", trial, exc)
                continue
            except ModelViolation as exc:
                result.violations.append(f"{trial}:{exc}")
                break
            if pair.kind is not PairKind.TWO:
                result.improper_rejections += 1
                continue
            result.two += 1
            break
        else:
            raise GenerationExhausted(f"pair {trial}: no proper pair after {cfg.max_retries} attempts")
    logger.info(
        "pair suite: %d/%d pairs cross twice, %d tangent and %d improper draws rejected",
        result.two, result.pairs, result.tangent_rejections, result.improper_rejections,
    )
    return result


def write_csv(records: list[TrialRecord], path: str | Path) -> None:
    with Path(path).open("w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for record in records:
            writer.writerow(record.csv_row())


def write_summary(summary: dict, path: str | Path) -> None:
    Path(path).write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def records_as_dicts(records: list[TrialRecord]) -> list[dict]:
    return [{k: v for k, v in asdict(r).items() if k != "runtime"} for r in records]


CONSTRUCTIONS = ("sharp-upper", "three-circle", "zero-vertex")


def construct_scene(kind: str, request: ConstructRequest) -> SceneSpec:
    """Scène d'une construction d'optimalité.

    three-circle: deux homothétiques du domaine à trois cercles, placés par le
    générateur aléatoire (graine `request.seed`).
    """
    params = ConstructionParams(
        mu=request.mu,
        delta=request.delta,
        side=request.side,
        corner_radius=request.corner_radius,
        offset=request.offset,
        enlarge=request.enlarge,
    )
    if kind == "sharp-upper":
        domain = build_domain(request.domain) if request.domain is not None else Disk()
        return build_sharp_upper(domain, request.n, params)
    if kind == "three-circle":
        domain = build_three_circle_domain(request.side)
        cfg = ExperimentConfig(
            domain=domain_schema(domain), n=2, seed=request.seed, oracle=False, check_lemmas=False
        )
        scene, _ = random_scene(cfg, trial_rng(request.seed, 0))
        return scene
    if kind == "zero-vertex":
        return build_zero_vertex(request.n, params)
    raise ValueError(f"unknown construction {kind!r} (expected one of {', '.join(CONSTRUCTIONS)})")
