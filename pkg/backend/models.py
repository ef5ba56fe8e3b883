"""
Schémas pydantic: scène JSON, configuration d'expérience et réponses de l'API.

Les noms de champs des scènes sont exactement ceux du format JSON d'échange
(domain / homothets / bodies / tolerances).
"""
from __future__ import annotations

import hashlib
import json
from dataclasses import asdict
from pathlib import Path
from typing import Annotated, Literal, Union

from pydantic import BaseModel, ConfigDict, Field, TypeAdapter, model_validator

from . import config
from .domains import (
    Circle,
    DomainModel,
    HomothetSpec,
    make_ball_polygon,
    make_disk,
    make_ellipse,
    make_rounded_polygon,
    make_superellipse,
    place,
)
from .engine import BoundReport, CPolygonStruct, ProperReport, SceneSpec, make_mixed_scene, make_scene
from .geometry import DEFAULT_TOLERANCES, NormalArc, Point2, Tolerances
from .oracle import OracleReport

# --------------------------------------------------------------------------- #
# Domaines
# --------------------------------------------------------------------------- #


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid")


class DiskDomain(_Strict):
    kind: Literal["disk"] = "disk"


class EllipseDomain(_Strict):
    kind: Literal["ellipse"] = "ellipse"
    a: float = Field(..., gt=0)
    b: float = Field(..., gt=0)
    rotation: float = 0.0


class SuperellipseDomain(_Strict):
    kind: Literal["superellipse"] = "superellipse"
    p: float = Field(..., gt=1)
    a: float = Field(1.0, gt=0)
    b: float = Field(1.0, gt=0)


class DiskSpec(_Strict):
    cx: float
    cy: float
    r: float = Field(..., gt=0)


class BallPolygonDomain(_Strict):
    kind: Literal["ball_polygon"] = "ball_polygon"
    disks: list[DiskSpec] = Field(..., min_length=2)


class RoundedPolygonDomain(_Strict):
    kind: Literal["rounded_polygon"] = "rounded_polygon"
    n: int = Field(..., ge=3)
    apothem: float = Field(..., gt=0)
    corner_radius: float = Field(..., gt=0)


DomainSchema = Annotated[
    Union[DiskDomain, EllipseDomain, SuperellipseDomain, BallPolygonDomain, RoundedPolygonDomain],
    Field(discriminator="kind"),
]
_domain_adapter: TypeAdapter = TypeAdapter(DomainSchema)


def build_domain(schema, tol: Tolerances = DEFAULT_TOLERANCES) -> DomainModel:
    if isinstance(schema, DiskDomain):
        return make_disk()
    if isinstance(schema, EllipseDomain):
        return make_ellipse(schema.a, schema.b, schema.rotation)
    if isinstance(schema, SuperellipseDomain):
        return make_superellipse(schema.p, schema.a, schema.b)
    if isinstance(schema, BallPolygonDomain):
        return make_ball_polygon([Circle(Point2(d.cx, d.cy), d.r) for d in schema.disks], tol)
    if isinstance(schema, RoundedPolygonDomain):
        return make_rounded_polygon(schema.n, schema.apothem, schema.corner_radius)
    raise TypeError(f"unknown domain schema {schema!r}")


def domain_schema(domain: DomainModel):
    return _domain_adapter.validate_python(domain.parameters())


# --------------------------------------------------------------------------- #
# Scènes
# --------------------------------------------------------------------------- #


class HomothetSchema(_Strict):
    cx: float
    cy: float
    scale: float = Field(1.0, gt=0)


class TolerancesSchema(_Strict):
    eps_geom: float | None = Field(None, gt=0)
    eps_angle: float | None = Field(None, gt=0)
    refine_tol: float | None = Field(None, gt=0)
    scan_samples: int | None = Field(None, ge=64)

    def resolve(self) -> Tolerances:
        return DEFAULT_TOLERANCES.with_overrides(**self.model_dump())


class SceneSchema(_Strict):
    domain: DomainSchema | None = None
    homothets: list[HomothetSchema] = Field(..., min_length=2)
    bodies: list[DomainSchema] | None = None
    tolerances: TolerancesSchema | None = None

    @model_validator(mode="after")
    def _one_domain_source(self) -> "SceneSchema":
        if (self.domain is None) == (self.bodies is None):
            raise ValueError("give exactly one of 'domain' (shared C) or 'bodies' (mixed scene)")
        if self.bodies is not None and len(self.bodies) != len(self.homothets):
            raise ValueError("'bodies' and 'homothets' must have the same length")
        return self

    def to_scene(self) -> SceneSpec:
        tol = self.tolerances.resolve() if self.tolerances else DEFAULT_TOLERANCES
        specs = [HomothetSpec(Point2(h.cx, h.cy), h.scale) for h in self.homothets]
        if self.domain is not None:
            return make_scene(build_domain(self.domain, tol), specs, tol)
        return make_mixed_scene([place(build_domain(d, tol), s) for d, s in zip(self.bodies, specs)], tol)

    @classmethod
    def from_scene(cls, scene: SceneSpec) -> "SceneSchema":
        homothets = [
            HomothetSchema(cx=b.placement.center.x, cy=b.placement.center.y, scale=b.scale) for b in scene.bodies
        ]
        overrides = {
            name: getattr(scene.tolerances, name)
            for name in ("eps_geom", "eps_angle", "refine_tol", "scan_samples")
            if getattr(scene.tolerances, name) != getattr(DEFAULT_TOLERANCES, name)
        }
        tolerances = TolerancesSchema(**overrides) if overrides else None
        if scene.shared_domain is not None:
            return cls(domain=domain_schema(scene.shared_domain), homothets=homothets, tolerances=tolerances)
        return cls(bodies=[domain_schema(b.domain) for b in scene.bodies], homothets=homothets, tolerances=tolerances)

    def canonical_json(self) -> str:
        return json.dumps(self.model_dump(exclude_none=True), sort_keys=True, separators=(",", ":"))


def load_scene(path: str | Path) -> SceneSchema:
    return SceneSchema.model_validate_json(Path(path).read_text(encoding="utf-8"))


def dump_scene(schema: SceneSchema, path: str | Path) -> None:
    Path(path).write_text(schema.model_dump_json(indent=2, exclude_none=True) + "\n", encoding="utf-8")


def scene_digest(scene: SceneSpec) -> str:
    """Empreinte courte (sha256) du JSON canonique de la scène."""
    return hashlib.sha256(SceneSchema.from_scene(scene).canonical_json().encode("utf-8")).hexdigest()[:16]


# --------------------------------------------------------------------------- #
# Expériences
# --------------------------------------------------------------------------- #

RandomKind = Literal["disk", "ellipse", "superellipse", "ball_polygon"]


class ExperimentConfig(_Strict):
    """Lot d'essais aléatoires; (config, seed) identiques ⇒ rapports identiques à l'octet près."""

    domain: DomainSchema | None = None
    random_kinds: list[RandomKind] = Field(default_factory=lambda: ["ellipse"], min_length=1)
    mixed: bool = False
    n: int = Field(3, ge=2)
    n_max: int | None = Field(None, ge=2)
    translative: bool = False
    trials: int = Field(10, ge=1)
    seed: int = Field(0, ge=0, lt=2**64)
    placement: Literal["fan", "box"] = "fan"
    box: float = Field(0.5, gt=0)
    depth_range: tuple[float, float] = (0.15, 0.45)
    scale_range: tuple[float, float] = (0.6, 1.8)
    # part des tentatives homothétiques placées en entailles (plusieurs arêtes pour le corps 0)
    notch_fraction: float = Field(0.0, ge=0, le=1)
    notch_scale_range: tuple[float, float] = (1.5, 3.0)
    notch_depth_range: tuple[float, float] = (0.002, 0.01)  # fraction du diamètre du corps 0
    require_spread: bool = False
    axis_range: tuple[float, float] = (0.4, 1.0)
    exponent_range: tuple[float, float] = (1.5, 6.0)
    oracle: bool = True
    oracle_samples: int = Field(config.ORACLE_SAMPLES, ge=256)
    check_lemmas: bool = True
    max_retries: int = Field(config.MAX_RETRIES, ge=1)
    workers: int = Field(config.WORKERS, ge=1)
    tolerances: TolerancesSchema | None = None
    out: str | None = None
    summary: str | None = None

    @model_validator(mode="after")
    def _check(self) -> "ExperimentConfig":
        if self.n_max is not None and self.n_max < self.n:
            raise ValueError("n_max must be >= n")
        if self.mixed and self.domain is not None:
            raise ValueError("mixed scenes draw their own smooth domains; drop 'domain'")
        if self.mixed and self.translative:
            raise ValueError("mixed scenes have no shared domain and cannot be translative")
        ranges = (
            "depth_range", "scale_range", "axis_range", "exponent_range", "notch_scale_range", "notch_depth_range"
        )
        for name in ranges:
            lo, hi = getattr(self, name)
            if not 0 < lo <= hi:
                raise ValueError(f"{name} must satisfy 0 < low <= high")
        if self.exponent_range[0] <= 1.0:
            raise ValueError("superellipse exponents must exceed 1")
        if self.notch_scale_range[0] <= 1.0:
            raise ValueError("notch scales must exceed 1")
        if self.translative and self.notch_fraction > 0.0:
            raise ValueError("translates cannot be placed as notches (notch_fraction needs homothets)")
        return self

    def resolved_tolerances(self) -> Tolerances:
        return self.tolerances.resolve() if self.tolerances else DEFAULT_TOLERANCES


def load_experiment_config(path: str | Path) -> ExperimentConfig:
    return ExperimentConfig.model_validate_json(Path(path).read_text(encoding="utf-8"))


# --------------------------------------------------------------------------- #
# Réponses
# --------------------------------------------------------------------------- #


class PointOut(BaseModel):
    x: float
    y: float

    @classmethod
    def of(cls, p: Point2) -> "PointOut":
        return cls(x=p.x, y=p.y)


class ArcOut(BaseModel):
    start: float
    extent: float
    full: bool = False

    @classmethod
    def of(cls, arc: NormalArc) -> "ArcOut":
        return cls(start=arc.start, extent=arc.extent, full=arc.full)


class VertexOut(BaseModel):
    point: PointOut
    kind: Literal["pairwise", "inherited"]
    bodies: list[int]
    feature: int | None = None
    normal_arc: ArcOut


class EdgeOut(BaseModel):
    owner: int
    normal_arc: ArcOut
    endpoints: list[int]
    inherited: list[int]


class GapOut(BaseModel):
    owner: int
    open_arc: ArcOut
    chord: list[PointOut]


class BoundOut(BaseModel):
    n: int
    m: int
    pairwise_count: int
    inherited_count: int
    total: int
    lower: int
    upper: int
    holds: bool
    regime: str

    @classmethod
    def of(cls, report: BoundReport) -> "BoundOut":
        return cls(**asdict(report))


class StructureOut(BaseModel):
    bound: BoundOut
    vertices: list[VertexOut]
    edges: list[EdgeOut]
    edge_families: list[list[int]]
    gap_families: list[list[GapOut]]
    discarded: int
    min_vertex_angle: float
    singleton_family: int

    @classmethod
    def of(cls, s: CPolygonStruct, bound: BoundReport, singleton: int) -> "StructureOut":
        vertices = []
        for v in s.vertices:
            if v.label == "pairwise":
                bodies, feature = [v.kind.i, v.kind.j], None
            else:
                bodies, feature = [v.kind.owner], v.kind.feature
            vertices.append(
                VertexOut(
                    point=PointOut.of(v.point),
                    kind=v.label,
                    bodies=bodies,
                    feature=feature,
                    normal_arc=ArcOut.of(v.normal_arc),
                )
            )
        return cls(
            bound=BoundOut.of(bound),
            vertices=vertices,
            edges=[
                EdgeOut(owner=e.owner, normal_arc=ArcOut.of(e.normal_arc), endpoints=list(e.endpoints), inherited=list(e.inherited))
                for e in s.edges
            ],
            edge_families=[list(f) for f in s.edge_families],
            gap_families=[
                [GapOut(owner=g.owner, open_arc=ArcOut.of(g.open_arc), chord=[PointOut.of(p) for p in g.chord]) for g in gaps]
                for gaps in s.gap_families
            ],
            discarded=s.discarded,
            min_vertex_angle=s.min_vertex_angle,
            singleton_family=singleton,
        )


class VerifyOut(BaseModel):
    status: str
    body: int | None = None
    witness: PointOut | None = None
    bound: BoundOut | None = None
    lemma_violations: int = 0
    singleton_family: int | None = None

    @classmethod
    def of(cls, proper: ProperReport, **extra) -> "VerifyOut":
        witness = PointOut.of(proper.witness) if proper.witness else None
        return cls(status=proper.status.value, body=proper.body, witness=witness, **extra)


class SingularPointOut(BaseModel):
    point: PointOut
    angle: float


class OracleOut(BaseModel):
    count: int
    samples: int
    singular_points: list[SingularPointOut]

    @classmethod
    def of(cls, report: OracleReport, samples: int) -> "OracleOut":
        return cls(
            count=report.count,
            samples=samples,
            singular_points=[SingularPointOut(point=PointOut.of(p), angle=a) for p, a in report.singular_points],
        )


class ConstructRequest(_Strict):
    """Paramètres communs aux trois constructions (CLI `construct` et POST /construct/{kind})."""

    n: int = Field(3, ge=2)
    domain: DomainSchema | None = None
    mu: float = Field(1.5, gt=1)
    delta: float = Field(0.05, gt=0)
    side: float = Field(0.8, gt=0)
    corner_radius: float = Field(0.2, gt=0)
    offset: tuple[float, float] = (0.3, 0.0)
    enlarge: float = Field(2.0, gt=1)
    seed: int = Field(0, ge=0, lt=2**64)
