from __future__ import annotations

import logging

from fastapi import FastAPI, HTTPException, Request
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse, Response

from . import config
from .engine import (
    SceneSpec,
    check_gap_lemmas,
    check_proper,
    compute_structure,
    find_singleton_edge_family,
    verify_bounds,
)
from .errors import CPolygonError
from .models import BoundOut, ConstructRequest, OracleOut, SceneSchema, StructureOut, VerifyOut
from .oracle import run_oracle
from .services.experiments import CONSTRUCTIONS, construct_scene
from .services.render import render_svg

logging.basicConfig(level=config.LOG_LEVEL, format="%(asctime)s %(levelname)s %(name)s: %(message)s")
logger = logging.getLogger(__name__)

app = FastAPI(title="C-polygon engine API", version="1.0.0")

app.add_middleware(
    CORSMiddleware,
    allow_origins=["*"],
    allow_credentials=False,
    allow_methods=["*"],
    allow_headers=["*"],
)

# exit code CLI → statut HTTP
_STATUS_BY_EXIT = {2: 400, 3: 409, 4: 500}


@app.on_event("startup")
async def startup_event():
    logger.info("✅ API démarrée (oracle: %d rayons, tau=%g)", config.ORACLE_SAMPLES, config.ORACLE_TAU)


@app.exception_handler(CPolygonError)
async def cpolygon_error_handler(request: Request, exc: CPolygonError):
    """Traduit les erreurs géométriques en réponses JSON avec le code de sortie associé."""
    status = _STATUS_BY_EXIT.get(exc.exit_code, 500)
    logger.warning("%s %s → %d (%s: %s)", request.method, request.url.path, status, type(exc).__name__, exc)
    return JSONResponse(
        status_code=status,
        content={"detail": str(exc), "error": type(exc).__name__, "exit_code": exc.exit_code},
    )


def _to_scene(schema: SceneSchema) -> SceneSpec:
    try:
        return schema.to_scene()
    except ValueError as exc:
        raise HTTPException(status_code=422, detail=str(exc)) from exc


@app.get("/health")
def health():
    """Endpoint de santé avec la configuration active de l'oracle."""
    return {
        "status": "ok",
        "oracle": {
            "samples": config.ORACLE_SAMPLES,
            "tau": config.ORACLE_TAU,
            "levels": config.ORACLE_LEVELS,
            "window": config.ORACLE_WINDOW,
        },
        "constructions": list(CONSTRUCTIONS),
    }


@app.post("/verify", response_model=VerifyOut)
def verify(schema: SceneSchema):
    """Propreté de la scène; pour une scène propre, bornes et contrôles des lacunes.

    Une scène non propre n'est pas une erreur ici: le statut est renvoyé tel quel.
    """
    scene = _to_scene(schema)
    proper = check_proper(scene)
    if not proper.proper:
        return VerifyOut.of(proper)

    # 🧮 Structure complète → bornes, contrôles de lacunes, famille singleton
    s = compute_structure(scene)
    return VerifyOut.of(
        proper,
        bound=BoundOut.of(verify_bounds(s)),
        lemma_violations=len(check_gap_lemmas(s).violations),
        singleton_family=find_singleton_edge_family(s),
    )


@app.post("/structure", response_model=StructureOut)
def structure(schema: SceneSchema):
    scene = _to_scene(schema)
    s = compute_structure(scene)
    return StructureOut.of(s, verify_bounds(s), find_singleton_edge_family(s))


@app.post("/oracle", response_model=OracleOut)
def oracle(schema: SceneSchema, samples: int | None = None, tau: float | None = None):
    """Points singuliers par lancer de rayons (n'utilise que les tests d'appartenance)."""
    scene = _to_scene(schema)
    samples = samples or config.ORACLE_SAMPLES
    try:
        report = run_oracle(scene, samples=samples, tau=tau)
    except ValueError as exc:
        raise HTTPException(status_code=422, detail=str(exc)) from exc
    return OracleOut.of(report, samples)


@app.post("/construct/{kind}", response_model=SceneSchema, response_model_exclude_none=True)
def construct(kind: str, request: ConstructRequest | None = None):
    """Scène JSON d'une construction (sharp-upper, three-circle, zero-vertex)."""
    if kind not in CONSTRUCTIONS:
        raise HTTPException(status_code=404, detail=f"Unknown construction '{kind}'")
    try:
        scene = construct_scene(kind, request or ConstructRequest())
    except ValueError as exc:
        raise HTTPException(status_code=422, detail=str(exc)) from exc
    return SceneSchema.from_scene(scene)


@app.post("/render")
def render(schema: SceneSchema, gaps: bool = False, edge_colors: bool = True):
    """Figure SVG; arêtes et sommets seulement pour une scène strictement convexe."""
    scene = _to_scene(schema)
    s = compute_structure(scene) if all(b.is_strictly_convex() for b in scene.bodies) else None
    return Response(content=render_svg(scene, s, gaps=gaps, edge_colors=edge_colors), media_type="image/svg+xml")
