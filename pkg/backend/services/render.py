"""
Rendu SVG d'une scène: corps générateurs (contours), H (rempli), arêtes
colorées par propriétaire, sommets par type, lacunes en option.

Sortie déterministe: identifiants SVG salés et aucune date dans les
métadonnées.
"""
from __future__ import annotations

import io
import logging

import matplotlib
import numpy as np
from matplotlib.figure import Figure

from ..engine import CPolygonStruct, SceneSpec
from ..geometry import TWO_PI
from ..oracle import trace_bodies

logger = logging.getLogger(__name__)

_OUTLINE_SAMPLES = 720
_ARC_SAMPLES = 96
_KIND_COLORS = {"pairwise": "tab:red", "inherited": "tab:blue"}


def _owner_color(owner: int) -> str:
    return matplotlib.colormaps["tab10"](owner % 10)


def render_svg(
    scene: SceneSpec,
    structure: CPolygonStruct | None = None,
    gaps: bool = False,
    edge_colors: bool = True,
) -> str:
    fig = Figure(figsize=(6, 6))
    ax = fig.add_subplot()
    ax.set_aspect("equal")
    ax.axis("off")

    thetas = np.linspace(0.0, TWO_PI, _OUTLINE_SAMPLES + 1)
    for body in scene.bodies:
        pts = body.boundary_at_normal(thetas)
        ax.plot(pts[:, 0], pts[:, 1], color="0.55", lw=0.8, ls="--")

    # 🎨 H rempli, tracé par lancer de rayons (valable aussi hors stricte convexité)
    trace = trace_bodies(scene.bodies, scene.tolerances, samples=_OUTLINE_SAMPLES)
    ax.fill(trace.samples[:, 0], trace.samples[:, 1], color="0.9", zorder=0)

    if structure is not None:
        if gaps:
            for family in structure.gap_families:
                for gap in family:
                    body = scene.bodies[gap.owner]
                    pts = body.boundary_at_normal(gap.open_arc.start + np.linspace(0.0, gap.open_arc.extent, _ARC_SAMPLES))
                    ax.fill(pts[:, 0], pts[:, 1], color=_owner_color(gap.owner), alpha=0.15, lw=0)
                    (p, q) = gap.chord
                    ax.plot([p.x, q.x], [p.y, q.y], color=_owner_color(gap.owner), lw=0.8, ls=":")
        for edge in structure.edges:
            body = scene.bodies[edge.owner]
            arc = edge.normal_arc
            pts = body.boundary_at_normal(arc.start + np.linspace(0.0, arc.extent, _ARC_SAMPLES))
            color = _owner_color(edge.owner) if edge_colors else "black"
            ax.plot(pts[:, 0], pts[:, 1], color=color, lw=2.0)
        for vertex in structure.vertices:
            ax.scatter([vertex.point.x], [vertex.point.y], s=18, color=_KIND_COLORS[vertex.label], zorder=3)

    buf = io.StringIO()
    with matplotlib.rc_context({"svg.hashsalt": "cpoly", "svg.fonttype": "none"}):
        fig.savefig(buf, format="svg", metadata={"Date": None})
    logger.debug("rendered scene with %d bodies", scene.n)
    return buf.getvalue()
