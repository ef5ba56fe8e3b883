"""
CLI du moteur de C-polygones.

    python scripts/cpoly.py verify backend/data/scenes/reuleaux.json
    python scripts/cpoly.py structure backend/data/scenes/lens.json --json
    python scripts/cpoly.py oracle backend/data/scenes/reuleaux.json --samples 16384
    python scripts/cpoly.py construct sharp-upper --n 4 -o scene.json
    python scripts/cpoly.py experiment --config backend/data/corpus/translative_smooth.json --out report.csv
    python scripts/cpoly.py render backend/data/scenes/lens.json -o lens.svg --gaps --edge-colors

Codes de sortie: 0 succès, 2 scène impropre (ou entrée rejetée),
3 géométrie dégénérée, 4 violation de la théorie.
"""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from dataclasses import asdict
from pathlib import Path

# Ajouter le répertoire parent au path pour importer les modules backend
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from pydantic import ValidationError

from backend import config
from backend.engine import check_gap_lemmas, check_proper, compute_structure, find_singleton_edge_family, verify_bounds
from backend.errors import CPolygonError, TheoryViolation
from backend.models import (
    BoundOut,
    ConstructRequest,
    ExperimentConfig,
    OracleOut,
    SceneSchema,
    StructureOut,
    VerifyOut,
    dump_scene,
    load_scene,
)
from backend.oracle import run_oracle
from backend.services.experiments import (
    CONSTRUCTIONS,
    construct_scene,
    run_experiment,
    run_pair_suite,
    write_csv,
    write_summary,
)
from backend.services.render import render_svg

logger = logging.getLogger("cpoly")

EXIT_INPUT = 2


def _banner(title: str) -> None:
    print("\n" + "=" * 80)
    print(title)
    print("=" * 80)


def _fmt(p) -> str:
    return f"({p.x:+.9f}, {p.y:+.9f})"


def cmd_verify(args: argparse.Namespace) -> int:
    scene = load_scene(args.scene).to_scene()
    proper = check_proper(scene)
    if not proper.proper:
        if args.json:
            print(VerifyOut.of(proper).model_dump_json(indent=2))
        else:
            _banner("🔎 VERIFY")
            print(f"\n❌ {proper.status.value} (body {proper.body})")
        return 2

    s = compute_structure(scene)
    bound = verify_bounds(s)
    lemmas = check_gap_lemmas(s)
    singleton = find_singleton_edge_family(s)
    if args.json:
        out = VerifyOut.of(
            proper, bound=BoundOut.of(bound), lemma_violations=len(lemmas.violations), singleton_family=singleton
        )
        print(out.model_dump_json(indent=2))
    else:
        _banner("🔎 VERIFY")
        print(f"\n✅ proper ({scene.regime}, n={bound.n}, m={bound.m})")
        print(f"   Witness: {_fmt(proper.witness)}")
        print(f"   Vertices: {bound.total} = {bound.pairwise_count} pairwise + {bound.inherited_count} inherited")
        print(f"   Bounds: {bound.lower} <= {bound.total} <= {bound.upper} → {'ok' if bound.holds else 'VIOLATED'}")
        print(f"   Gap checks: {len(lemmas.violations)} violation(s)")
        print(f"   Singleton edge family: body {singleton}")
    if not bound.holds:
        raise TheoryViolation(f"vertex count {bound.total} outside [{bound.lower}, {bound.upper}]")
    if not lemmas.ok:
        raise TheoryViolation(f"{len(lemmas.violations)} gap check violation(s)")
    return 0


def cmd_structure(args: argparse.Namespace) -> int:
    scene = load_scene(args.scene).to_scene()
    s = compute_structure(scene)
    bound = verify_bounds(s)
    singleton = find_singleton_edge_family(s)
    if args.json:
        print(StructureOut.of(s, bound, singleton).model_dump_json(indent=2))
        return 0

    _banner(f"🔷 STRUCTURE ({scene.regime}, n={scene.n}, m={scene.m})")
    print(f"\n📍 {s.total} vertices ({s.pairwise_count} pairwise, {s.inherited_count} inherited)")
    for k, v in enumerate(s.vertices):
        detail = f"bodies {v.kind.i},{v.kind.j}" if v.label == "pairwise" else f"body {v.kind.owner} corner {v.kind.feature}"
        print(f"  {k:3d}  {v.label:<9s} {_fmt(v.point)}  {detail}")
    print(f"\n📐 {len(s.edges)} edges")
    for k, e in enumerate(s.edges):
        print(f"  {k:3d}  body {e.owner}  normals [{e.normal_arc.start:.6f}, {e.normal_arc.end:.6f}]")
    print("\n📊 Edge families: " + ", ".join(f"{j}:{size}" for j, size in enumerate(s.family_sizes)))
    print(f"   Singleton family: body {singleton}")
    print(f"   Bounds: {bound.lower} <= {bound.total} <= {bound.upper}\n")
    return 0


def cmd_oracle(args: argparse.Namespace) -> int:
    scene = load_scene(args.scene).to_scene()
    samples = args.samples or config.ORACLE_SAMPLES
    report = run_oracle(scene, samples=samples, tau=args.tau)
    if args.json:
        print(OracleOut.of(report, samples).model_dump_json(indent=2))
        return 0
    _banner(f"🛰️  ORACLE ({samples} rays)")
    print(f"\n📍 {report.count} singular point(s)")
    for p, angle in report.singular_points:
        print(f"  {_fmt(p)}  exterior angle {angle:.6f}")
    print()
    return 0


def cmd_construct(args: argparse.Namespace) -> int:
    fields = {
        name: getattr(args, name)
        for name in ("n", "mu", "delta", "side", "corner_radius", "offset", "enlarge", "seed")
        if getattr(args, name) is not None
    }
    if args.domain:
        fields["domain"] = _json_arg(args.domain)
    scene = construct_scene(args.kind, ConstructRequest.model_validate(fields))
    schema = SceneSchema.from_scene(scene)
    if args.output:
        dump_scene(schema, args.output)
        print(f"✅ {args.kind}: {scene.n} bodies → {args.output}")
    else:
        print(schema.model_dump_json(indent=2, exclude_none=True))
    return 0


def _experiment_config(args: argparse.Namespace) -> ExperimentConfig:
    data = json.loads(Path(args.config).read_text(encoding="utf-8")) if args.config else {}
    overrides = {
        "n": args.n,
        "n_max": args.n_max,
        "trials": args.trials,
        "seed": args.seed,
        "workers": args.workers,
        "out": args.out,
        "summary": args.summary,
        "placement": args.placement,
        "notch_fraction": args.notch_fraction,
    }
    data.update({k: v for k, v in overrides.items() if v is not None})
    if args.domain:
        data["domain"] = _json_arg(args.domain)
    if args.random_kind:
        data["random_kinds"] = args.random_kind
    if args.translative:
        data["translative"] = True
    if args.mixed:
        data["mixed"] = True
    if args.no_oracle:
        data["oracle"] = False
    return ExperimentConfig.model_validate(data)


def _pair_suite(cfg: ExperimentConfig, as_json: bool) -> int:
    result = run_pair_suite(cfg)
    if as_json:
        print(json.dumps(asdict(result), indent=2, sort_keys=True))
    else:
        _banner(f"🔗 PAIR SUITE ({cfg.trials} pairs, seed {cfg.seed})")
        print(f"\n✅ Two crossings: {result.two}/{result.pairs}")
        print(f"   Tangent draws rejected: {result.tangent_rejections}")
        print(f"   Disjoint or nested draws rejected: {result.improper_rejections}")
        for violation in result.violations:
            print(f"❌ {violation}")
        print()
    if result.failed:
        raise TheoryViolation(f"{len(result.violations)} pairs do not cross exactly twice")
    return 0


def cmd_experiment(args: argparse.Namespace) -> int:
    cfg = _experiment_config(args)
    if args.pair_suite:
        return _pair_suite(cfg, args.json)
    result = run_experiment(cfg)
    if cfg.out:
        write_csv(result.records, cfg.out)
        summary_path = cfg.summary or str(Path(cfg.out).with_suffix(".summary.json"))
        write_summary(result.summary, summary_path)

    if args.json:
        print(json.dumps(result.summary, indent=2, sort_keys=True))
    else:
        _banner(f"🧪 EXPERIMENT ({cfg.trials} trials, seed {cfg.seed})")
        summary = result.summary
        print(f"\n📊 Histogram: {summary['histogram']}")
        print(f"   Bound violations: {summary['bound_violations']}")
        print(f"   Oracle mismatches: {summary['oracle_mismatches']} ({summary['oracle_exclusions']} excluded)")
        print(f"   Structural check violations: {summary['lemma_violations']} "
              f"(hereditary {summary['hereditary_violations']}, hemisphere {summary['hemisphere_violations']})")
        print(f"   Inherited cap violations: {summary['inherited_cap_violations']}")
        if summary["spread_violations"]:
            print(f"   ⚠️ Missing spread: {summary['spread']}")
        print(f"   Rejections: {summary['rejections']}")
        print(f"   Runtime: mean {summary['runtime_mean']:.3f}s, max {summary['runtime_max']:.3f}s")
        if cfg.out:
            print(f"\n💾 {cfg.out}")
        print()
    if result.failed:
        raise TheoryViolation("experiment reported bound, oracle, structural or spread violations")
    return 0


def cmd_render(args: argparse.Namespace) -> int:
    scene = load_scene(args.scene).to_scene()
    s = compute_structure(scene) if all(b.is_strictly_convex() for b in scene.bodies) else None
    svg = render_svg(scene, s, gaps=args.gaps, edge_colors=args.edge_colors)
    Path(args.output).write_text(svg, encoding="utf-8")
    print(f"✅ SVG → {args.output}")
    return 0


def _json_arg(value: str):
    """JSON en ligne ou chemin vers un fichier JSON."""
    path = Path(value)
    return json.loads(path.read_text(encoding="utf-8") if path.is_file() else value)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cpoly", description="C-polygon engine")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("verify", help="check that a scene is proper and its vertex count within bounds")
    p.add_argument("scene")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("structure", help="vertices, edges and families of a proper scene")
    p.add_argument("scene")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_structure)

    p = sub.add_parser("oracle", help="singular points by ray shooting")
    p.add_argument("scene")
    p.add_argument("--samples", type=int)
    p.add_argument("--tau", type=float)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("construct", help="build one of the optimality constructions")
    p.add_argument("kind", choices=CONSTRUCTIONS)
    p.add_argument("--n", type=int)
    p.add_argument("--domain", help="domain JSON (inline or file), sharp-upper only")
    p.add_argument("--mu", type=float)
    p.add_argument("--delta", type=float)
    p.add_argument("--side", type=float)
    p.add_argument("--corner-radius", dest="corner_radius", type=float)
    p.add_argument("--offset", type=float, nargs=2)
    p.add_argument("--enlarge", type=float)
    p.add_argument("--seed", type=int)
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_construct)

    p = sub.add_parser("experiment", help="seeded batch of random scenes")
    p.add_argument("--config")
    p.add_argument("--domain", help="fixed domain JSON (inline or file)")
    p.add_argument("--random-kind", dest="random_kind", action="append",
                   choices=["disk", "ellipse", "superellipse", "ball_polygon"])
    p.add_argument("--mixed", action="store_true")
    p.add_argument("--translative", action="store_true")
    p.add_argument("--placement", choices=["fan", "box"])
    p.add_argument("--notch-fraction", dest="notch_fraction", type=float)
    p.add_argument("--pair-suite", dest="pair_suite", action="store_true",
                   help="check that random homothet pairs cross exactly twice")
    p.add_argument("--n", type=int)
    p.add_argument("--n-max", dest="n_max", type=int)
    p.add_argument("--trials", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--workers", type=int)
    p.add_argument("--no-oracle", dest="no_oracle", action="store_true")
    p.add_argument("--out")
    p.add_argument("--summary")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_experiment)

    p = sub.add_parser("render", help="SVG figure of a scene")
    p.add_argument("scene")
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--gaps", action="store_true")
    p.add_argument("--edge-colors", dest="edge_colors", action="store_true")
    p.set_defaults(func=cmd_render)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=config.LOG_LEVEL, format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except CPolygonError as exc:
        print(f"❌ {type(exc).__name__}: {exc}", file=sys.stderr)
        return exc.exit_code
    except (ValidationError, ValueError, OSError) as exc:
        print(f"⚠️  {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
