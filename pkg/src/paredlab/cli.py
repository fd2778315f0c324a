"""Command-line entry point.

Every run writes its artifacts plus ``manifest.json`` (versions, config,
seed and sha256 of each artifact) into the output directory.  Errors print a
JSON record on stderr and exit with 2 (validation), 3 (numerical failure)
or 4 (size limit).

SVG output uses a unit circle of radius 256 px, angle 0 at the right and
counterclockwise positive.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import os
import platform
import sys
from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction
from pathlib import Path

import mpmath
import numpy

from . import __version__
from . import blaschke as bl
from . import degeneration as dg
from . import lamination as lam
from . import monodromy as mono
from . import planegraph as pg
from . import tischler as ti
from .errors import MissingArtifact, ParedError, SizeLimit, ValidationError
from .hypdisk import IdealPoint, _geodesic_raw
from .ribbontree import PointedMetricTree, enumerate_pointed

ATLAS_MAX_CLI = 7
SVG_R = 256
SVG_PAD = 24


class Run:
    """Collects artifacts for one invocation and writes the manifest."""

    def __init__(self, args):
        self.out = Path(getattr(args, "out_dir", None) or "paredlab-out")
        self.config = {k: v for k, v in sorted(vars(args).items()) if k != "func"}
        self.files = {}
        self.summary = []

    def write(self, name: str, text: str):
        self.out.mkdir(parents=True, exist_ok=True)
        data = text.encode()
        (self.out / name).write_bytes(data)
        self.files[name] = hashlib.sha256(data).hexdigest()

    def write_json(self, name: str, obj):
        self.write(name, json.dumps(obj, indent=2, sort_keys=True, default=str) + "\n")

    def say(self, line: str):
        self.summary.append(line)
        print(line)

    def finish(self):
        manifest = {
            "versions": {"paredlab": __version__, "python": platform.python_version(),
                         "numpy": numpy.__version__, "mpmath": mpmath.__version__},
            "config": self.config,
            "seed": self.config.get("seed", 0),
            "threads": _threads(),
            "artifacts": dict(sorted(self.files.items())),
            "summary": self.summary,
        }
        self.out.mkdir(parents=True, exist_ok=True)
        (self.out / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True, default=str) + "\n")


def _threads() -> int:
    try:
        return max(1, int(os.environ.get("PAREDLAB_THREADS", "1")))
    except ValueError:
        return 1


def _load_json(path):
    try:
        return json.loads(Path(path).read_text())
    except FileNotFoundError as exc:
        raise ValidationError(f"missing input file {path}") from exc
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path} is not valid JSON: {exc}") from exc


def _graph(path) -> pg.PlaneGraph:
    return pg.PlaneGraph.from_json(_load_json(path))


# ---------------------------------------------------------------- graphs


def cmd_atlas(args, run: Run):
    if args.n > ATLAS_MAX_CLI:
        raise SizeLimit(f"atlas runs are capped at n = {ATLAS_MAX_CLI}")
    atlas = pg.enumerate_atlas(args.n)
    rows = []
    for i, G in enumerate(atlas):
        run.write_json(f"graph_{i}.json", G.to_json())
        v = ti.boundedness_verdict(G)
        rows.append({"index": i, "edges": G.num_edges, "three_connected": pg.is_k_connected(G, 3),
                     "verdict": str(v), "aut": len(pg.automorphisms(G))})
    lines = [f"digraph atlas_{args.n} {{"]
    for i in range(len(atlas)):
        lines.append(f'  g{i} [label="{i}: {atlas[i].num_edges} edges"];')
    for i, G in enumerate(atlas):
        for j, H in enumerate(atlas):
            if H.num_edges == G.num_edges + 1 and pg.dominates(H, G):
                lines.append(f"  g{i} -> g{j};")
    lines.append("}")
    run.write("poset.dot", "\n".join(lines) + "\n")
    run.write_json("atlas.json", rows)
    run.say(f"atlas n={args.n}: {len(atlas)} classes")
    for r in rows:
        run.say(f"  graph_{r['index']}: {r['edges']} edges, |Aut|={r['aut']}, {r['verdict']}")


def cmd_verdict(args, run: Run):
    G = _graph(args.graph)
    v = ti.boundedness_verdict(G)
    run.say(str(v))
    rec = {"verdict": str(v), "cut": list(v.cut) if v.cut else None}
    if v.witness is not None:
        rec["witness_admissible"] = ti.is_admissible(v.witness).admissible
        rec["witness_result"] = v.witness.result.to_json()
    run.write_json("verdict.json", rec)


def cmd_bifurcates(args, run: Run):
    G = _graph(args.graph)
    H = _graph(args.target)
    b = ti.bifurcates(G, H)
    run.say(f"bifurcates: {str(b.bifurcates).lower()}")
    run.say(f"embeddings: {len(b.embeddings)}, double cosets: {b.double_cosets}")
    run.write_json("bifurcation.json", {"bifurcates": b.bifurcates, "embeddings": len(b.embeddings),
                                        "double_cosets": b.double_cosets})


def cmd_enrich(args, run: Run):
    G = _graph(args.graph)
    T = ti.tischler_of(G)
    rows = []
    for i, E in enumerate(ti.enumerate_enrichments(T)):
        ok = ti.is_admissible(E)
        rows.append({"index": i, "admissible": ok.admissible, "result": E.result.to_json()})
    run.write_json("enrichments.json", rows)
    bad = sum(1 for r in rows if not r["admissible"])
    run.say(f"enrichments: {len(rows)}, non-admissible: {bad}")


def cmd_admissible(args, run: Run):
    if args.fixture:
        fx = ti.load_fixture(args.fixture)
        if "enrichment" not in fx:
            raise ValidationError(f"fixture {args.fixture} carries no enrichment")
        v = ti.is_admissible(fx["enrichment"])
        run.say("admissible" if v.admissible else f"rejected: {v.certificate}")
        run.write_json("admissibility.json", {"admissible": v.admissible, "certificate": str(v.certificate)})
        return
    G = _graph(args.graph)
    T = ti.tischler_of(G)
    rows = [ti.is_admissible(E) for E in ti.enumerate_enrichments(T)]
    bad = [i for i, v in enumerate(rows) if not v.admissible]
    run.say(f"enrichments: {len(rows)}, non-admissible: {len(bad)}")
    run.write_json("admissibility.json", {"count": len(rows), "non_admissible": bad})


def cmd_mating_report(args, run: Run):
    if args.fixture:
        fx = ti.load_fixture(args.fixture)
        H = fx["gamma_prime"]
    else:
        H = _graph(args.graph)
    rep = ti.shared_mating_report(H)
    for line in rep.lines():
        run.say(line)
    run.write("mating_report.txt", "\n".join(rep.lines()) + "\n")


# ---------------------------------------------------------------- laminations and maps


def cmd_lamination(args, run: Run):
    gens = [lam.Chord.parse(g) for g in args.gens.split(",")]
    L = lam.generate(gens, args.d, args.depth)
    run.write_json("lamination.json", L.to_json())
    if args.svg:
        svg = lam.to_svg(L)
        Path(args.svg).parent.mkdir(parents=True, exist_ok=True)
        Path(args.svg).write_text(svg)
        run.files[str(args.svg)] = hashlib.sha256(svg.encode()).hexdigest()
    run.say(f"leaves: {len(L.leaves)}")
    for c in L.leaves:
        run.say(f"  {c}")


def _map_from_args(args):
    if args.map:
        return bl.AntiBlaschke.from_json(_load_json(args.map))
    zeros = [complex(z.replace("i", "j")) for z in args.zeros.split(",")] if args.zeros else []
    return bl.AntiBlaschke.from_zeros(zeros)


def cmd_blaschke_analyze(args, run: Run):
    f = _map_from_args(args)
    marked = bl.boundary_fixed_points(f)
    fixed = [marked.labeled(k) for k in range(f.d + 1)]
    mults = bl.multipliers(f)
    crit = bl.critical_points(f)
    disp = bl.critical_displacements(f)
    rec = {"map": f.to_json(), "fixed_points": fixed, "multipliers": mults,
           "critical_points": [[[c.real, c.imag], m] for c, m in crit], "critical_displacements": disp}
    run.write_json("analysis.json", rec)
    run.say(f"degree {f.d}")
    for k, (t, L) in enumerate(zip(fixed, mults)):
        run.say(f"  fixed point {k}: {t:.12f} turns, multiplier {L:.10f}")
    for (c, m), x in zip(crit, disp):
        run.say(f"  critical point {c:.6f} (x{m}): displacement {x:.6f}")


def cmd_blaschke_sweep(args, run: Run):
    m, acc, rej = bl.pared_sweep(args.d, args.K, args.samples, args.seed)
    run.write_json("sweep.json", {"max_displacement": m, "samples": args.samples, "rejected": rej,
                                  "seed": args.seed})
    run.say(f"max critical displacement over {args.samples} samples: {m:.6f} (rejected {rej})")


# ---------------------------------------------------------------- degenerations


def _grid(args):
    return tuple(float(x) for x in args.grid.split(",")) if args.grid else dg.DEFAULT_GRID


def _realize_any(T: PointedMetricTree, grid):
    return dg.realize_extended(T, grid) if T.extended else dg.realize(T, grid)


def _svg_point(z):
    z = complex(z)
    c = SVG_R + SVG_PAD
    return c + SVG_R * z.real, c - SVG_R * z.imag


def filmstrip_svg(E: dg.EmbeddedTree) -> str:
    """Placed trees side by side, one disk per grid point."""
    grid = sorted(E.placement)
    size = 2 * (SVG_R + SVG_PAD)
    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{size * len(grid)}" height="{size}">']
    tree = E.tree.base
    for i, s in enumerate(grid):
        place = E.placement[s]
        out.append(f'<g transform="translate({i * size},0)">')
        out.append(f'<circle cx="{SVG_R + SVG_PAD}" cy="{SVG_R + SVG_PAD}" r="{SVG_R}" fill="none" stroke="black"/>')
        out.append(f'<text x="8" y="16" font-size="12">s={s:g}</text>')
        with mpmath.workdps(30):
            for v in tree.core:
                for w in tree.adj[v]:
                    if tree.valence(w) > 1 and w < v:
                        continue
                    b = place[w]
                    pts = [_geodesic_raw(place[v], b, k / 32) for k in range(33)]
                    xy = " ".join("%.2f,%.2f" % _svg_point(p) for p in pts)
                    out.append(f'<polyline points="{xy}" fill="none" stroke="steelblue"/>')
            for v in tree.core:
                x, y = _svg_point(place[v])
                color = "red" if v == E.tree.special else "black"
                out.append(f'<circle cx="{x:.2f}" cy="{y:.2f}" r="3" fill="{color}"/>')
        out.append("</g>")
    out.append("</svg>")
    return "\n".join(out) + "\n"


def _verification_csv(V: dg.Verification) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["s", "qf_max", "end_residual", "critical_ok"])
    for s in sorted(V.qf_max):
        row = V.crit_counts.get(s)
        ok = "" if row is None else all(n == want for n, want in row.values())
        w.writerow([s, f"{V.qf_max[s]:.6f}", f"{V.end_residuals.get(s, 0.0):.3g}", ok])
    return buf.getvalue()


def _tree_json(E: dg.EmbeddedTree) -> dict:
    out = E.tree.to_json()
    out["diagnostics"] = {k: v for k, v in E.diagnostics.items() if k in ("unstable_s", "special_rule")}
    return out


def cmd_degen_realize(args, run: Run):
    T = PointedMetricTree.from_json(_load_json(args.tree))
    F = _realize_any(T, _grid(args))
    fam = F.to_json()
    run.write_json(Path(args.out).name if args.out else "family.json", fam)
    if args.out:
        Path(args.out).parent.mkdir(parents=True, exist_ok=True)
        Path(args.out).write_text(json.dumps(fam, indent=2, sort_keys=True) + "\n")
    V = dg.verify(F.embedded, F)
    run.write("verification.csv", _verification_csv(V))
    run.write("filmstrip.svg", filmstrip_svg(F.embedded))
    for line in V.lines():
        run.say(line)


def cmd_degen_extract(args, run: Run):
    F = dg.Family.from_json(_load_json(args.family))
    E = dg.extract_tree(F, args.split)
    run.write_json("tree.json", _tree_json(E))
    run.write("filmstrip.svg", filmstrip_svg(E))
    run.say(f"extracted tree: {len(E.tree.base.core)} core vertices, special rule "
            f"{E.diagnostics['special_rule']}")
    for k, x in sorted(E.tree.lengths.items(), key=lambda kv: sorted(kv[0])):
        a, b = sorted(k)
        run.say(f"  edge {a}-{b}: length {x:.4f}")


def cmd_degen_verify(args, run: Run):
    if args.tree:
        T = PointedMetricTree.from_json(_load_json(args.tree))
        F = _realize_any(T, _grid(args))
        E = F.embedded
    else:
        F = dg.Family.from_json(_load_json(args.family))
        E = dg.extract_tree(F, args.split)
    V = dg.verify(E, F, args.M, args.R)
    run.write("verification.csv", _verification_csv(V))
    run.write_json("verification.json", {"clauses": V.clauses, "M": V.M, "R": V.R,
                                         "K_prime": V.qf_bound, "qi_deviation": V.qi_deviation})
    for line in V.lines():
        run.say(line)


def _suite_row(T: PointedMetricTree):
    F = _realize_any(T, dg.DEFAULT_GRID)
    V = dg.verify(F.embedded, F)
    E = dg.extract_tree(F)
    return {"tree": repr(dg.pointed_code(T)), "passed": V.passed, "M": V.qi_deviation,
            "K_prime": V.M, "R": V.R, "round_trip": dg.pointed_code(E.tree) == dg.pointed_code(T)}


def cmd_degen_suite(args, run: Run):
    if args.d > 4:
        raise SizeLimit("the realization suite is capped at d = 4")
    trees = enumerate_pointed(args.d)
    with ProcessPoolExecutor(max_workers=_threads()) as ex:
        rows = list(ex.map(_suite_row, trees))
    run.write_json("realization.json", rows)
    for r in rows:
        run.say(f"{r['tree']}: M={r['M']:.3f} R={r['R']} K'={r['K_prime']:.3f} "
                f"verify={'PASS' if r['passed'] else 'FAIL'} round-trip={'PASS' if r['round_trip'] else 'FAIL'}")


# ---------------------------------------------------------------- monodromy


def _path_from_json(obj) -> list:
    if obj.get("loop") == "rotation":
        return mono.rotation_loop(int(obj["d"]), int(obj.get("samples", 64)))
    return [bl.AntiBlaschke.from_json(m) for m in obj["maps"]]


def _seeds(obj, path, period):
    if "seeds" in obj:
        return [Fraction(s) for s in obj["seeds"]]
    f = path[0]
    if all(abs(complex(b)) == 0 for b in f.params) and abs(complex(f.phase) - 1) == 0:
        return mono.seed_periodic_points(len(f.params), period)
    return None


def cmd_mono_trace(args, run: Run):
    obj = _load_json(args.path) if args.path else {"loop": "rotation", "d": args.d, "samples": args.samples}
    path = _path_from_json(obj)
    T = mono.trace(path, _seeds(obj, path, args.period), args.period, args.eps_sep)
    run.write_json("trace.json", T.to_json())
    run.say(f"permutation: {' '.join(map(str, T.permutation))}")
    run.say(f"braid: {' '.join(map(str, T.braid)) or '(empty)'}")


def cmd_mono_compose(args, run: Run):
    traces = []
    for p in args.path:
        obj = _load_json(p)
        path = _path_from_json(obj)
        seeds = traces[-1].final if traces else _seeds(obj, path, args.period)
        traces.append(mono.trace(path, seeds, args.period, args.eps_sep))
    T = traces[0]
    for U in traces[1:]:
        T = mono.compose(T, U)
    run.write_json("compose.json", T.to_json())
    run.say(f"permutation: {' '.join(map(str, T.permutation))}")
    run.say(f"braid: {' '.join(map(str, T.braid)) or '(empty)'}")


# ---------------------------------------------------------------- report


def cmd_report(args, run: Run):
    root = Path(args.dir)
    man = root / "manifest.json"
    if not man.exists():
        raise MissingArtifact(f"no manifest in {root}")
    manifest = json.loads(man.read_text())
    for name, digest in manifest["artifacts"].items():
        p = Path(name) if Path(name).is_absolute() else root / name
        if not p.exists():
            raise MissingArtifact(f"artifact {name} listed in the manifest is missing")
        if hashlib.sha256(p.read_bytes()).hexdigest() != digest:
            raise MissingArtifact(f"artifact {name} does not match its checksum")
    print(f"command: {manifest['config'].get('command')}  seed: {manifest['seed']}")
    if (root / "atlas.json").exists():
        rows = json.loads((root / "atlas.json").read_text())
        print("index  edges  |Aut|  verdict")
        for r in rows:
            print(f"{r['index']:>5}  {r['edges']:>5}  {r['aut']:>5}  {r['verdict']}")
        dot = (root / "poset.dot").read_text()
        chain = [line.strip().rstrip(";") for line in dot.splitlines() if "->" in line]
        print("domination: " + ", ".join(chain))
    if (root / "realization.json").exists():
        for r in json.loads((root / "realization.json").read_text()):
            print(f"{r['tree']}: M={r['M']:.3f} R={r['R']} K'={r['K_prime']:.3f}")
    for line in manifest.get("summary", []):
        print(line)


# ---------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="paredlab")
    p.add_argument("--out-dir", dest="out_dir", default=None, help="artifact directory")
    p.add_argument("--seed", type=int, default=0)
    sub = p.add_subparsers(dest="command", required=True)

    a = sub.add_parser("atlas")
    a.add_argument("--n", type=int, required=True)
    a.set_defaults(func=cmd_atlas)

    a = sub.add_parser("verdict")
    a.add_argument("--graph", required=True)
    a.set_defaults(func=cmd_verdict)

    a = sub.add_parser("bifurcates")
    a.add_argument("--graph", required=True)
    a.add_argument("--target", required=True)
    a.set_defaults(func=cmd_bifurcates)

    a = sub.add_parser("enrich")
    a.add_argument("--graph", required=True)
    a.set_defaults(func=cmd_enrich)

    a = sub.add_parser("admissible")
    g = a.add_mutually_exclusive_group(required=True)
    g.add_argument("--graph")
    g.add_argument("--fixture", choices=ti.fixture_names())
    a.set_defaults(func=cmd_admissible)

    a = sub.add_parser("mating-report")
    g = a.add_mutually_exclusive_group(required=True)
    g.add_argument("--graph")
    g.add_argument("--fixture", choices=ti.fixture_names())
    a.set_defaults(func=cmd_mating_report)

    a = sub.add_parser("lamination")
    a.add_argument("--d", type=int, required=True)
    a.add_argument("--gens", required=True, help="comma separated chords a:b")
    a.add_argument("--depth", type=int, default=3)
    a.add_argument("--svg")
    a.set_defaults(func=cmd_lamination)

    b = sub.add_parser("blaschke").add_subparsers(dest="action", required=True)
    a = b.add_parser("analyze")
    a.add_argument("--map")
    a.add_argument("--zeros", help="comma separated complex zeros, e.g. 0.3+0.1i")
    a.set_defaults(func=cmd_blaschke_analyze)
    a = b.add_parser("sweep")
    a.add_argument("--d", type=int, default=3)
    a.add_argument("--K", type=float, default=3.0)
    a.add_argument("--samples", type=int, default=200)
    a.set_defaults(func=cmd_blaschke_sweep)

    d = sub.add_parser("degen").add_subparsers(dest="action", required=True)
    a = d.add_parser("realize")
    a.add_argument("--tree", required=True)
    a.add_argument("--out")
    a.add_argument("--grid")
    a.set_defaults(func=cmd_degen_realize)
    a = d.add_parser("extract")
    a.add_argument("--family", required=True)
    a.add_argument("--split", type=float, default=dg.SPLIT)
    a.set_defaults(func=cmd_degen_extract)
    a = d.add_parser("verify")
    g = a.add_mutually_exclusive_group(required=True)
    g.add_argument("--family")
    g.add_argument("--tree")
    a.add_argument("--grid")
    a.add_argument("--split", type=float, default=dg.SPLIT)
    a.add_argument("--M", type=float, default=None)
    a.add_argument("--R", type=float, default=dg.R_BALL)
    a.set_defaults(func=cmd_degen_verify)
    a = d.add_parser("suite")
    a.add_argument("--d", type=int, default=3)
    a.set_defaults(func=cmd_degen_suite)

    m = sub.add_parser("mono").add_subparsers(dest="action", required=True)
    a = m.add_parser("trace")
    a.add_argument("--path")
    a.add_argument("--d", type=int, default=3)
    a.add_argument("--samples", type=int, default=64)
    a.add_argument("--period", type=int, default=3)
    a.add_argument("--eps-sep", dest="eps_sep", type=float, default=mono.EPS_SEP)
    a.set_defaults(func=cmd_mono_trace)
    a = m.add_parser("compose")
    a.add_argument("--path", action="append", required=True)
    a.add_argument("--period", type=int, default=3)
    a.add_argument("--eps-sep", dest="eps_sep", type=float, default=mono.EPS_SEP)
    a.set_defaults(func=cmd_mono_compose)

    a = sub.add_parser("report")
    a.add_argument("--dir", required=True)
    a.set_defaults(func=cmd_report)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    run = Run(args)
    try:
        args.func(args, run)
        if args.command != "report":
            run.finish()
    except ParedError as exc:
        rec = {"error": type(exc).__name__, "message": str(exc), "exit_code": exc.exit_code}
        print(json.dumps(rec), file=sys.stderr)
        return exc.exit_code
    return 0


if __name__ == "__main__":
    sys.exit(main())
