"""Search for the shipped figure fixtures (run once; output is committed).

The figures themselves are drawings, so the fixture graphs are found by
search among small plane graphs with the properties the text states.
"""

from __future__ import annotations

import itertools
import json
import pickle
import sys
import time
from pathlib import Path

from paredlab import planegraph as pg
from paredlab import tischler as ts

CACHE = Path("/tmp/atlas8.pkl")


def atlas(n):
    if n <= pg.ATLAS_MAX:
        return pg.enumerate_atlas(n)
    if CACHE.exists():
        return [pg.PlaneGraph.from_rotation(r) for r in pickle.loads(CACHE.read_bytes())]
    old = pg.ATLAS_MAX
    pg.ATLAS_MAX = n
    try:
        out = pg.enumerate_atlas(n)
    finally:
        pg.ATLAS_MAX = old
    CACHE.write_bytes(pickle.dumps([G.rotation() for G in out]))
    return out


def shared_mating(n, want_common):
    for G in atlas(n):
        if len(pg.automorphisms(G)) != 1 or len(pg.hamiltonian_cycles(G)) != 2:
            continue
        rep = ts.shared_mating_report(G)
        if (rep.pairs[0][2] is not None) == want_common:
            return G
    return None


def self_bump(n=8, max_chords=2):
    """Gamma, Gamma' on n vertices with trivial automorphism groups,
    exactly two embeddings, at most two chambers per face in both
    diagrams and a common compatible arrow structure."""
    for G in atlas(n):
        if len(pg.automorphisms(G)) != 1:
            continue
        faces = G.faces()
        options = []
        for f, face in enumerate(faces):
            verts = [G.vertex_of[d] for d in face]
            k = len(verts)
            for i, j in itertools.combinations(range(k), 2):
                if (j - i) % k in (1, k - 1):
                    continue
                options.append((verts[i], verts[j], f))
        for r in range(1, max_chords + 1):
            for combo in itertools.combinations(options, r):
                if len({c[2] for c in combo}) < r:
                    continue
                pairs = {frozenset(c[:2]) for c in combo}
                if len(pairs) < r or any(c[1] in G.adjacency()[c[0]] for c in combo):
                    continue
                H, _ = ts._add_chords(G, combo)
                if not H.is_simple() or len(pg.automorphisms(H)) != 1:
                    continue
                embs = pg.embeddings(G, H)
                if len(embs) != 2:
                    continue
                ds = [ts.Diagram(G, H, e) for e in embs]
                if any(max(len(c) for c in ts._chambers(d).of_face.values()) > 2 for d in ds):
                    continue
                if ts.common_structure(ds[0], ds[1]) is not None:
                    return G, H
    return None


def main():
    t = time.time()
    what = sys.argv[1]
    if what == "sb2":
        print(shared_mating(6, True).rotation())
    elif what == "nsb":
        print(shared_mating(7, False).rotation())
    elif what == "sb1":
        G, H = self_bump()
        print(json.dumps({"gamma": G.rotation(), "gamma_prime": H.rotation()}))
    elif what == "write":
        write_fixtures(self_bump(), shared_mating(6, True), shared_mating(7, False))
    print(f"{time.time() - t:.1f}s", file=sys.stderr)


def _arrows_json(H, dec):
    out = []
    for f in sorted(dec):
        e = dec[f]
        out.append({"face": f, "arrow": "dot" if e is None else [H.vertex_of[e], H.head(e)]})
    return out


def write_fixtures(sb1, sb2, nsb, outdir=Path("src/paredlab/fixtures")):
    C4 = pg.cycle_graph(4)
    H, emb = ts._add_chords(C4, [(0, 2, 0), (0, 2, 1)])
    E = ts.enrichment_from_embedding(C4, H, emb)
    nsg = {
        "description": "blowup of both vertices of the Tischler graph of conj(z)^3 "
                       "whose internal edges separate the same pair of faces",
        "gamma": {"rotation": C4.rotation()},
        "blowups": {str(v): {"tree": b.tree.to_json(), "anchor": b.anchor}
                    for v, b in E.blowups.items()},
        "claims": {"admissible": False, "pseudo_simple_dual": True},
    }
    G, H = sb1
    ds = [ts.Diagram(G, H, e) for e in pg.embeddings(G, H)]
    sb1a = {
        "description": "Gamma with two inequivalent embeddings into Gamma', both rigid",
        "gamma": {"rotation": G.rotation()},
        "gamma_prime": {"rotation": H.rotation()},
        "arrows": _arrows_json(H, ts.common_structure(ds[0], ds[1])),
        "claims": {"n_vertices": 8, "aut_gamma": 1, "aut_gamma_prime": 1, "embeddings": 2,
                   "double_cosets": 2, "max_chambers": 2, "common_arrow_structure": True,
                   "arrows_compatible": True},
    }
    rep = ts.shared_mating_report(sb2)
    sb2j = {
        "description": "rigid graph with two Hamiltonian cycles sharing an arrow structure",
        "gamma_prime": {"rotation": sb2.rotation()},
        "arrows": _arrows_json(sb2, rep.pairs[0][2]),
        "claims": {"aut_gamma_prime": 1, "hamiltonian_cycles": 2, "common_arrow_structure": True,
                   "arrows_compatible": True},
    }
    nsbj = {
        "description": "rigid graph with two Hamiltonian cycles and no common arrow structure",
        "gamma_prime": {"rotation": nsb.rotation()},
        "claims": {"aut_gamma_prime": 1, "hamiltonian_cycles": 2, "common_arrow_structure": False},
    }
    for name, obj in (("nsg", nsg), ("sb1a", sb1a), ("sb2", sb2j), ("nsb", nsbj)):
        (outdir / f"{name}.json").write_text(json.dumps(obj, indent=1) + "\n")


if __name__ == "__main__":
    main()
