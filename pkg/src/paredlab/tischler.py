"""Tischler graphs, enrichments, admissibility and arrow structures.

The Tischler graph of a plane graph G is its dual: a vertex per face of G.
Blowing up a vertex of valence k into a k-ended ribbon tree is the same as
cutting the face of G into chambers by non-crossing chords, so enrichments
are built from trees but audited through the dual graph G + chords.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from importlib import resources

from . import planegraph as pg
from .errors import (
    CyclicOrderViolation,
    DecorationMismatch,
    EndCountMismatch,
    NotRealizable,
    ValidationError,
)
from .planegraph import PlaneGraph
from .ribbontree import RibbonTree, enumerate_trees, star


@dataclass(frozen=True)
class TischlerGraph:
    graph: PlaneGraph
    vertex_degrees: tuple

    def __post_init__(self):
        for v in range(self.graph.n):
            if self.graph.valence(v) != self.vertex_degrees[v] + 1:
                raise ValidationError(f"vertex {v}: valence is not degree + 1")
        D = pg.dual(self.graph)
        if not D.is_simple() or not pg.is_k_connected(D, 2):
            raise NotRealizable("dual of a Tischler graph must be simple and 2-connected")

    @property
    def degree(self) -> int:
        # d + 1 = number of faces = number of critical fixed points of the map
        return sum(self.vertex_degrees) + 1


def tischler_of(G: PlaneGraph) -> TischlerGraph:
    if G.n < 3 or not G.is_simple() or not pg.is_k_connected(G, 2):
        raise NotRealizable("need a simple 2-connected plane graph on at least 3 vertices")
    T = pg.dual(G)
    return TischlerGraph(T, tuple(T.valence(v) - 1 for v in range(T.n)))


# ---------------------------------------------------------------- enrichments


@dataclass(frozen=True)
class Blowup:
    """A ribbon tree replacing a vertex.  The marked end attaches to
    `anchor`; the following ends (ccw around the tree) attach to the
    following darts ccw around the vertex."""

    tree: RibbonTree
    anchor: int
    attachment: dict | None = field(default=None, compare=False, hash=False)


@dataclass
class Enrichment:
    base: TischlerGraph
    blowups: dict
    result: PlaneGraph
    crossing: dict          # base dart -> result dart
    origin: list            # result vertex -> (base vertex, tree vertex)
    face_map: dict          # base face index -> result face index


def _attachment(T: PlaneGraph, v: int, b: Blowup) -> dict:
    ends = b.tree.ends_ccw()
    darts = T.darts_at(v)
    if len(ends) != len(darts):
        raise EndCountMismatch(f"vertex {v} has valence {len(darts)} but the tree has {len(ends)} ends")
    if b.anchor not in darts:
        raise ValidationError(f"anchor dart {b.anchor} is not at vertex {v}")
    k = darts.index(b.anchor)
    order = darts[k:] + darts[:k]
    natural = dict(zip(ends, order))
    if b.attachment is not None:
        given = {int(e): int(d) for e, d in b.attachment.items()}
        if given != natural:
            raise CyclicOrderViolation(f"attachment at vertex {v} does not respect the cyclic order")
    return natural


def enrich(T: TischlerGraph, blowups: dict) -> Enrichment:
    """Replace each vertex v by the tree blowups[v] (missing vertices stay
    as stars)."""
    G = T.graph
    full = {}
    for v in range(G.n):
        if v in blowups:
            full[v] = blowups[v]
        else:
            full[v] = Blowup(star(G.valence(v) - 1), G.darts_at(v)[0])
    attach = {v: _attachment(G, v, b) for v, b in full.items()}
    dart_end = {}
    for v, m in attach.items():
        for e, d in m.items():
            dart_end[d] = (v, e)
    rot = []
    origin = []
    index = {}
    for v in range(G.n):
        tree = full[v].tree
        for x in tree.core:
            index[(v, x)] = len(origin)
            origin.append((v, x))
    end_dart = {(v, e): d for d, (v, e) in dart_end.items()}
    for v, x in origin:
        tree = full[v].tree
        row = []
        for y in tree.adj[x]:
            if tree.valence(y) == 1:
                d = end_dart[(v, y)]
                row.append(("e", G.edge_id(d)))
            else:
                row.append(("t", v, min(x, y), max(x, y)))
        rot.append(row)
    R = PlaneGraph.from_edge_rotation(rot)
    named = _named_darts(rot)
    crossing = {}
    for ridx, (v, x) in enumerate(origin):
        tree = full[v].tree
        for pos, y in enumerate(tree.adj[x]):
            if tree.valence(y) == 1:
                crossing[end_dart[(v, y)]] = named[(ridx, pos)]
    face_map = _face_bijection(G, R, crossing)
    return Enrichment(T, full, R, crossing, origin, face_map)


def _face_bijection(G: PlaneGraph, R: PlaneGraph, crossing: dict) -> dict:
    foG = G.face_of()
    foR = R.face_of()
    m = {}
    for d, rd in crossing.items():
        f, g = foG[d], foR[rd]
        if m.setdefault(f, g) != g:
            raise ValidationError("faces of the enrichment do not match the base faces")
    if len(m) != G.num_faces or len(set(m.values())) != R.num_faces:
        raise ValidationError("face correspondence is not a bijection")
    return m


@dataclass
class Verdict:
    admissible: bool
    certificate: dict


def is_admissible(E: Enrichment) -> Verdict:
    """Admissible iff the dual of the enriched graph is simple and 2-connected."""
    D = pg.dual(E.result)
    loops = [d for d, u, v in D.edges() if u == v]
    if loops:
        return Verdict(False, {"kind": "self-loop", "edge": loops[0]})
    pairs = D.parallel_pairs()
    if pairs:
        a, b = pairs[0]
        return Verdict(False, {"kind": "bigon", "edges": [a, b],
                               "vertices": sorted({D.vertex_of[a], D.head(a)}),
                               "trivial": pg.bigon_is_trivial(D, a, b)})
    for v in range(D.n):
        if not pg._connected_without(D, {v}):
            return Verdict(False, {"kind": "cut-vertex", "vertex": v})
    return Verdict(True, {"kind": "simple-2-connected"})


def enriched_dual(E: Enrichment) -> PlaneGraph:
    return pg.dual(E.result)


# ---------------------------------------------------------------- blowup enumeration


def polygon_tree(k: int, chords) -> tuple[RibbonTree, list]:
    """Dual tree of a convex k-gon cut by non-crossing chords between
    corners.  Side i joins corners i and i+1 (ccw); end i+1 of the tree is
    side i and end 1 (side 0) is marked.  Returns (tree, side of each end)."""
    rot = [[(c + j) % k for j in range(1, k)] for c in range(k)]
    present = {frozenset(ch) for ch in chords}
    for c in range(k):
        rot[c] = [x for x in rot[c] if x in ((c + 1) % k, (c - 1) % k) or frozenset((c, x)) in present]
    P = PlaneGraph.from_rotation(rot)
    dart = {(P.vertex_of[d], P.head(d)): d for d in range(P.num_darts)}
    fo = P.face_of()
    outer = fo[dart[(0, 1 % k)]]
    inner = sorted({f for f in fo if f != outer})
    node = {f: k + 1 + i for i, f in enumerate(inner)}
    adj = {i + 1: [] for i in range(k)}
    for f in inner:
        adj[node[f]] = []
    faces = P.faces()
    for f in inner:
        walk = list(reversed(faces[f]))   # ccw around the chamber
        row = []
        for d in walk:
            u, w = P.vertex_of[d], P.head(d)
            if (u - w) % k == 1:
                side = w
                row.append(side + 1)
                adj[side + 1] = [node[f]]
            else:
                other = fo[P.opposite[d]]
                row.append(node[other])
        adj[node[f]] = row
    return RibbonTree(adj, 1, k - 1), list(range(k))


def dissections(k: int) -> list[tuple]:
    """All sets of pairwise non-crossing diagonals of a convex k-gon."""
    diags = [(i, j) for i in range(k) for j in range(i + 2, k) if not (i == 0 and j == k - 1)]

    def cross(a, b):
        (i, j), (p, q) = a, b
        return (i < p < j < q) or (p < i < q < j)

    out = []
    for r in range(len(diags) + 1):
        for sub in itertools.combinations(diags, r):
            if all(not cross(a, b) for a, b in itertools.combinations(sub, 2)):
                out.append(sub)
    return out


def _split_system(tree: RibbonTree, anchor_index: int, darts: list) -> frozenset:
    """Core edges of a blowup recorded as the dart sets they cut off."""
    ends = tree.ends_ccw()
    k = len(darts)
    m = {e: darts[(anchor_index + i) % k] for i, e in enumerate(ends)}
    out = set()
    for u in tree.core:
        for v in tree.adj[u]:
            if tree.valence(v) == 1 or v < u:
                continue
            side = _ends_beyond(tree, u, v)
            a = frozenset(m[e] for e in side)
            b = frozenset(darts) - a
            out.add(min(a, b, key=sorted))
    return frozenset(out)


def _ends_beyond(tree, u, v):
    seen = {u, v}
    stack = [v]
    ends = set()
    while stack:
        x = stack.pop()
        if tree.valence(x) == 1:
            ends.add(x)
        for y in tree.adj[x]:
            if y not in seen:
                seen.add(y)
                stack.append(y)
    return ends


def blowup_options(G: PlaneGraph, v: int) -> list[Blowup]:
    """Blowups of vertex v up to the cyclic symmetry of its darts: trees
    times anchors, one representative per system of splits."""
    darts = G.darts_at(v)
    k = len(darts)
    if k <= 3:
        return [Blowup(star(k - 1), darts[0])]
    seen = {}
    for tree in enumerate_trees(k - 1):
        for i in range(k):
            key = _split_system(tree, i, darts)
            if key not in seen:
                seen[key] = Blowup(tree, darts[i])
    return list(seen.values())


def enumerate_enrichments(T: TischlerGraph):
    """Every enrichment of T (a generator)."""
    G = T.graph
    opts = [blowup_options(G, v) for v in range(G.n)]
    for choice in itertools.product(*opts):
        yield enrich(T, dict(enumerate(choice)))


# ---------------------------------------------------------------- verdicts


@dataclass
class Boundedness:
    bounded: bool
    witness: Enrichment | None = None
    cut: tuple | None = None

    def __str__(self):
        return "Bounded" if self.bounded else "Unbounded"


def _named_darts(rot) -> dict:
    """(vertex, position) -> dart for PlaneGraph.from_edge_rotation(rot)."""
    seen = {}
    out = {}
    for v, lst in enumerate(rot):
        for pos, name in enumerate(lst):
            if name not in seen:
                seen[name] = len(seen)
                out[(v, pos)] = 2 * seen[name]
            else:
                out[(v, pos)] = 2 * seen[name] + 1
    return out


def _add_chords(G: PlaneGraph, chords):
    """G with extra edges (u, v, face index), each drawn inside its face.
    Returns the new graph and the embedding of G into it."""
    erot = [[("g", G.edge_id(d)) for d in G.darts_at(v)] for v in range(G.n)]
    faces = G.faces()
    for idx, (u, v, f) in enumerate(chords):
        for x in (u, v):
            # the corner of face f at x sits just ccw of opposite(d_in)
            d_in = next(d for d in faces[f] if G.head(d) == x)
            row = erot[x]
            row.insert(row.index(("g", G.edge_id(G.opposite[d_in]))) + 1, ("c", idx))
    Gp = PlaneGraph.from_edge_rotation(erot)
    named = _named_darts(erot)
    dm = []
    for d in range(G.num_darts):
        v = G.vertex_of[d]
        dm.append(named[(v, erot[v].index(("g", G.edge_id(d))))])
    dm = tuple(dm)
    em = {d: Gp.edge_id(dm[d]) for d, _, _ in G.edges()}
    emb = pg.GraphEmbedding(tuple(range(G.n)), em, dm,
                            not pg.face_coherence_violations(G, Gp, dm))
    return Gp, emb


def _two_cut_witness(G: PlaneGraph, u: int, v: int):
    faces = G.faces()
    both = []
    for i, face in enumerate(faces):
        verts = [G.vertex_of[d] for d in face]
        if u in verts and v in verts:
            k = len(verts)
            iu, iv = verts.index(u), verts.index(v)
            if (iu - iv) % k not in (1, k - 1):
                both.append(i)
    adjacent = v in G.adjacency()[u]
    options = []
    if adjacent:
        options += [[(u, v, f)] for f in both]
    options += [[(u, v, f1), (u, v, f2)] for f1, f2 in itertools.combinations(both, 2)]
    for chords in options:
        Gp, emb = _add_chords(G, chords)
        if pg.is_pseudo_simple(Gp) and not Gp.is_simple():
            return Gp, emb
    return None


def boundedness_verdict(G: PlaneGraph) -> Boundedness:
    if not G.is_simple() or not pg.is_k_connected(G, 2):
        raise NotRealizable("need a simple 2-connected plane graph")
    if pg.is_k_connected(G, 3):
        return Boundedness(True)
    T = tischler_of(G)
    for u, v in pg.separating_pairs(G):
        found = _two_cut_witness(G, u, v)
        if found is None:
            continue
        Gp, emb = found
        E = enrichment_from_embedding(G, Gp, emb)
        if not is_admissible(E).admissible:
            return Boundedness(False, E, (u, v))
    raise ValidationError("no witness enrichment found for a graph that is not 3-connected")


@dataclass
class Bifurcation:
    bifurcates: bool
    embeddings: list
    double_cosets: int
    enrichments: list


def bifurcates(G: PlaneGraph, Gp: PlaneGraph) -> Bifurcation:
    """True iff Gp strictly dominates G (same vertex count)."""
    if G.n != Gp.n:
        raise ValidationError("graphs must have the same number of vertices")
    embs = pg.embeddings(G, Gp)
    strict = bool(embs) and Gp.num_edges > G.num_edges
    if not strict:
        return Bifurcation(False, embs, pg.count_double_cosets(G, Gp) if embs else 0, [])
    reps = _double_coset_reps(G, Gp, embs)
    enrs = [enrichment_from_embedding(G, Gp, e) for e in reps]
    return Bifurcation(True, embs, len(reps), enrs)


def _double_coset_reps(G, H, embs):
    autG = pg.automorphisms(G)
    autH = pg.automorphisms(H)
    seen = set()
    reps = []
    for e in embs:
        if e.dart_map in seen:
            continue
        reps.append(e)
        for a in autG:
            for b in autH:
                seen.add(tuple(b[e.dart_map[a[d]]] for d in range(G.num_darts)))
    return reps


# ---------------------------------------------------------------- embeddings <-> enrichments


def chords_by_face(G: PlaneGraph, Gp: PlaneGraph, emb) -> dict:
    """Non-image edges of Gp grouped by the face of G containing them,
    each as a pair of corner positions on that face boundary."""
    dm = emb.dart_map
    image = set(dm)
    inv = {h: d for d, h in enumerate(dm)}
    foG = G.face_of()
    faces = G.faces()
    prev = {Gp.next_ccw[z]: z for z in range(Gp.num_darts)}
    vinv = {h: g for g, h in enumerate(emb.vertex_map)}
    out = {f: [] for f in range(len(faces))}
    for h in range(Gp.num_darts):
        if h in image or h > Gp.opposite[h]:
            continue
        y = h
        while y not in image:
            y = prev[y]
        f = foG[G.next_ccw[inv[y]]]
        face = faces[f]
        # corner of a vertex in face f: position of the dart leaving it
        corners = [G.vertex_of[d] for d in face]
        a = corners.index(vinv[Gp.vertex_of[h]])
        b = corners.index(vinv[Gp.head(h)])
        out[f].append((a, b))
    return out


def enrichment_from_embedding(G: PlaneGraph, Gp: PlaneGraph, emb) -> Enrichment:
    """The enrichment of the Tischler graph of G whose dual is Gp."""
    T = tischler_of(G)
    TG = T.graph
    faces = G.faces()
    chords = chords_by_face(G, Gp, emb)
    blowups = {}
    for f, face in enumerate(faces):
        k = len(face)
        # face darts in phi order run clockwise, corner i = vertex_of(face[i]);
        # ccw corner j is phi corner k-1-j, so ccw side j is face dart k-2-j
        mapped = [(k - 1 - a, k - 1 - b) for a, b in chords[f]]
        tree, _ = polygon_tree(k, mapped)
        side_dart = [face[(k - 2 - i) % k] for i in range(k)]
        attach = {i + 1: side_dart[i] for i in range(k)}
        ends = tree.ends_ccw()
        anchor = attach[ends[0]]
        darts_at = TG.darts_at(f)
        kk = darts_at.index(anchor)
        natural = {e: darts_at[(kk + i) % k] for i, e in enumerate(ends)}
        if natural != attach:
            raise CyclicOrderViolation("chamber tree does not match the face orientation")
        blowups[f] = Blowup(tree, anchor)
    return enrich(T, blowups)


def embedding_of_enrichment(G: PlaneGraph, E: Enrichment):
    """The embedding of G into the dual of the enriched graph given by the
    crossing edges."""
    Gp = pg.dual(E.result)
    R = E.result
    # dual dart r sits at the face right of r, and G dart d sits at the
    # vertex whose Tischler face contains opposite(d)
    dm = tuple(R.opposite[E.crossing[d]] for d in range(G.num_darts))
    vm = pg.vertex_map_of(G, Gp, dm)
    em = {d: Gp.edge_id(dm[d]) for d, _, _ in G.edges()}
    return Gp, pg.GraphEmbedding(vm, em, dm, not pg.face_coherence_violations(G, Gp, dm))


def same_double_coset(G, H, e1, e2) -> bool:
    for a in pg.automorphisms(G):
        for b in pg.automorphisms(H):
            if tuple(b[e1.dart_map[a[d]]] for d in range(G.num_darts)) == e2.dart_map:
                return True
    return False


# ---------------------------------------------------------------- arrow structures

DOT = None


@dataclass(frozen=True)
class Diagram:
    gamma: PlaneGraph
    gamma_prime: PlaneGraph
    embedding: pg.GraphEmbedding


@dataclass
class ArrowedGraph:
    graph: PlaneGraph
    decoration: dict     # face of graph -> DOT or edge id on its boundary

    def __post_init__(self):
        faces = self.graph.faces()
        if set(self.decoration) != set(range(len(faces))):
            raise DecorationMismatch("decoration must cover every face exactly once")
        for f, dec in self.decoration.items():
            if dec is DOT:
                continue
            if dec not in {self.graph.edge_id(d) for d in faces[f]}:
                raise DecorationMismatch(f"arrow of face {f} is not a boundary edge")

    def to_json(self):
        return {"graph": self.graph.to_json(),
                "decoration": {str(f): ("dot" if v is DOT else v) for f, v in self.decoration.items()}}


@dataclass
class _Chambers:
    """Chambers of each face of gamma, with the red-edge adjacency."""
    of_face: dict        # gamma face -> list of gamma' faces
    red: set             # gamma' edge ids not in the image
    boundary: dict       # gamma' face -> set of edge ids
    across: dict         # (gamma' face, red edge) -> neighbor gamma' face


def _chambers(diagram: Diagram) -> _Chambers:
    G, H, emb = diagram.gamma, diagram.gamma_prime, diagram.embedding
    image = set(emb.dart_map)
    red = {H.edge_id(h) for h in range(H.num_darts) if h not in image}
    foH = H.face_of()
    foG = G.face_of()
    facesH = H.faces()
    boundary = {f: {H.edge_id(d) for d in facesH[f]} for f in range(len(facesH))}
    across = {}
    for h in range(H.num_darts):
        e = H.edge_id(h)
        if e in red:
            across[(foH[h], e)] = foH[H.opposite[h]]
    owner = {}
    for g, h in enumerate(emb.dart_map):
        owner[foH[h]] = foG[g]
    stack = list(owner)
    while stack:
        f = stack.pop()
        for e in boundary[f]:
            if (f, e) in across:
                g = across[(f, e)]
                if g not in owner:
                    owner[g] = owner[f]
                    stack.append(g)
    if len(owner) != len(facesH):
        raise DecorationMismatch("could not place every chamber in a face")
    of_face = {}
    for fh, fg in owner.items():
        of_face.setdefault(fg, []).append(fh)
    for fg in range(G.num_faces):
        of_face.setdefault(fg, [])
    return _Chambers({k: sorted(v) for k, v in of_face.items()}, red, boundary, across)


def _toward(ch: _Chambers, start: int, target: int):
    """First red edge on the chamber path from start to target."""
    if start == target:
        return None
    prev = {start: None}
    q = [start]
    while q:
        f = q.pop(0)
        for e in sorted(ch.boundary[f]):
            g = ch.across.get((f, e))
            if g is not None and g not in prev:
                prev[g] = (f, e)
                q.append(g)
    if target not in prev:
        raise DecorationMismatch("chambers of a face are not connected")
    node = target
    first = None
    while prev[node] is not None:
        f, e = prev[node]
        first = e
        node = f
    return first


def _face_options(ch: _Chambers, fg: int) -> list[dict]:
    """All compatible decorations of the chambers of one face of gamma."""
    cells = ch.of_face[fg]
    out = []
    for dot in cells:
        dec = {c: (DOT if c == dot else _toward(ch, c, dot)) for c in cells}
        out.append(dec)
    edges = sorted(set().union(*(ch.boundary[c] for c in cells))) if cells else []
    for e in edges:
        dec = {}
        home = next(c for c in cells if e in ch.boundary[c])
        for c in cells:
            dec[c] = e if e in ch.boundary[c] else _toward(ch, c, home)
        if dec not in out:
            out.append(dec)
    return out


def arrow_compatible(diagram: Diagram, arrows: ArrowedGraph) -> bool:
    """Per face of gamma: either one dotted chamber and every arrow points
    toward it, or no dot and every arrow points toward one common edge."""
    if arrows.graph.num_darts != diagram.gamma_prime.num_darts or \
            arrows.graph.num_faces != diagram.gamma_prime.num_faces:
        raise DecorationMismatch("arrow structure lives on a different graph")
    ch = _chambers(diagram)
    for fg, cells in ch.of_face.items():
        local = {c: arrows.decoration[c] for c in cells}
        if local not in _face_options(ch, fg):
            return False
    return True


def compatible_structures(diagram: Diagram):
    """Every arrow structure compatible with the diagram (a generator)."""
    ch = _chambers(diagram)
    per_face = [_face_options(ch, fg) for fg in sorted(ch.of_face)]
    for combo in itertools.product(*per_face):
        dec = {}
        for part in combo:
            dec.update(part)
        yield dec


def common_structure(d1: Diagram, d2: Diagram):
    """An arrow structure compatible with both diagrams, or None."""
    ch2 = _chambers(d2)
    opts2 = {fg: _face_options(ch2, fg) for fg in ch2.of_face}
    for dec in compatible_structures(d1):
        if all({c: dec[c] for c in ch2.of_face[fg]} in opts2[fg] for fg in ch2.of_face):
            return dec
    return None


def cycle_diagram(Gp: PlaneGraph, cycle) -> Diagram:
    """Diagram of a Hamiltonian cycle of Gp viewed as an embedded n-gon."""
    n = Gp.n
    C = pg.cycle_graph(n)
    dartH = {(Gp.vertex_of[h], Gp.head(h)): h for h in range(Gp.num_darts)}
    vm = tuple(cycle[(i * 1) % n] for i in range(n))
    relabel = {i: vm[i] for i in range(n)}
    dm = tuple(dartH[(relabel[C.vertex_of[d]], relabel[C.head(d)])] for d in range(C.num_darts))
    em = {d: Gp.edge_id(dm[d]) for d, _, _ in C.edges()}
    return Diagram(C, Gp, pg.GraphEmbedding(vm, em, dm, True))


def cycle_orbits(Gp: PlaneGraph) -> list[list[tuple]]:
    """Hamiltonian cycles grouped into Aut(Gp)-orbits."""
    cycles = pg.hamiltonian_cycles(Gp)
    auts = [pg.vertex_map_of(Gp, Gp, a) for a in pg.automorphisms(Gp)]

    def key(cyc):
        n = len(cyc)
        return frozenset(frozenset((cyc[i], cyc[(i + 1) % n])) for i in range(n))

    remaining = {key(c): c for c in cycles}
    orbits = []
    for c in cycles:
        k = key(c)
        if k not in remaining:
            continue
        orb = []
        for a in auts:
            img = key(tuple(a[x] for x in c))
            if img in remaining:
                orb.append(remaining.pop(img))
        orbits.append(orb)
    return orbits


@dataclass
class MatingReport:
    cycles: list
    orbits: list
    pairs: list = field(default_factory=list)

    def lines(self) -> list[str]:
        out = [f"hamiltonian cycles: {len(self.cycles)}",
               f"orbits under Aut: {len(self.orbits)}"]
        for i, j, dec in self.pairs:
            if dec is None:
                out.append(f"orbits {i},{j}: no common arrow structure (distinct root components)")
            else:
                out.append(f"orbits {i},{j}: common arrow structure (self-bump candidate)")
        return out


def shared_mating_report(Gp: PlaneGraph) -> MatingReport:
    orbits = cycle_orbits(Gp)
    reps = [o[0] for o in orbits]
    rep = MatingReport(pg.hamiltonian_cycles(Gp), orbits)
    for i, j in itertools.combinations(range(len(reps)), 2):
        dec = common_structure(cycle_diagram(Gp, reps[i]), cycle_diagram(Gp, reps[j]))
        rep.pairs.append((i, j, dec))
    return rep


def arrows_from_json(H: PlaneGraph, items) -> ArrowedGraph:
    """Decoration given as [{"face": i, "arrow": "dot" | [u, v]}]."""
    dart = {(H.vertex_of[d], H.head(d)): d for d in range(H.num_darts)}
    dec = {}
    for it in items:
        a = it["arrow"]
        if a == "dot":
            dec[int(it["face"])] = DOT
        else:
            key = (int(a[0]), int(a[1]))
            if key not in dart:
                raise DecorationMismatch(f"no edge {key}")
            dec[int(it["face"])] = H.edge_id(dart[key])
    return ArrowedGraph(H, dec)


# ---------------------------------------------------------------- fixtures


def _fixture_text(name: str) -> str:
    return resources.files("paredlab.fixtures").joinpath(f"{name}.json").read_text()


def fixture_names() -> list[str]:
    return sorted(p.name[:-5] for p in resources.files("paredlab.fixtures").iterdir()
                  if p.name.endswith(".json"))


def load_fixture(name: str) -> dict:
    """Load a figure fixture and re-check the invariants it declares."""
    obj = json.loads(_fixture_text(name))
    out = {"name": name, "raw": obj}
    for key in ("gamma", "gamma_prime"):
        if key in obj:
            out[key] = PlaneGraph.from_json(obj[key])
    claims = obj.get("claims", {})
    G, H = out.get("gamma"), out.get("gamma_prime")
    if "blowups" in obj:
        T = tischler_of(G)
        blow = {}
        for v, b in obj["blowups"].items():
            blow[int(v)] = Blowup(RibbonTree.from_json(b["tree"]), b["anchor"])
        out["enrichment"] = enrich(T, blow)
    if "arrows" in obj:
        out["arrows"] = arrows_from_json(H, obj["arrows"])
    _check_claims(out, claims)
    return out


def _check_claims(fx: dict, claims: dict) -> None:
    G, H = fx.get("gamma"), fx.get("gamma_prime")

    def need(ok, what):
        if not ok:
            raise ValidationError(f"fixture {fx['name']}: {what} does not hold")

    for key, want in claims.items():
        if key == "n_vertices":
            need(all(g.n == want for g in (G, H) if g is not None), key)
        elif key == "aut_gamma":
            need(len(pg.automorphisms(G)) == want, key)
        elif key == "aut_gamma_prime":
            need(len(pg.automorphisms(H)) == want, key)
        elif key == "embeddings":
            need(len(pg.embeddings(G, H)) == want, key)
        elif key == "double_cosets":
            need(pg.count_double_cosets(G, H) == want, key)
        elif key == "hamiltonian_cycles":
            need(len(pg.hamiltonian_cycles(H)) == want, key)
        elif key == "max_chambers":
            for e in pg.embeddings(G, H):
                ch = _chambers(Diagram(G, H, e))
                need(max(len(c) for c in ch.of_face.values()) <= want, key)
        elif key == "common_arrow_structure":
            if G is not None and "hamiltonian_cycles" not in claims:
                embs = pg.embeddings(G, H)
                ds = [Diagram(G, H, e) for e in embs]
                got = common_structure(ds[0], ds[1]) is not None
            else:
                rep = shared_mating_report(H)
                got = all(dec is not None for _, _, dec in rep.pairs) and bool(rep.pairs)
            need(got == want, key)
        elif key == "arrows_compatible":
            if G is not None:
                ds = [Diagram(G, H, e) for e in pg.embeddings(G, H)]
            else:
                ds = [cycle_diagram(H, o[0]) for o in cycle_orbits(H)]
            need(all(arrow_compatible(d, fx["arrows"]) for d in ds) == want, key)
        elif key == "admissible":
            need(is_admissible(fx["enrichment"]).admissible == want, key)
        elif key == "pseudo_simple_dual":
            need(pg.is_pseudo_simple(pg.dual(fx["enrichment"].result)) == want, key)
        elif key == "gamma_is_cycle":
            need(pg.plane_isomorphic(G, pg.cycle_graph(G.n)) is not None, key)
        else:
            raise ValidationError(f"fixture {fx['name']}: unknown claim {key}")
