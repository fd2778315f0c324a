"""Plane graphs on the sphere encoded by rotation systems.

A graph is a set of darts (half-edges) with two permutations: ``opposite``
pairs the two darts of an edge and ``next_ccw`` cycles counterclockwise
through the darts at a vertex.  Faces are the orbits of
``phi = next_ccw o opposite``, which walks each face boundary keeping the
face on the right.
"""

from __future__ import annotations

import itertools
import json
from collections import deque
from dataclasses import dataclass, field

from .errors import SizeLimit, ValidationError


@dataclass(frozen=True)
class PlaneGraph:
    n: int
    opposite: tuple
    next_ccw: tuple
    vertex_of: tuple
    labels: tuple | None = None

    def __post_init__(self):
        D = len(self.opposite)
        if len(self.next_ccw) != D or len(self.vertex_of) != D:
            raise ValidationError("dart arrays have different lengths")
        if sorted(self.next_ccw) != list(range(D)):
            raise ValidationError("next_ccw is not a permutation")
        for d in range(D):
            o = self.opposite[d]
            if o == d or self.opposite[o] != d:
                raise ValidationError("opposite is not a fixed-point-free involution")
            if self.vertex_of[self.next_ccw[d]] != self.vertex_of[d]:
                raise ValidationError("next_ccw leaves its vertex")
        seen = set()
        for d in range(D):
            if d in seen:
                continue
            orb = _orbit(self.next_ccw, d)
            seen.update(orb)
        counts = [0] * self.n
        for v in self.vertex_of:
            if not 0 <= v < self.n:
                raise ValidationError("vertex index out of range")
            counts[v] += 1
        if self.n > 1 and min(counts) == 0:
            raise ValidationError("isolated vertex")
        # each vertex must carry a single next_ccw orbit
        starts = {}
        for d in range(D):
            starts.setdefault(self.vertex_of[d], d)
        for v, d in starts.items():
            if len(_orbit(self.next_ccw, d)) != counts[v]:
                raise ValidationError(f"vertex {v} carries more than one rotation cycle")
        if D and not self._connected():
            raise ValidationError("graph is not connected")
        if self.n - self.num_edges + self.num_faces != 2:
            raise ValidationError("Euler characteristic is not 2")

    # ------------------------------------------------------------ basics
    @property
    def num_darts(self) -> int:
        return len(self.opposite)

    @property
    def num_edges(self) -> int:
        return len(self.opposite) // 2

    def phi(self, d: int) -> int:
        return self.next_ccw[self.opposite[d]]

    def faces(self) -> list[list[int]]:
        """Face boundaries as phi-orbits, ordered by their smallest dart."""
        seen = set()
        out = []
        for d in range(self.num_darts):
            if d in seen:
                continue
            orb = []
            x = d
            while x not in seen:
                seen.add(x)
                orb.append(x)
                x = self.phi(x)
            out.append(orb)
        return out

    @property
    def num_faces(self) -> int:
        return len(self.faces())

    def face_of(self) -> list[int]:
        lab = [0] * self.num_darts
        for i, f in enumerate(self.faces()):
            for d in f:
                lab[d] = i
        return lab

    def darts_at(self, v: int) -> list[int]:
        """Darts at v in counterclockwise order, starting from the smallest."""
        ds = [d for d in range(self.num_darts) if self.vertex_of[d] == v]
        if not ds:
            return []
        return _orbit(self.next_ccw, min(ds))

    def head(self, d: int) -> int:
        return self.vertex_of[self.opposite[d]]

    def edge_id(self, d: int) -> int:
        return min(d, self.opposite[d])

    def edges(self) -> list[tuple[int, int, int]]:
        """(edge dart, tail, head) for every edge, keyed by its smaller dart."""
        return [(d, self.vertex_of[d], self.head(d))
                for d in range(self.num_darts) if d < self.opposite[d]]

    def valence(self, v: int) -> int:
        return sum(1 for x in self.vertex_of if x == v)

    def neighbors(self, v: int) -> list[int]:
        return [self.head(d) for d in self.darts_at(v)]

    def adjacency(self) -> list[set]:
        adj = [set() for _ in range(self.n)]
        for d, u, v in self.edges():
            adj[u].add(v)
            adj[v].add(u)
        return adj

    def has_self_loop(self) -> bool:
        return any(u == v for _, u, v in self.edges())

    def parallel_pairs(self) -> list[tuple[int, int]]:
        """Pairs of edge darts joining the same two distinct vertices."""
        es = [(d, frozenset((u, v))) for d, u, v in self.edges() if u != v]
        return [(a, b) for (a, ka), (b, kb) in itertools.combinations(es, 2) if ka == kb]

    def is_simple(self) -> bool:
        return not self.has_self_loop() and not self.parallel_pairs()

    def _connected(self) -> bool:
        seen = {0}
        stack = [0]
        while stack:
            d = stack.pop()
            for e in (self.opposite[d], self.next_ccw[d]):
                if e not in seen:
                    seen.add(e)
                    stack.append(e)
        return len(seen) == self.num_darts

    # ------------------------------------------------------------ constructors
    @classmethod
    def from_rotation(cls, rot, labels=None) -> PlaneGraph:
        """Simple graph from ccw neighbor lists ``rot[v]``."""
        n = len(rot)
        dart_of = {}
        vertex_of = []
        for v in range(n):
            for w in rot[v]:
                if (v, w) in dart_of:
                    raise ValidationError("repeated neighbor; use from_edge_rotation for multigraphs")
                dart_of[(v, w)] = len(vertex_of)
                vertex_of.append(v)
        opposite = [0] * len(vertex_of)
        next_ccw = [0] * len(vertex_of)
        for (v, w), d in dart_of.items():
            if (w, v) not in dart_of:
                raise ValidationError(f"edge {v}-{w} missing its reverse")
            opposite[d] = dart_of[(w, v)]
        for v in range(n):
            ds = [dart_of[(v, w)] for w in rot[v]]
            for i, d in enumerate(ds):
                next_ccw[d] = ds[(i + 1) % len(ds)]
        return cls(n, tuple(opposite), tuple(next_ccw), tuple(vertex_of),
                   tuple(labels) if labels is not None else None)

    @classmethod
    def from_edge_rotation(cls, rot, labels=None) -> PlaneGraph:
        """Multigraph from ccw lists of edge names at each vertex.

        Each edge name occurs exactly twice overall; the first occurrence
        (scanning vertices in order) becomes dart 2e and the second 2e+1.
        """
        names = {}
        vertex_of = {}
        pos = []
        for v, lst in enumerate(rot):
            row = []
            for name in lst:
                if name not in names:
                    names[name] = len(names)
                    d = 2 * names[name]
                else:
                    d = 2 * names[name] + 1
                if d in vertex_of:
                    raise ValidationError(f"edge {name!r} used more than twice")
                vertex_of[d] = v
                row.append(d)
            pos.append(row)
        D = 2 * len(names)
        if len(vertex_of) != D:
            raise ValidationError("every edge must appear exactly twice")
        next_ccw = [0] * D
        for row in pos:
            for i, d in enumerate(row):
                next_ccw[d] = row[(i + 1) % len(row)]
        opposite = tuple(d ^ 1 for d in range(D))
        return cls(len(rot), opposite, tuple(next_ccw), tuple(vertex_of[d] for d in range(D)),
                   tuple(labels) if labels is not None else None)

    def relabel_darts(self, perm) -> PlaneGraph:
        """Graph with dart d renamed perm[d]."""
        D = self.num_darts
        inv = [0] * D
        for d, p in enumerate(perm):
            inv[p] = d
        opp = tuple(perm[self.opposite[inv[p]]] for p in range(D))
        nxt = tuple(perm[self.next_ccw[inv[p]]] for p in range(D))
        vo = tuple(self.vertex_of[inv[p]] for p in range(D))
        return PlaneGraph(self.n, opp, nxt, vo, self.labels)

    def relabel_vertices(self, perm) -> PlaneGraph:
        vo = tuple(perm[v] for v in self.vertex_of)
        labels = None
        if self.labels is not None:
            labels = [None] * self.n
            for v, lab in enumerate(self.labels):
                labels[perm[v]] = lab
            labels = tuple(labels)
        return PlaneGraph(self.n, self.opposite, self.next_ccw, vo, labels)

    def rotation(self) -> list[list[int]]:
        return [self.neighbors(v) for v in range(self.n)]

    # ------------------------------------------------------------ serialization
    def to_json(self) -> dict:
        out = {
            "vertices": self.n,
            "darts": list(range(self.num_darts)),
            "opposite": list(self.opposite),
            "next_ccw": list(self.next_ccw),
            "vertex_of": list(self.vertex_of),
        }
        if self.labels is not None:
            out["labels"] = {str(i): lab for i, lab in enumerate(self.labels)}
        return out

    @classmethod
    def from_json(cls, obj) -> PlaneGraph:
        if isinstance(obj, str):
            obj = json.loads(obj)
        if "rotation" in obj and "next_ccw" not in obj:
            return cls.from_rotation(obj["rotation"])
        n = obj["vertices"]
        nxt = obj["next_ccw"]
        vo = obj.get("vertex_of")
        if vo is None:
            vo = [None] * len(nxt)
            k = 0
            for d in range(len(nxt)):
                if vo[d] is None:
                    for x in _orbit(nxt, d):
                        vo[x] = k
                    k += 1
        labels = obj.get("labels")
        if isinstance(labels, dict):
            labels = tuple(labels.get(str(i)) for i in range(n))
        return cls(n, tuple(obj["opposite"]), tuple(nxt), tuple(vo),
                   tuple(labels) if labels is not None else None)

    def to_dot(self, name: str = "G") -> str:
        lines = [f"graph {name} {{"]
        for i, f in enumerate(self.faces()):
            verts = " ".join(str(self.vertex_of[d]) for d in f)
            lines.append(f"  // face {i}: {verts}")
        for v in range(self.n):
            lab = self.labels[v] if self.labels else v
            lines.append(f'  {v} [label="{lab}"];')
        for d, u, v in self.edges():
            lines.append(f"  {u} -- {v};")
        lines.append("}")
        return "\n".join(lines) + "\n"


def _orbit(perm, d) -> list[int]:
    out = [d]
    x = perm[d]
    while x != d:
        out.append(x)
        x = perm[x]
    return out


# ---------------------------------------------------------------- duality


def dual(G: PlaneGraph) -> PlaneGraph:
    """Planar dual.  Dart d of the dual crosses the edge of d and sits at the
    face on the right of d; going counterclockwise around a dual vertex
    reverses the face walk."""
    fo = G.face_of()
    D = G.num_darts
    inv_phi = [0] * D
    for d in range(D):
        inv_phi[G.phi(d)] = d
    return PlaneGraph(G.num_faces, G.opposite, tuple(inv_phi), tuple(fo))


# ---------------------------------------------------------------- connectivity


def _connected_without(G: PlaneGraph, removed: set) -> bool:
    adj = G.adjacency()
    rest = [v for v in range(G.n) if v not in removed]
    if not rest:
        return True
    seen = {rest[0]}
    stack = [rest[0]]
    while stack:
        u = stack.pop()
        for w in adj[u]:
            if w not in removed and w not in seen:
                seen.add(w)
                stack.append(w)
    return len(seen) == len(rest)


def is_k_connected(G: PlaneGraph, k: int) -> bool:
    if G.n <= k:
        return False
    for r in range(k):
        for cut in itertools.combinations(range(G.n), r):
            if not _connected_without(G, set(cut)):
                return False
    return True


def separating_pairs(G: PlaneGraph) -> list[tuple[int, int]]:
    return [c for c in itertools.combinations(range(G.n), 2)
            if not _connected_without(G, set(c))]


def bigon_sides(G: PlaneGraph, e1: int, e2: int) -> tuple[set, set]:
    """The two face sets separated by the closed curve formed by two
    parallel edges (given by darts)."""
    Dg = dual(G)
    cut = {G.edge_id(e1), G.edge_id(e2)}
    start = Dg.vertex_of[e1]
    side = {start}
    stack = [start]
    by_vertex = {}
    for d in range(Dg.num_darts):
        by_vertex.setdefault(Dg.vertex_of[d], []).append(d)
    while stack:
        f = stack.pop()
        for d in by_vertex.get(f, []):
            if G.edge_id(d) in cut:
                continue
            g = Dg.head(d)
            if g not in side:
                side.add(g)
                stack.append(g)
    other = set(range(Dg.n)) - side
    return side, other


def bigon_is_trivial(G: PlaneGraph, e1: int, e2: int) -> bool:
    """True if one of the two regions bounded by the parallel pair contains
    no vertex of G."""
    a, b = bigon_sides(G, e1, e2)
    ends = {G.vertex_of[e1], G.head(e1)}
    fo = G.face_of()
    in_a = in_b = False
    for v in range(G.n):
        if v in ends:
            continue
        f = fo[G.darts_at(v)[0]]
        if f in a:
            in_a = True
        else:
            in_b = True
    return not (in_a and in_b)


def is_pseudo_simple(G: PlaneGraph) -> bool:
    if G.has_self_loop():
        return False
    return not any(bigon_is_trivial(G, a, b) for a, b in G.parallel_pairs())


# ---------------------------------------------------------------- isomorphism


def _extend(G: PlaneGraph, H: PlaneGraph, d0: int, h0: int):
    m = {d0: h0}
    used = {h0}
    stack = [d0]
    while stack:
        d = stack.pop()
        h = m[d]
        for gp, hp in ((G.opposite, H.opposite), (G.next_ccw, H.next_ccw)):
            e, k = gp[d], hp[h]
            if e in m:
                if m[e] != k:
                    return None
            else:
                if k in used:
                    return None
                m[e] = k
                used.add(k)
                stack.append(e)
    if len(m) != G.num_darts:
        return None
    return tuple(m[d] for d in range(G.num_darts))


def plane_isomorphic(G: PlaneGraph, H: PlaneGraph):
    """A dart bijection commuting with opposite and next_ccw, or None."""
    if (G.n, G.num_darts, G.num_faces) != (H.n, H.num_darts, H.num_faces):
        return None
    if G.num_darts == 0:
        return ()
    for h in range(H.num_darts):
        m = _extend(G, H, 0, h)
        if m is not None:
            return m
    return None


def automorphisms(G: PlaneGraph) -> list[tuple]:
    if G.num_darts == 0:
        return [()]
    out = []
    for h in range(G.num_darts):
        m = _extend(G, G, 0, h)
        if m is not None:
            out.append(m)
    return out


def canonical_code(G: PlaneGraph) -> tuple:
    """Minimal BFS dart code over all start darts; equal codes iff the
    graphs are orientation-preservingly plane isomorphic."""
    best = None
    for s in range(G.num_darts):
        lab = {s: 0}
        order = [s]
        q = deque([s])
        while q:
            d = q.popleft()
            for e in (G.next_ccw[d], G.opposite[d]):
                if e not in lab:
                    lab[e] = len(order)
                    order.append(e)
                    q.append(e)
        code = tuple((lab[G.opposite[d]], lab[G.next_ccw[d]]) for d in order)
        if best is None or code < best:
            best = code
    return (G.n, best)


def vertex_map_of(G: PlaneGraph, H: PlaneGraph, dart_map) -> tuple:
    vm = [None] * G.n
    for d, h in enumerate(dart_map):
        vm[G.vertex_of[d]] = H.vertex_of[h]
    return tuple(vm)


# ---------------------------------------------------------------- embeddings


@dataclass(frozen=True)
class GraphEmbedding:
    vertex_map: tuple
    edge_map: dict = field(compare=False, hash=False)
    dart_map: tuple = ()
    coherent: bool = True


def _cyclic_subsequence(sub, full) -> bool:
    """True if `sub` appears in `full` in the same cyclic order."""
    if len(sub) <= 2:
        return set(sub) <= set(full)
    pos = {x: i for i, x in enumerate(full)}
    if any(x not in pos for x in sub):
        return False
    idx = [pos[x] for x in sub]
    k = idx.index(min(idx))
    rolled = idx[k:] + idx[:k]
    return all(rolled[i] < rolled[i + 1] for i in range(len(rolled) - 1))


def _require_simple(G: PlaneGraph):
    if not G.is_simple():
        raise ValidationError("embeddings are defined here between simple graphs")


def embeddings(G: PlaneGraph, H: PlaneGraph) -> list[GraphEmbedding]:
    """All orientation-preserving plane embeddings of G into H on the same
    vertex set size: vertex bijections carrying edges to edges and the
    rotation at each vertex to a cyclic subsequence of the image rotation."""
    if G.n != H.n:
        raise ValidationError("domination compares graphs with the same number of vertices")
    _require_simple(G)
    _require_simple(H)
    if G.num_edges > H.num_edges:
        return []
    adjH = H.adjacency()
    rotG = G.rotation()
    rotH = H.rotation()
    dartH = {(H.vertex_of[d], H.head(d)): d for d in range(H.num_darts)}
    order = _bfs_vertex_order(G)
    out = []
    assign = {}
    usedH = set()

    def rec(i):
        if i == len(order):
            vm = tuple(assign[v] for v in range(G.n))
            if all(_cyclic_subsequence([vm[w] for w in rotG[v]], rotH[vm[v]]) for v in range(G.n)):
                dm = tuple(dartH[(vm[G.vertex_of[d]], vm[G.head(d)])] for d in range(G.num_darts))
                em = {d: H.edge_id(dm[d]) for d, _, _ in G.edges()}
                out.append(GraphEmbedding(vm, em, dm, not face_coherence_violations(G, H, dm)))
            return
        v = order[i]
        for h in range(H.n):
            if h in usedH:
                continue
            if len(adjH[h]) < len(rotG[v]):
                continue
            if all(assign[w] in adjH[h] for w in rotG[v] if w in assign):
                assign[v] = h
                usedH.add(h)
                rec(i + 1)
                del assign[v]
                usedH.discard(h)

    rec(0)
    return out


def _bfs_vertex_order(G: PlaneGraph) -> list[int]:
    adj = G.adjacency()
    seen = [0]
    q = deque([0])
    mark = {0}
    while q:
        u = q.popleft()
        for w in sorted(adj[u]):
            if w not in mark:
                mark.add(w)
                seen.append(w)
                q.append(w)
    return seen


def face_coherence_violations(G: PlaneGraph, H: PlaneGraph, dart_map) -> list[int]:
    """Darts of H outside the image whose two ends fall in different faces
    of G.  Each non-image edge must run inside a single face of G."""
    image = set(dart_map)
    inv = {h: d for d, h in enumerate(dart_map)}
    foG = G.face_of()
    bad = []
    for h in range(H.num_darts):
        if h in image or h > H.opposite[h]:
            continue
        faces = []
        for x in (h, H.opposite[h]):
            # walk clockwise at the vertex to the previous image dart
            y = x
            prev = {H.next_ccw[z]: z for z in range(H.num_darts)}
            while y not in image:
                y = prev[y]
                if y == x:
                    break
            if y not in image:
                faces.append(None)
                continue
            g = inv[y]
            faces.append(foG[G.next_ccw[g]])
        if faces[0] != faces[1]:
            bad.append(h)
    return bad


def dominates(H: PlaneGraph, G: PlaneGraph) -> bool:
    return bool(embeddings(G, H))


def count_double_cosets(G: PlaneGraph, H: PlaneGraph) -> int:
    """Number of Aut(G) x Aut(H) orbits on the embeddings of G into H."""
    embs = [e.dart_map for e in embeddings(G, H)]
    if not embs:
        return 0
    index = {e: i for i, e in enumerate(embs)}
    parent = list(range(len(embs)))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    autG = automorphisms(G)
    autH = automorphisms(H)
    for i, e in enumerate(embs):
        for a in autG:
            for b in autH:
                img = tuple(b[e[a[d]]] for d in range(G.num_darts))
                j = index.get(img)
                if j is None:
                    raise ValidationError("embedding set is not closed under automorphisms")
                ri, rj = find(i), find(j)
                if ri != rj:
                    parent[ri] = rj
    return len({find(i) for i in range(len(embs))})


# ---------------------------------------------------------------- Hamiltonian cycles


def hamiltonian_cycles(G: PlaneGraph) -> list[tuple]:
    """Hamiltonian cycles as vertex tuples starting at 0, one per cycle
    (rotations and reflections identified)."""
    n = G.n
    if n < 3:
        return []
    adj = G.adjacency()
    out = []
    for perm in itertools.permutations(range(1, n)):
        if perm[0] > perm[-1]:
            continue
        cyc = (0,) + perm
        if all(cyc[(i + 1) % n] in adj[cyc[i]] for i in range(n)):
            out.append(cyc)
    return out


# ---------------------------------------------------------------- atlas

ATLAS_MAX = 7


def cycle_graph(k: int) -> PlaneGraph:
    return PlaneGraph.from_rotation([[(v + 1) % k, (v - 1) % k] for v in range(k)])


def _faces_of_rotation(rot):
    """Face corner lists [(vertex, incoming neighbor)] of a simple rotation."""
    seen = set()
    faces = []
    for u in range(len(rot)):
        for v in rot[u]:
            if (u, v) in seen:
                continue
            face = []
            a, b = u, v
            while (a, b) not in seen:
                seen.add((a, b))
                face.append((b, a))
                nb = rot[b]
                c = nb[(nb.index(a) + 1) % len(nb)]
                a, b = b, c
            faces.append(face)
    return faces


def _add_ear(rot, c1, c2, m):
    """Add a path with m new vertices inside a face between corners
    c1=(v, incoming u) and c2.  The new dart at v goes right after u."""
    rot = [list(r) for r in rot]
    n = len(rot)
    new = list(range(n, n + m))
    path = [c1[0]] + new + [c2[0]]
    for x in new:
        rot.append([])
    for corner, nxt in ((c1, path[1]), (c2, path[-2])):
        v, u = corner
        i = rot[v].index(u)
        rot[v].insert(i + 1, nxt)
    for i, x in enumerate(new):
        # the face lies to the left of the walk c1 -> c2; orientation at a
        # degree-2 vertex is immaterial
        rot[x] = [path[i + 2], path[i]]
    return rot


def enumerate_atlas(n: int) -> list[PlaneGraph]:
    """All 2-connected simple plane graphs on n vertices up to orientation
    preserving plane isomorphism, built by adding ears inside faces."""
    if n > ATLAS_MAX:
        raise SizeLimit(f"atlas enumeration is limited to n <= {ATLAS_MAX}")
    if n < 3:
        return []
    seen = {}
    frontier = []
    for k in range(3, n + 1):
        rot = [[(v + 1) % k, (v - 1) % k] for v in range(k)]
        G = PlaneGraph.from_rotation(rot)
        code = canonical_code(G)
        if code not in seen:
            seen[code] = rot
            frontier.append(rot)
    while frontier:
        nxt = []
        for rot in frontier:
            nv = len(rot)
            for face in _faces_of_rotation(rot):
                for i, j in itertools.combinations(range(len(face)), 2):
                    c1, c2 = face[i], face[j]
                    for m in range(0, n - nv + 1):
                        if m == 0 and c2[0] in rot[c1[0]]:
                            continue
                        new = _add_ear(rot, c1, c2, m)
                        G = PlaneGraph.from_rotation(new)
                        code = canonical_code(G)
                        if code not in seen:
                            seen[code] = new
                            nxt.append(new)
        frontier = nxt
    out = [PlaneGraph.from_rotation(r) for r in seen.values() if len(r) == n]
    out.sort(key=lambda G: (G.num_edges, canonical_code(G)))
    return out


# ---------------------------------------------------------------- named graphs


def k4() -> PlaneGraph:
    return PlaneGraph.from_rotation([[1, 2, 3], [0, 3, 2], [0, 1, 3], [0, 2, 1]])


def c4_chord() -> PlaneGraph:
    return PlaneGraph.from_rotation([[1, 2, 3], [2, 0], [3, 0, 1], [0, 2]])


def path_graph(k: int) -> PlaneGraph:
    rot = [[] for _ in range(k)]
    for i in range(k - 1):
        rot[i].append(i + 1)
        rot[i + 1].append(i)
    return PlaneGraph.from_rotation(rot)
