"""Marked ribbon trees, pointed metric trees and the reduction step.

A ribbon tree is stored as a map ``vertex id -> neighbors in ccw order``.
Vertex ids persist through reduction and regluing, which keeps the
bookkeeping of the realization induction readable.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from functools import lru_cache

from .errors import Irreducible, SizeLimit, ValidationError
from .planegraph import PlaneGraph

TREE_MAX_D = 6


class _Infinite:
    """Symbolic length of an end edge."""

    _inst = None

    def __new__(cls):
        if cls._inst is None:
            cls._inst = super().__new__(cls)
        return cls._inst

    def __repr__(self):
        return "INF"

    def __mul__(self, other):
        if not other > 0:
            raise ValidationError("can only dilate by a positive factor")
        return self

    __rmul__ = __mul__


INF = _Infinite()


@dataclass(eq=False)
class RibbonTree:
    adj: dict
    marked_end: int
    d: int
    valence_two: frozenset = frozenset()

    def __post_init__(self):
        self.adj = {int(v): list(ns) for v, ns in self.adj.items()}
        self.validate()

    def validate(self):
        adj = self.adj
        for v, ns in adj.items():
            if len(set(ns)) != len(ns):
                raise ValidationError(f"repeated neighbor at {v}")
            for w in ns:
                if v not in adj.get(w, ()):
                    raise ValidationError(f"edge {v}-{w} is not symmetric")
        nv = len(adj)
        ne = sum(len(ns) for ns in adj.values()) // 2
        if ne != nv - 1 or not self._connected():
            raise ValidationError("not a tree")
        for v, ns in adj.items():
            if len(ns) == 2 and v not in self.valence_two:
                raise ValidationError(f"vertex {v} has valence 2")
            if len(ns) == 0 and nv > 1:
                raise ValidationError("isolated vertex")
        if self.marked_end not in adj or len(adj[self.marked_end]) != 1:
            raise ValidationError("marked end is not a valence-1 vertex")
        if len(self.ends) != self.d + 1:
            raise ValidationError(f"expected {self.d + 1} ends, found {len(self.ends)}")
        s = sum(len(adj[v]) - 2 for v in self.core)
        if s != self.d - 1:
            raise ValidationError("valence count does not match the degree")

    def _connected(self):
        if not self.adj:
            return False
        start = next(iter(self.adj))
        seen = {start}
        stack = [start]
        while stack:
            v = stack.pop()
            for w in self.adj[v]:
                if w not in seen:
                    seen.add(w)
                    stack.append(w)
        return len(seen) == len(self.adj)

    # ------------------------------------------------------------ queries
    @property
    def vertices(self) -> list[int]:
        return sorted(self.adj)

    @property
    def ends(self) -> list[int]:
        return sorted(v for v, ns in self.adj.items() if len(ns) == 1)

    @property
    def core(self) -> list[int]:
        return sorted(v for v, ns in self.adj.items() if len(ns) != 1)

    @property
    def branch_points(self) -> list[int]:
        return sorted(v for v, ns in self.adj.items() if len(ns) >= 3)

    def valence(self, v: int) -> int:
        return len(self.adj[v])

    def nbrs(self, v: int) -> list[int]:
        return list(self.adj[v])

    def next_after(self, v: int, w: int) -> int:
        ns = self.adj[v]
        return ns[(ns.index(w) + 1) % len(ns)]

    def contour(self) -> list[tuple[int, int]]:
        """Directed edges in boundary order starting from the marked end
        (arrive at a vertex, leave by the next ccw neighbor)."""
        m = self.marked_end
        start = (m, self.adj[m][0])
        out = [start]
        a, b = start
        while True:
            c = self.next_after(b, a)
            a, b = b, c
            if (a, b) == start:
                return out
            out.append((a, b))

    def ends_ccw(self) -> list[int]:
        """Ends in ccw order around the tree, beginning with the marked end."""
        order = [self.marked_end]
        for a, b in self.contour():
            if len(self.adj[b]) == 1 and b != self.marked_end:
                order.append(b)
        return order

    def copy(self) -> RibbonTree:
        return RibbonTree({v: list(ns) for v, ns in self.adj.items()},
                          self.marked_end, self.d, self.valence_two)

    # ------------------------------------------------------------ canonical form
    def code(self, special: int | None = None, lengths: dict | None = None):
        """Nested tuple describing the tree rooted at the marked end, with
        children listed ccw after the parent.  Equal codes iff the marked
        ribbon trees are isomorphic."""

        def rec(v, parent):
            ns = self.adj[v]
            i = ns.index(parent)
            kids = ns[i + 1:] + ns[:i]
            tag = 1 if v == special else 0
            ln = None
            if lengths is not None and len(self.adj[v]) > 1 and len(self.adj[parent]) > 1:
                ln = lengths.get(frozenset((v, parent)), 1)
            return (tag, ln, tuple(rec(k, v) for k in kids))

        m = self.marked_end
        return rec(self.adj[m][0], m)

    def iso_map(self, other: RibbonTree) -> dict | None:
        """Vertex map to `other` preserving rotations and marked ends."""
        if self.code() != other.code():
            return None
        mapping = {self.marked_end: other.marked_end}

        def rec(v, parent, w, wparent):
            mapping[v] = w
            ns = self.adj[v]
            i = ns.index(parent)
            ms = other.adj[w]
            j = ms.index(wparent)
            for a, b in zip(ns[i + 1:] + ns[:i], ms[j + 1:] + ms[:j]):
                rec(a, v, b, w)

        rec(self.adj[self.marked_end][0], self.marked_end,
            other.adj[other.marked_end][0], other.marked_end)
        return mapping

    # ------------------------------------------------------------ conversions
    @property
    def graph(self) -> PlaneGraph:
        ids = self.vertices
        index = {v: i for i, v in enumerate(ids)}
        return PlaneGraph.from_rotation([[index[w] for w in self.adj[v]] for v in ids])

    def relabeled(self) -> tuple[RibbonTree, dict]:
        """Copy with vertices renumbered by a walk from the marked end."""
        order = [self.marked_end]
        for a, b in self.contour():
            if b not in order:
                order.append(b)
        new = {v: i for i, v in enumerate(order)}
        adj = {new[v]: [new[w] for w in ns] for v, ns in self.adj.items()}
        return RibbonTree(adj, 0, self.d, frozenset(new[v] for v in self.valence_two)), new

    def to_json(self) -> dict:
        t, new = self.relabeled()
        parent = [-1] * len(t.adj)
        stack = [0]
        seen = {0}
        while stack:
            v = stack.pop()
            for w in t.adj[v]:
                if w not in seen:
                    seen.add(w)
                    parent[w] = v
                    stack.append(w)
        return {"d": t.d, "parent": parent,
                "rotation": [t.adj[v] for v in range(len(t.adj))],
                "marked_end": 0}

    @classmethod
    def from_json(cls, obj) -> RibbonTree:
        if isinstance(obj, str):
            obj = json.loads(obj)
        rot = obj["rotation"]
        special = obj.get("special") or {}
        two = frozenset([special["vertex"]]) if special.get("vertex") is not None and \
            len(rot[special["vertex"]]) == 2 else frozenset()
        return cls({v: list(ns) for v, ns in enumerate(rot)}, obj["marked_end"], obj["d"], two)


def star(d: int) -> RibbonTree:
    """The (d+1)-ended star; vertex 0 is the center, end 1 is marked."""
    adj = {0: list(range(1, d + 2))}
    for i in range(1, d + 2):
        adj[i] = [0]
    return RibbonTree(adj, 1, d)


def isomorphic(a: RibbonTree, b: RibbonTree) -> bool:
    return a.d == b.d and a.code() == b.code()


# ---------------------------------------------------------------- enumeration


@lru_cache(maxsize=None)
def _shapes(k: int) -> tuple:
    """Plane rooted trees with k leaves where internal nodes have >= 2 children."""
    if k == 1:
        return ((),)
    out = []
    for parts in _compositions(k):
        for kids in itertools.product(*(_shapes(p) for p in parts)):
            out.append(tuple(kids))
    return tuple(out)


def _compositions(k: int):
    """Compositions of k into at least two positive parts."""
    for m in range(2, k + 1):
        for cuts in itertools.combinations(range(1, k), m - 1):
            bounds = (0,) + cuts + (k,)
            yield tuple(bounds[i + 1] - bounds[i] for i in range(m))


def tree_from_shape(shape, d: int) -> RibbonTree:
    adj = {0: []}
    counter = itertools.count(1)

    def build(node, parent):
        v = next(counter)
        adj[v] = [parent]
        adj[parent].append(v)
        for kid in node:
            build(kid, v)
        return v

    build(shape, 0)
    return RibbonTree(adj, 0, d)


def enumerate_trees(d: int) -> list[RibbonTree]:
    """All marked (d+1)-ended ribbon trees up to marked isomorphism."""
    if d < 2 or d > TREE_MAX_D:
        raise SizeLimit(f"tree enumeration covers 2 <= d <= {TREE_MAX_D}")
    out = [tree_from_shape(s, d) for s in _shapes(d)]
    out.sort(key=lambda t: (len(t.branch_points), repr(t.code())))
    return out


# ---------------------------------------------------------------- pointed metric trees


@dataclass(eq=False)
class PointedMetricTree:
    base: RibbonTree
    special: int
    lengths: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.special not in self.base.adj or self.base.valence(self.special) == 1:
            raise ValidationError("special point must be an interior vertex")
        v = self.base.valence(self.special)
        if v == 2 and self.special not in self.base.valence_two:
            raise ValidationError("valence-2 special point must be declared")
        self.lengths = {frozenset(k): float(x) for k, x in self.lengths.items()}
        for k, x in self.lengths.items():
            if not x > 0:
                raise ValidationError("edge lengths must be positive")

    @property
    def extended(self) -> bool:
        return self.base.valence(self.special) == 2

    @property
    def d(self) -> int:
        return self.base.d

    def length(self, u: int, v: int):
        if self.base.valence(u) == 1 or self.base.valence(v) == 1:
            return INF
        return self.lengths.get(frozenset((u, v)), 1.0)

    def core_distances(self, source: int | None = None) -> dict:
        """Distances from `source` (default: the special point) to core vertices."""
        src = self.special if source is None else source
        out = {src: 0.0}
        stack = [src]
        while stack:
            v = stack.pop()
            for w in self.base.adj[v]:
                if w in out or self.base.valence(w) == 1:
                    continue
                out[w] = out[v] + self.length(v, w)
                stack.append(w)
        return out

    def code(self):
        return self.base.code(special=self.special, lengths=self.lengths)

    def copy(self) -> PointedMetricTree:
        return PointedMetricTree(self.base.copy(), self.special, dict(self.lengths))

    def to_json(self) -> dict:
        t, new = self.base.relabeled()
        out = t.to_json()
        out["special"] = {"vertex": new[self.special]}
        out["lengths"] = [[new[a], new[b], x] for (a, b), x in
                          ((tuple(sorted(k)), x) for k, x in self.lengths.items())]
        return out

    @classmethod
    def from_json(cls, obj) -> PointedMetricTree:
        if isinstance(obj, str):
            obj = json.loads(obj)
        base = RibbonTree.from_json(obj)
        special = (obj.get("special") or {}).get("vertex")
        if special is None:
            special = base.branch_points[0]
        lengths = {frozenset((a, b)): x for a, b, x in obj.get("lengths", [])}
        return cls(base, special, lengths)


def pointed_isomorphic(a: PointedMetricTree, b: PointedMetricTree) -> bool:
    return a.d == b.d and a.code() == b.code()


def enumerate_pointed(d: int) -> list[PointedMetricTree]:
    """Pointed trees with unit metric: every marked tree with each choice of
    branch point as the special point."""
    return [PointedMetricTree(t, p) for t in enumerate_trees(d) for p in t.branch_points]


def extend_on_edge(T: RibbonTree, u: int, v: int, lengths=None, frac: float = 0.5) -> PointedMetricTree:
    """Insert a valence-2 special point on the edge u-v (core or end edge)."""
    adj = {x: list(ns) for x, ns in T.adj.items()}
    p = max(adj) + 1
    adj[u][adj[u].index(v)] = p
    adj[v][adj[v].index(u)] = p
    adj[p] = [u, v]
    lengths = dict(lengths or {})
    both_core = T.valence(u) > 1 and T.valence(v) > 1
    if both_core:
        total = lengths.pop(frozenset((u, v)), 1.0)
        lengths[frozenset((u, p))] = total * frac
        lengths[frozenset((p, v))] = total * (1 - frac)
    base = RibbonTree(adj, T.marked_end, T.d, T.valence_two | {p})
    return PointedMetricTree(base, p, lengths)


def dilate(T: PointedMetricTree, s: float) -> dict:
    """Metric table s * d_T on core vertex pairs; pairs with an end get INF."""
    if not s > 0:
        raise ValidationError("dilation factor must be positive")
    out = {}
    core = T.base.core
    for u in core:
        du = T.core_distances(u)
        for v in core:
            out[(u, v)] = s * du[v]
    for e in T.base.ends:
        for v in T.base.vertices:
            out[(e, v)] = INF
            out[(v, e)] = INF
    return out


# ---------------------------------------------------------------- reduction


@dataclass(frozen=True)
class Regluing:
    w: int                 # vertex where the end was attached
    y: int                 # removed end
    kept: bool             # w is still a vertex of the reduced tree
    rotation: tuple        # rotation at w before removal
    u: int | None = None   # core neighbor of w when w was unvertexed
    z: int | None = None   # end that absorbed w when w was unvertexed
    length: float = 1.0    # length of the core edge u-w


def reduce(T: PointedMetricTree) -> tuple[PointedMetricTree, Regluing]:
    """Remove one non-marked end at a vertex farthest from the special point.

    Ties are broken by the smallest vertex id.  A vertex left with valence
    2 is unvertexed (its two edges merge) unless it is the special point.
    """
    core = T.base.core
    if len(core) < 2:
        raise Irreducible("only one interior vertex")
    r = T.core_distances()
    far = max(r.values())
    w = min(v for v in core if abs(r[v] - far) < 1e-12)
    adj = T.base.adj
    ends_here = [x for x in adj[w] if len(adj[x]) == 1 and x != T.base.marked_end]
    if not ends_here:
        raise Irreducible(f"farthest vertex {w} carries no removable end")
    y = min(ends_here)
    rotation = tuple(adj[w])
    new = {x: list(ns) for x, ns in adj.items() if x != y}
    new[w].remove(y)
    lengths = dict(T.lengths)
    two = set(T.base.valence_two)
    if len(new[w]) == 2 and w != T.special:
        a, b = new[w]
        u, z = (a, b) if len(adj[a]) > 1 else (b, a)
        if len(adj[z]) > 1:
            raise Irreducible("unvertexed vertex would join two core edges")
        length = lengths.pop(frozenset((u, w)), 1.0)
        del new[w]
        new[u][new[u].index(w)] = z
        new[z] = [u]
        base = RibbonTree(new, T.base.marked_end, T.d - 1, frozenset(two))
        return (PointedMetricTree(base, T.special, lengths),
                Regluing(w, y, False, rotation, u, z, length))
    if len(new[w]) == 2:
        two.add(w)
    base = RibbonTree(new, T.base.marked_end, T.d - 1, frozenset(two))
    return PointedMetricTree(base, T.special, lengths), Regluing(w, y, True, rotation)


def reglue(T: PointedMetricTree, data: Regluing) -> PointedMetricTree:
    """Inverse of :func:`reduce`."""
    adj = {x: list(ns) for x, ns in T.base.adj.items()}
    lengths = dict(T.lengths)
    w, y = data.w, data.y
    if not data.kept:
        u, z = data.u, data.z
        adj[u][adj[u].index(z)] = w
        adj[z] = [w]
        lengths[frozenset((u, w))] = data.length
    adj[w] = list(data.rotation)
    adj[y] = [w]
    two = set(T.base.valence_two)
    if len(adj[w]) != 2:
        two.discard(w)
    base = RibbonTree(adj, T.base.marked_end, T.d + 1, frozenset(two))
    return PointedMetricTree(base, T.special, lengths)


def reduction_chain(T: PointedMetricTree) -> list[tuple[PointedMetricTree, Regluing]]:
    """Reduce until one interior vertex remains; returns [(tree before, data), ...]
    from the input downwards."""
    chain = []
    cur = T
    while len(cur.base.core) >= 2:
        nxt, data = reduce(cur)
        chain.append((cur, data))
        cur = nxt
    return chain
