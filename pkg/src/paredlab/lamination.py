"""Exact circle dynamics of t -> -d t and laminations generated by 2-cycles.

Angles are Fractions in [0, 1).  Pullbacks are computed on integer
numerators over a common denominator so that all crossing tests are exact.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction

from .errors import NonUniqueMatching, NotSimple, ValidationError
from .ribbontree import RibbonTree

DEFAULT_DEPTH_CAP = 8


def angle(x) -> Fraction:
    """Coerce to an exact angle in [0, 1)."""
    if isinstance(x, str):
        x = Fraction(x)
    if isinstance(x, float):
        raise ValidationError("angles must be exact rationals")
    return Fraction(x) % 1


def m_minus_d(t, d: int) -> Fraction:
    if d < 2:
        raise ValidationError("degree must be at least 2")
    return (-d * angle(t)) % 1


@dataclass(frozen=True, order=True)
class Chord:
    a: Fraction
    b: Fraction

    def __post_init__(self):
        a, b = angle(self.a), angle(self.b)
        if a == b:
            raise ValidationError("chord endpoints coincide")
        if a > b:
            a, b = b, a
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)

    @classmethod
    def parse(cls, text: str) -> Chord:
        a, b = text.split(":")
        return cls(Fraction(a), Fraction(b))

    def __str__(self):
        return f"{self.a}:{self.b}"

    def separates(self, x) -> bool:
        """True if x lies strictly inside the arc (a, b)."""
        return self.a < x < self.b

    def crosses(self, other: Chord) -> bool:
        return _crosses(self.a, self.b, other.a, other.b)


def _crosses(a1, b1, a2, b2) -> bool:
    return (a1 < a2 < b1 < b2) or (a2 < a1 < b2 < b1)


def fixed_points(d: int) -> list[Fraction]:
    return [Fraction(k, d + 1) for k in range(d + 1)]


def piece_of(x: Fraction, d: int) -> int:
    """Index i of the Markov piece [i/(d+1), (i+1)/(d+1)] containing x."""
    return math.floor(x * (d + 1))


def two_cycles(d: int) -> list[Chord]:
    """Chords joining the two points of each period-2 orbit."""
    if d < 2:
        raise ValidationError("degree must be at least 2")
    N = d * d - 1
    out = set()
    for k in range(N):
        x = Fraction(k, N)
        y = m_minus_d(x, d)
        if y != x:
            out.add(Chord(x, y))
    return sorted(out)


def two_cycle_for_pieces(i: int, j: int, d: int) -> Chord:
    """The 2-cycle chord with one endpoint in piece i and the other in piece j."""
    want = {i % (d + 1), j % (d + 1)}
    hits = [c for c in two_cycles(d) if {piece_of(c.a, d), piece_of(c.b, d)} == want]
    if len(hits) != 1:
        raise ValidationError(f"no unique 2-cycle in pieces {sorted(want)}")
    return hits[0]


# ---------------------------------------------------------------- generation


@dataclass
class Lamination:
    degree: int
    generators: list
    depth: int
    levels: list = field(default_factory=list)

    @property
    def leaves(self) -> list[Chord]:
        return [c for lvl in self.levels for c in lvl]

    def to_json(self) -> dict:
        return {
            "d": self.degree,
            "depth": self.depth,
            "generators": [str(c) for c in self.generators],
            "levels": [[str(c) for c in lvl] for lvl in self.levels],
        }


def check_simple(chords) -> None:
    for c1, c2 in itertools.combinations(chords, 2):
        if c1.crosses(c2) or {c1.a, c1.b} & {c2.a, c2.b}:
            raise NotSimple(f"chords {c1} and {c2} are not disjoint")


def generate(generators, d: int, depth: int, cap: int = DEFAULT_DEPTH_CAP) -> Lamination:
    """Generators plus `depth` rounds of pullbacks.

    Each leaf {a, b} pulls back to a perfect matching between the d
    preimages of a and the d preimages of b.  The matching is required to
    be non-crossing, to avoid crossing any existing leaf, and (apart from
    the generators themselves) not to separate the fixed points.  Exactly
    one matching must survive.
    """
    gens = sorted({Chord(*(c if isinstance(c, tuple) else (c.a, c.b))) for c in generators})
    check_simple(gens)
    if depth < 0 or depth > cap:
        raise ValidationError(f"depth must lie in [0, {cap}]")
    dens = [c.a.denominator for c in gens] + [c.b.denominator for c in gens] + [d + 1]
    N = math.lcm(*dens) * d ** depth
    fixed_int = [k * N // (d + 1) for k in range(d + 1)]
    gen_int = {(int(c.a * N), int(c.b * N)) for c in gens}

    def to_int(x: Fraction) -> int:
        v = x * N
        if v.denominator != 1:
            raise ValidationError("denominator overflow")
        return int(v)

    existing = sorted(gen_int)
    levels_int = [sorted(gen_int)]

    def separates_fixed(p, q):
        inside = sum(1 for f in fixed_int if p < f < q)
        return 0 < inside < d + 1

    def preimages(x):
        # solve -d t = x (mod N): t = (j N - x)/d
        out = []
        for j in range(1, d + 1):
            num = j * N - x
            if num % d:
                raise ValidationError("pullback left the denominator lattice")
            out.append((num // d) % N)
        return out

    for _ in range(depth):
        new_level = []
        for p, q in levels_int[-1]:
            A = preimages(p)
            B = preimages(q)
            found = []
            for perm in itertools.permutations(range(d)):
                chords = [tuple(sorted((A[i], B[perm[i]]))) for i in range(d)]
                if any(a == b for a, b in chords):
                    continue
                ok = True
                for c1, c2 in itertools.combinations(chords, 2):
                    if _crosses(*c1, *c2):
                        ok = False
                        break
                if not ok:
                    continue
                for c in chords:
                    if c in gen_int:
                        continue
                    if separates_fixed(*c):
                        ok = False
                        break
                    if any(_crosses(*c, *e) for e in existing):
                        ok = False
                        break
                if ok:
                    found.append(sorted(chords))
            if len(found) != 1:
                raise NonUniqueMatching(f"{len(found)} admissible pullback matchings of {Fraction(p, N)}:{Fraction(q, N)}")
            for c in found[0]:
                if c not in gen_int:
                    new_level.append(c)
                    existing.append(c)
        levels_int.append(sorted(set(new_level)))
    levels = [[Chord(Fraction(p, N), Fraction(q, N)) for p, q in lvl] for lvl in levels_int]
    return Lamination(d, gens, depth, levels)


def forward_invariance_violations(L: Lamination) -> list[Chord]:
    """Leaves whose image is neither a point nor a leaf one level up."""
    bad = []
    for k, lvl in enumerate(L.levels):
        for c in lvl:
            a, b = m_minus_d(c.a, L.degree), m_minus_d(c.b, L.degree)
            if a == b:
                continue
            img = Chord(a, b)
            if k == 0:
                if img not in set(L.generators):
                    bad.append(c)
            elif img not in set(L.levels[k - 1]):
                bad.append(c)
    return bad


def crossing_pairs(chords) -> list[tuple[Chord, Chord]]:
    cs = sorted(chords)
    return [(c1, c2) for c1, c2 in itertools.combinations(cs, 2) if c1.crosses(c2)]


# ---------------------------------------------------------------- dual trees


def _regions(chords, d):
    """Complementary regions of the disk minus disjoint chords.

    Returns a list of regions; each region is a list of boundary items in
    ccw order, an item being ('fix', k) or ('chord', index).
    """
    fixed = fixed_points(d)
    if not chords:
        return [[("fix", k) for k in range(d + 1)]], []
    pts = []
    for i, c in enumerate(chords):
        pts.append((c.a, i))
        pts.append((c.b, i))
    pts.sort()
    m = len(pts)
    partner = {}
    for idx, (x, i) in enumerate(pts):
        for jdx, (y, j) in enumerate(pts):
            if j == i and jdx != idx:
                partner[idx] = jdx
    # arc idx runs from pts[idx] to pts[idx+1] (wrapping through 0)
    seen = set()
    regions = []
    arcs_of = []
    for start in range(m):
        if start in seen:
            continue
        items = []
        arcs = []
        arc = start
        while arc not in seen:
            seen.add(arc)
            arcs.append(arc)
            lo = pts[arc][0]
            hi = pts[(arc + 1) % m][0]
            inside = [k for k, f in enumerate(fixed) if _in_arc(f, lo, hi)]
            inside.sort(key=lambda k: (fixed[k] - lo) % 1)
            items.extend(("fix", k) for k in inside)
            end = (arc + 1) % m
            items.append(("chord", pts[end][1]))
            arc = partner[end]
        regions.append(items)
        arcs_of.append(arcs)
    return regions, arcs_of


def _in_arc(f, lo, hi) -> bool:
    """f strictly inside the ccw arc from lo to hi."""
    if lo < hi:
        return lo < f < hi
    return f > lo or f < hi


def dual_tree(chords, d: int) -> RibbonTree:
    """Tree with a vertex per complementary region, an edge across each
    chord and an end for each fixed point; fixed point k is end k and
    the marked end is 0."""
    chords = sorted(chords)
    check_simple(chords)
    regions, _ = _regions(chords, d)
    adj = {k: [] for k in range(d + 1)}
    chord_sides = {}
    for r, items in enumerate(regions):
        v = d + 1 + r
        adj[v] = []
        for kind, x in items:
            if kind == "chord":
                chord_sides.setdefault(x, []).append(v)
    for r, items in enumerate(regions):
        v = d + 1 + r
        for kind, x in items:
            if kind == "fix":
                adj[v].append(x)
                adj[x] = [v]
            else:
                a, b = chord_sides[x]
                adj[v].append(b if a == v else a)
    return RibbonTree(adj, 0, d)


def dual_lamination(T: RibbonTree) -> list[Chord]:
    """Generator chords whose dual tree is T: every core edge cuts off a
    block of consecutive ends a..b (counted ccw from the marked end) and
    contributes the 2-cycle between pieces a-1 and b."""
    d = T.d
    order = T.ends_ccw()
    pos = {e: i for i, e in enumerate(order)}
    out = []
    for u in T.core:
        for v in T.adj[u]:
            if v < u or T.valence(v) == 1:
                continue
            block = _ends_beyond(T, u, v)
            if order[0] in block:
                block = set(order) - block
            idx = sorted(pos[e] for e in block)
            a, b = idx[0], idx[-1]
            if idx != list(range(a, b + 1)):
                raise ValidationError("ends behind a core edge are not consecutive")
            out.append(two_cycle_for_pieces(a - 1, b, d))
    return sorted(out)


def _ends_beyond(T: RibbonTree, u: int, v: int) -> set:
    seen = {u, v}
    stack = [v]
    ends = set()
    while stack:
        x = stack.pop()
        if T.valence(x) == 1:
            ends.add(x)
        for y in T.adj[x]:
            if y not in seen:
                seen.add(y)
                stack.append(y)
    return ends


# ---------------------------------------------------------------- quotient


def quotient_classes(L, angles) -> list[frozenset]:
    """Partition of `angles` by chains of leaves of L (a Lamination or a
    list of chords)."""
    leaves = L.leaves if isinstance(L, Lamination) else list(L)
    parent = {}

    def find(x):
        parent.setdefault(x, x)
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for c in leaves:
        ra, rb = find(c.a), find(c.b)
        if ra != rb:
            parent[ra] = rb
    groups = {}
    for x in angles:
        x = angle(x)
        groups.setdefault(find(x), set()).add(x)
    return sorted((frozenset(g) for g in groups.values()), key=lambda s: min(s))


# ---------------------------------------------------------------- SVG

SVG_R = 256
SVG_PAD = 24


def _xy(t, r=1.0):
    th = 2 * math.pi * float(t)
    c = SVG_R + SVG_PAD
    return c + SVG_R * r * math.cos(th), c - SVG_R * r * math.sin(th)


def chord_path(c: Chord) -> str:
    """SVG path for the geodesic with ideal endpoints c.a, c.b."""
    x1, y1 = _xy(c.a)
    x2, y2 = _xy(c.b)
    delta = float(c.b - c.a)
    if abs(delta - 0.5) < 1e-12:
        return f"M {x1:.3f} {y1:.3f} L {x2:.3f} {y2:.3f}"
    half = math.pi * min(delta, 1 - delta)
    r = SVG_R * math.tan(half)
    # ccw from a to b within half a turn bends clockwise in the drawing, which
    # is the negative sweep in SVG's downward y axis
    sweep = 0 if delta < 0.5 else 1
    return f"M {x1:.3f} {y1:.3f} A {r:.3f} {r:.3f} 0 0 {sweep} {x2:.3f} {y2:.3f}"


def to_svg(L, d: int | None = None, tree: bool = True) -> str:
    leaves = L.leaves if isinstance(L, Lamination) else list(L)
    gens = L.generators if isinstance(L, Lamination) else leaves
    d = L.degree if isinstance(L, Lamination) else d
    size = 2 * (SVG_R + SVG_PAD)
    c = SVG_R + SVG_PAD
    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" '
           f'viewBox="0 0 {size} {size}">',
           f'<circle cx="{c}" cy="{c}" r="{SVG_R}" fill="none" stroke="black"/>']
    gen_set = set(gens)
    for ch in leaves:
        color = "red" if ch in gen_set else "steelblue"
        out.append(f'<path d="{chord_path(ch)}" fill="none" stroke="{color}" stroke-width="1"/>')
    for f in fixed_points(d):
        x, y = _xy(f)
        out.append(f'<circle cx="{x:.3f}" cy="{y:.3f}" r="4" fill="black"/>')
    if tree:
        out.extend(_tree_overlay(sorted(gen_set), d))
    out.append("</svg>")
    return "\n".join(out) + "\n"


def _tree_overlay(gens, d):
    regions, arcs = _regions(gens, d)
    fixed = fixed_points(d)
    pts = sorted([(ch.a, i) for i, ch in enumerate(gens)] + [(ch.b, i) for i, ch in enumerate(gens)])
    centers = []
    for r, items in enumerate(regions):
        angs = [fixed[x] for kind, x in items if kind == "fix"]
        if arcs:
            angs += [pts[a][0] for a in arcs[r]]
        zx = sum(math.cos(2 * math.pi * float(a)) for a in angs) / max(len(angs), 1)
        zy = sum(math.sin(2 * math.pi * float(a)) for a in angs) / max(len(angs), 1)
        centers.append((zx * 0.6, zy * 0.6))
    c = SVG_R + SVG_PAD
    lines = []
    side = {}
    for r, items in enumerate(regions):
        cx, cy = c + SVG_R * centers[r][0], c - SVG_R * centers[r][1]
        lines.append(f'<circle cx="{cx:.3f}" cy="{cy:.3f}" r="3" fill="green"/>')
        for kind, x in items:
            if kind == "fix":
                fx, fy = _xy(fixed[x])
                lines.append(f'<line x1="{cx:.3f}" y1="{cy:.3f}" x2="{fx:.3f}" y2="{fy:.3f}" stroke="green"/>')
            else:
                side.setdefault(x, []).append((cx, cy))
    for ends in side.values():
        if len(ends) == 2:
            (ax, ay), (bx, by) = ends
            lines.append(f'<line x1="{ax:.3f}" y1="{ay:.3f}" x2="{bx:.3f}" y2="{by:.3f}" stroke="green"/>')
    return lines
