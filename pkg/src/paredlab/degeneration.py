"""Degenerating families of anti-Blaschke products and their quasi-fixed trees.

Two directions are implemented:

* ``realize`` builds an explicit family f_s from a pointed metric ribbon tree
  by walking the reduction chain upwards and multiplying in one anti-Mobius
  factor per regluing step;
* ``extract_tree`` recovers the tree from a family by clustering critical
  points, joining clusters by the nearest-hull rule and attaching one end per
  boundary fixed point.

Families near the degenerate end need high precision: zeros sit at hyperbolic
distance ~2 s r from 0, so every grid point carries its own mpmath precision.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import mpmath

from . import _num as nm
from . import hypdisk as hd
from .blaschke import (
    AntiBlaschke,
    ProperMap,
    _pderiv,
    _peval,
    boundary_derivative,
    critical_points,
    critical_polynomial,
    fixed_point_at_level,
    rescale,
    rotate,
)
from .errors import (
    AmbiguousProjection,
    AngleStarvation,
    NormalFormFailure,
    SolveFailure,
    UnstableClustering,
    ValidationError,
)
from .hypdisk import IdealPoint
from .ribbontree import PointedMetricTree, RibbonTree, reduce, reduction_chain

DEFAULT_GRID = (1.0, 2.0, 4.0, 8.0, 12.0, 16.0, 20.0)
SPLIT = 6.0
R_BALL = 3.0
CRIT_MIN_S = 8.0
SLOPE_WINDOW = (4.0, 20.0)
SLOPE_TOL = 0.05
END_RAY = 30.0
EDGE_STEP = 0.5
PROJ_MARGIN = 1.5
ANGLE_MIN = 1e-3
# regression constant for the sampled displacement along realized trees (d <= 4)
QF_BOUND = 6.0


# ---------------------------------------------------------------- families


def _dps_for_depth(rho: float) -> int:
    """Digits needed when zeros sit at hyperbolic distance rho from 0."""
    return 30 + int(2 * (rho + 10) / math.log(10))


@dataclass
class Family:
    sampler: Callable
    d: int
    grid: tuple
    meta: dict = field(default_factory=dict)
    embedded: EmbeddedTree | None = None

    def __post_init__(self):
        grid = tuple(float(s) for s in self.grid)
        if len(grid) < 3:
            raise ValidationError("a family needs at least 3 grid points")
        if any(s <= 0 for s in grid) or any(b <= a for a, b in zip(grid, grid[1:])):
            raise ValidationError("grid must be positive and increasing")
        if grid[-1] / grid[0] < 8:
            raise ValidationError("grid must span at least a factor of 8")
        self.grid = grid

    def dps(self, s) -> int:
        return int(self.meta.get("dps", {}).get(float(s), 15))

    def at(self, s):
        with mpmath.workdps(self.dps(s)):
            return self.sampler(float(s))

    def top_half(self) -> tuple:
        n = len(self.grid)
        return self.grid[n // 2:]

    def to_json(self) -> dict:
        maps = []
        for s in self.grid:
            with mpmath.workdps(self.dps(s)):
                f = self.sampler(s)
                maps.append({"s": s, "dps": self.dps(s), "map": f.to_json()})
        meta = {k: v for k, v in self.meta.items() if k != "dps"}
        return {"d": self.d, "grid": list(self.grid), "maps": maps, "meta": meta}

    @classmethod
    def from_json(cls, obj) -> Family:
        table = {}
        dps = {}
        for rec in obj["maps"]:
            s = float(rec["s"])
            dps[s] = int(rec.get("dps", 15))
            with mpmath.workdps(dps[s]):
                table[s] = AntiBlaschke.from_json(rec["map"])
        meta = dict(obj.get("meta", {}))
        meta["dps"] = dps
        return cls(table.__getitem__, int(obj["d"]), tuple(obj["grid"]), meta)


def constant_family(d: int, grid=DEFAULT_GRID) -> Family:
    f = AntiBlaschke.monomial(d)
    return Family(lambda s: f, d, tuple(grid), {"kind": "constant"})


@dataclass
class EmbeddedTree:
    tree: PointedMetricTree
    placement: dict            # s -> {vertex: complex/mpc or IdealPoint}
    diagnostics: dict = field(default_factory=dict)


# ---------------------------------------------------------------- geometry helpers


def _busemann(zeta, x):
    """Busemann function of the boundary point zeta, normalized to vanish at 0."""
    return nm.log(abs(zeta - x) ** 2 / ((1 - abs(x)) * (1 + abs(x))))


def _fixed_points(f: ProperMap) -> list:
    """Boundary fixed points as angles in turns, indexed by their lift label."""
    tol = None
    if f.is_mp:
        tol = mpmath.mpf(10) ** (-(mpmath.mp.dps // 2))
    D1 = len(f.params) + 1
    return [fixed_point_at_level(f, -k, tol) % 1 for k in range(D1)]


def _ray_foot(x, v, zeta):
    """Point of the geodesic ray from v to the boundary point zeta nearest x."""
    m = hd.to_origin(v)
    u = m(zeta)
    u = u / abs(u)
    w = m(x) * u.conjugate()
    if w.real <= 0:
        return v
    c = (1 + abs(w) ** 2) / (2 * w.real)
    foot = c - nm.sqrt(c * c - 1)
    return m.inverse(foot * u)


def _ccw(angle):
    twopi = 2 * nm.pi_like(angle)
    return angle % twopi


# ---------------------------------------------------------------- realization


def _identify_ends(f: ProperMap, tree: RibbonTree, place: dict) -> dict:
    """Match the ends of `tree` to the boundary fixed points of f.

    Planarity forces the fixed points, read ccw, to follow the ends in
    contour order, so only the cyclic shift is unknown.  It is chosen to
    minimize the total Busemann excess of each end's attaching vertex.
    """
    angles = sorted(_fixed_points(f))
    ends = tree.ends_ccw()
    n = len(ends)
    if len(angles) != n:
        raise ValidationError("fixed point count does not match the end count")
    core = [v for v in tree.core]
    pts = [nm.turn(a) for a in angles]
    cost = []
    for e in ends:
        v = tree.adj[e][0]
        row = []
        for z in pts:
            b = {u: _busemann(z, place[u]) for u in core}
            row.append(float(b[v] - min(b.values())))
        cost.append(row)
    best = min(range(n), key=lambda c: (sum(cost[j][(j + c) % n] for j in range(n)), c))
    return {e: IdealPoint(angles[(j + best) % n]) for j, e in enumerate(ends)}


def _choose_direction(x, a, b, zeros):
    """Direction at x for a new zero, ccw between the targets a and b.

    The tracked zero directions cut the range into sub-gaps; the new zero
    goes to the middle of the widest one, of width theta.  It then sits
    theta/2 >= theta/3 away from every tracked zero.
    """
    alpha = hd.direction_at(x, a)
    beta = hd.direction_at(x, b)
    twopi = 2 * nm.pi_like(alpha)
    width = (beta - alpha) % twopi
    if width == 0:
        width = twopi
    dirs = [hd.direction_at(x, z) for z in zeros if abs(z - x) > 0]
    cuts = sorted([0 * width, width] + [o for o in ((t - alpha) % twopi for t in dirs) if 0 < o < width])
    gaps = [(cuts[i + 1] - cuts[i], i) for i in range(len(cuts) - 1)]
    theta, i = max(gaps)
    zeta = alpha + cuts[i] + theta / 2
    sep = min([abs((zeta - t + twopi / 2) % twopi - twopi / 2) for t in dirs], default=width)
    if theta < ANGLE_MIN or sep < theta / 3:
        raise AngleStarvation(f"widest free sector is {float(theta):.3g} rad")
    return zeta, theta


def _realize_at(T: PointedMetricTree, chain, s: float):
    p = T.special
    bottom = reduce(chain[-1][0])[0] if chain else T
    params = [mpmath.mpc(0)] * (bottom.base.valence(p) - 1)
    phase = mpmath.mpc(1)
    place = {p: mpmath.mpc(0)}
    zeros = {p: []}
    theta = {}
    for before, data in reversed(chain):
        reduced = reduce(before)[0]
        f = ProperMap(tuple(params), phase)
        ends = _identify_ends(f, reduced.base, place)

        def target(c):
            return place[c] if c in place else ends[c]

        w = data.w
        if data.kept:
            x = place[w]
            L = hd.dist_to_origin(f(x))
            if L == 0:
                zs = x
            else:
                rot = data.rotation
                i = rot.index(data.y)
                a, b = rot[i - 1], rot[(i + 1) % len(rot)]
                zeta, width = _choose_direction(x, target(a), target(b), zeros[w])
                theta.setdefault(w, []).append(float(width))
                zs = hd.to_origin(x).inverse(nm.tanh(L / 2) * nm.expi(zeta))
        else:
            x = hd.point_at_distance(place[data.u], ends[data.z], s * data.length)
            place[w] = x
            zeros[w] = [mpmath.mpc(0)]
            L = hd.dist_to_origin(x) + hd.dist_to_origin(f(x))
            zs = nm.tanh(L / 2) * x / abs(x)
        zeros[w].append(zs)
        params.append(zs.conjugate())
        if abs(zs) > 0:
            phase = phase * (-zs / abs(zs))
    f = ProperMap(tuple(params), phase)
    ends = _identify_ends(f, T.base, place)
    g, lam = _normal_form(f, ends[T.base.marked_end])
    out = {v: lam.conjugate() * z for v, z in place.items()}
    shift = nm.arg(lam) / (2 * mpmath.pi)
    for e, P in ends.items():
        out[e] = IdealPoint((P.angle - shift) % 1)
    return g, out, {"zeros": {w: [lam.conjugate() * z for z in zs] for w, zs in zeros.items()},
                    "sectors": theta}


def _normal_form(f: ProperMap, marked: IdealPoint):
    """Rotate f to phase 1 so that the marked end carries lift label 0."""
    D1 = len(f.params) + 1
    root = mpmath.root(f.phase, D1)
    best = None
    for k in range(D1):
        lam = root * mpmath.expjpi(2 * mpmath.mpf(k) / D1)
        g = rotate(f, lam)
        want = (marked.angle - nm.arg(lam) / (2 * mpmath.pi)) % 1
        got = fixed_point_at_level(g, 0, mpmath.mpf(10) ** (-(mpmath.mp.dps // 2))) % 1
        err = abs((got - want + mpmath.mpf(0.5)) % 1 - mpmath.mpf(0.5))
        if best is None or err < best[0]:
            best = (err, g, lam)
    err, g, lam = best
    if err > 1e-6 or abs(g.phase - 1) > mpmath.mpf(10) ** (-(mpmath.mp.dps - 10)):
        raise NormalFormFailure(f"rotation to normal form left error {float(err):.3g}")
    return AntiBlaschke(g.params, mpmath.mpc(1)), lam


def _realize(T: PointedMetricTree, grid) -> Family:
    if T.d > 6:
        raise ValidationError("realize supports d <= 6")
    chain = reduction_chain(T)
    rmax = max(T.core_distances().values())
    maps, placement, diag, dps = {}, {}, {}, {}
    for s in grid:
        s = float(s)
        dps[s] = _dps_for_depth(2 * s * rmax)
        with mpmath.workdps(dps[s]):
            f, place, info = _realize_at(T, chain, s)
        maps[s] = f
        placement[s] = place
        diag[s] = info
    F = Family(maps.__getitem__, T.d, tuple(float(s) for s in grid), {"dps": dps, "kind": "realized"})
    F.embedded = EmbeddedTree(T, placement, {"bookkeeping": diag})
    return F


def realize(T: PointedMetricTree, grid=DEFAULT_GRID) -> Family:
    """Family realizing a pointed metric tree whose special point is a branch point."""
    if T.extended:
        raise ValidationError("special point has valence 2; use realize_extended")
    return _realize(T, grid)


def realize_extended(T: PointedMetricTree, grid=DEFAULT_GRID) -> Family:
    """Family realizing an extended tree; the base map is conj(z)."""
    if not T.extended:
        raise ValidationError("special point is not of valence 2")
    return _realize(T, grid)


# ---------------------------------------------------------------- parabolic real family


def _crit_residual(zs, r, m1, m2):
    f = AntiBlaschke.from_zeros([mpmath.mpc(a) for a in zs])
    N = critical_polynomial(f)
    out = []
    for x, m in ((r, m1), (-r, m2)):
        P = list(N)
        for _ in range(m):
            out.append(mpmath.re(_peval(P, mpmath.mpc(x))))
            P = _pderiv(P)
    scale = max(abs(c) for c in N)
    return [v / scale for v in out]


def _newton_real(fun, x0, tol, maxiter=60):
    x = [mpmath.mpf(v) for v in x0]
    n = len(x)
    h = mpmath.mpf(10) ** (-(mpmath.mp.dps // 3))
    for _ in range(maxiter):
        F = fun(x)
        if max(abs(v) for v in F) < tol:
            return x
        J = mpmath.matrix(n, n)
        for j in range(n):
            xp = list(x)
            xp[j] += h
            Fp = fun(xp)
            for i in range(n):
                J[i, j] = (Fp[i] - F[i]) / h
        try:
            dx = mpmath.lu_solve(J, mpmath.matrix([-v for v in F]))
        except ZeroDivisionError as exc:
            raise SolveFailure("singular Jacobian") from exc
        x = [x[i] + dx[i] for i in range(n)]
        if any(not abs(v) < 1 for v in x):
            raise SolveFailure("Newton step left the disk")
    raise SolveFailure("Newton did not converge")


def _parabolic_shape(T: PointedMetricTree):
    if not T.extended:
        raise ValidationError("the special point must have valence 2")
    core = T.base.core
    if len(core) != 3:
        raise ValidationError("expected exactly three core vertices v1, v2, p")
    v1, v2 = T.base.adj[T.special]
    if T.base.valence(v1) == 1 or T.base.valence(v2) == 1:
        raise ValidationError("the special point must lie between two branch points")
    m1 = T.base.valence(v1) - 2
    m2 = T.base.valence(v2) - 2
    if T.d % 2 == 0:
        raise ValidationError("fixed points at +1 and -1 with real zeros need odd degree")
    return v1, v2, m1, m2


def realize_parabolic_real(T: PointedMetricTree, grid=DEFAULT_GRID, step: float = 0.25) -> Family:
    """Real family with critical points r_t (mult m1) and -r_t (mult m2),
    d(0, r_t) = t, fixing 0 and +-1.  Zeros are real, solved by Newton with
    continuation in t."""
    v1, v2, m1, m2 = _parabolic_shape(T)
    d = T.d
    grid = tuple(float(t) for t in grid)
    maps, dps = {}, {}
    t = min(0.2, grid[0])
    x = None
    for target in grid:
        dps[target] = _dps_for_depth(2 * target)
        with mpmath.workdps(dps[target]):
            while True:
                r = mpmath.tanh(mpmath.mpf(t) / 2)
                if x is None:
                    x = [r * mpmath.sqrt(3) * (2 * mpmath.mpf(i) / max(d - 2, 1) - 1) for i in range(d - 1)]
                tol = mpmath.mpf(10) ** (-(mpmath.mp.dps - 15))
                x = _newton_real(lambda z: _crit_residual(z, r, m1, m2), x, tol)
                if t >= target:
                    break
                t = min(target, t + step)
            maps[target] = AntiBlaschke.from_zeros([mpmath.mpc(v) for v in sorted(x)])
    meta = {"dps": dps, "kind": "parabolic_real", "v1": v1, "v2": v2, "m": [m1, m2]}
    return Family(maps.__getitem__, d, grid, meta)


def parabolic_multiplier(f: ProperMap, t):
    """Smallest boundary multiplier |g'| of g = rescale(f, r_t), and the
    angular distance (turns) of that fixed point from the direction of the
    origin as seen from v1 = r_t."""
    r = mpmath.tanh(mpmath.mpf(t) / 2)
    g = rescale(f, mpmath.mpc(r))
    toward = hd.to_origin(mpmath.mpc(r))(mpmath.mpc(0))
    aim = nm.arg(toward) / (2 * mpmath.pi)
    best = min((boundary_derivative(g, a), a) for a in _fixed_points(g))
    mu, theta = best
    off = abs((theta - aim + mpmath.mpf(0.5)) % 1 - mpmath.mpf(0.5))
    return mu, off


# ---------------------------------------------------------------- clustering


@dataclass
class Cluster:
    points: list               # (point, multiplicity)
    rep: object
    degree: int                # total multiplicity + 1


@dataclass
class ClusterReport:
    clusters: dict             # s -> [Cluster]
    stable: bool
    degrees: list              # sorted cluster degrees at the largest s
    active: list               # per cluster at the largest s
    displacement: dict         # s -> [displacement of each matched cluster]


def _crit(f: ProperMap):
    radius = 10.0 ** (-(mpmath.mp.dps // 2)) if f.is_mp else 1e-7
    return critical_points(f, merge_radius=radius)


def _cluster(points, split):
    n = len(points)
    parent = list(range(n))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(n):
        for j in range(i + 1, n):
            if hd.dist(points[i][0], points[j][0]) < split:
                parent[find(i)] = find(j)
    groups = {}
    for i in range(n):
        groups.setdefault(find(i), []).append(points[i])
    out = []
    for members in groups.values():
        rep = min((sum(m * hd.dist(z, y) for y, m in members), k) for k, (z, _) in enumerate(members))
        z = members[rep[1]][0]
        out.append(Cluster(members, z, sum(m for _, m in members) + 1))
    out.sort(key=lambda c: float(hd.dist_to_origin(c.rep)))
    return out


def _clusters_at(F: Family, s, split):
    with mpmath.workdps(F.dps(s)):
        f = F.sampler(s)
        return f, _cluster(_crit(f), split)


def cluster_critical_points(F: Family, split: float = SPLIT) -> ClusterReport:
    per_s = {}
    for s in F.grid:
        per_s[s] = _clusters_at(F, s, split)[1]
    top = F.top_half()
    sig = {s: sorted(c.degree for c in per_s[s]) for s in top}
    stable = len({tuple(v) for v in sig.values()}) == 1
    if not stable:
        raise UnstableClustering(f"cluster degrees vary over the top half: {sig}")
    ref = per_s[top[-1]]
    disp = {}
    for s in top:
        with mpmath.workdps(F.dps(s)):
            f = F.sampler(s)
            row = []
            for c in ref:
                # match by nearest representative in the ribbon of clusters at s
                near = min(per_s[s], key=lambda k: (abs(k.degree - c.degree), float(hd.dist(k.rep, c.rep))))
                row.append(float(hd.dist(near.rep, f(near.rep))))
            disp[s] = row
    active = []
    for i in range(len(ref)):
        seq = [disp[s][i] for s in top]
        grows = all(b >= a - 1e-9 for a, b in zip(seq, seq[1:])) and seq[-1] - seq[0] > 1.0
        active.append(bool(seq[-1] > split and grows))
    return ClusterReport(per_s, stable, sig[top[-1]], active, disp)


# ---------------------------------------------------------------- extraction


def _ideal_foot(zeta, reps):
    """Point of the hull of `reps` minimizing the Busemann function of zeta."""
    if len(reps) == 1:
        return reps[0]
    ks = [hd.to_klein(z) for z in reps]
    hull = hd._hull_indices(ks)
    if len(hull) == 1:
        return reps[hull[0]]
    edges = [(hull[i], hull[(i + 1) % len(hull)]) for i in range(len(hull))] if len(hull) > 2 \
        else [(hull[0], hull[1])]
    best = None
    for i, j in edges:
        p, q = reps[i], reps[j]

        def fun(t):
            return _busemann(zeta, hd._geodesic_raw(p, q, t))

        a, b = hd._golden_min(fun, 0.0, 1.0, 1e-7)
        t = (a + b) / 2
        for cand in (0.0, t, 1.0):
            val = fun(cand)
            if best is None or val < best[0]:
                best = (val, hd._geodesic_raw(p, q, cand))
    return best[1]


def _nearest(x, pts: dict, strict: bool, what: str):
    ranked = sorted((float(hd.dist(x, z)), v) for v, z in pts.items())
    if strict and len(ranked) > 1 and ranked[1][0] - ranked[0][0] < PROJ_MARGIN:
        raise AmbiguousProjection(f"{what}: candidates {ranked[0][1]} and {ranked[1][1]} are "
                                  f"within {PROJ_MARGIN} of each other")
    return ranked[0][1]


def _tree_at(F: Family, s, split: float, strict: bool):
    """Unpointed marked ribbon tree at one grid point with its placement."""
    with mpmath.workdps(F.dps(s)):
        f = F.sampler(s)
        clusters = _cluster(_crit(f), split)
        m = len(clusters)
        reps = {i: c.rep for i, c in enumerate(clusters)}
        adj = {i: [] for i in range(m)}
        for k in range(1, m):
            placed = [reps[i] for i in range(k)]
            y = hd.project_to_hull(reps[k], placed).value if k > 1 else placed[0]
            l = _nearest(y, {i: reps[i] for i in range(k)}, strict, f"core vertex {k}")
            adj[k].append(l)
            adj[l].append(k)
        angles = _fixed_points(f)
        place = dict(reps)
        core_pts = [reps[i] for i in range(m)]
        if m == 0:
            raise ValidationError("no critical points: degree 1 family")
        for k, a in enumerate(angles):
            e = m + k
            P = IdealPoint(a)
            foot = _ideal_foot(P.point, core_pts)
            v = _nearest(foot, reps, strict, f"end {k}")
            adj[e] = [v]
            adj[v].append(e)
            place[e] = P
        for v in range(m):
            x = reps[v]
            adj[v].sort(key=lambda w: float(_ccw(hd.direction_at(x, place[w]))))
        tree = RibbonTree(adj, m, F.d, frozenset())
        degrees = {i: c.degree for i, c in enumerate(clusters)}
    return tree, place, degrees


def _slope(xs, ys):
    n = len(xs)
    mx = sum(xs) / n
    my = sum(ys) / n
    sxx = sum((x - mx) ** 2 for x in xs)
    return sum((x - mx) * (y - my) for x, y in zip(xs, ys)) / sxx


def extract_tree(F: Family, split: float = SPLIT) -> EmbeddedTree:
    """Quasi-fixed tree of a degenerating family."""
    cluster_critical_points(F, split)
    top = F.top_half()
    ref_s = top[-1]
    ref, ref_place, degrees = _tree_at(F, ref_s, split, True)
    placement = {ref_s: ref_place}
    unstable = []
    for s in F.grid[:-1]:
        strict = s in top
        try:
            t, place, _ = _tree_at(F, s, split, strict)
        except (AmbiguousProjection, ValidationError):
            if strict:
                raise
            unstable.append(s)
            continue
        iso = ref.iso_map(t)
        if iso is None:
            if strict:
                raise UnstableClustering(f"tree at s={s} differs from the tree at s={ref_s}")
            unstable.append(s)
            continue
        placement[s] = {v: place[iso[v]] for v in ref.adj}
    for v, deg in degrees.items():
        if deg + 1 != ref.valence(v):
            raise UnstableClustering(f"cluster degree {deg} does not match valence {ref.valence(v)}")
    # special point
    core = ref.core
    special = None
    for v in core:
        with mpmath.workdps(F.dps(ref_s)):
            if all(float(hd.dist_to_origin(placement[s][v])) < split / 2 for s in top if s in placement):
                special = v
                break
    adj = {v: list(ns) for v, ns in ref.adj.items()}
    two = frozenset()
    rule = "bounded"
    if special is None:
        shadows = {}
        for s in sorted(placement):
            with mpmath.workdps(F.dps(s)):
                shadows[s] = _origin_shadow(ref, placement[s])
        u, v, foot = shadows[ref_s]
        if v is None:
            # the shadow sits on a vertex: no edge carries it
            rule = "shadow-vertex"
            special = u
            for s in top:
                if shadows.get(s, (u, None))[:2] != (u, None):
                    raise UnstableClustering("the origin's shadow leaves the vertex")
        else:
            rule = "inserted"
            special = max(adj) + 1
            adj[u][adj[u].index(v)] = special
            adj[v][adj[v].index(u)] = special
            adj[special] = [u, v]
            two = frozenset([special])
            for s in list(placement):
                a, b, x = shadows[s]
                if b is None or {a, b} != {u, v}:
                    if s in top:
                        raise UnstableClustering("the origin's shadow moves to another edge")
                    del placement[s]
                    unstable.append(s)
                    continue
                placement[s][special] = x
    tree = RibbonTree(adj, ref.marked_end, F.d, two)
    lengths = {}
    window = [s for s in sorted(placement) if SLOPE_WINDOW[0] <= s <= SLOPE_WINDOW[1]]
    for v in tree.core:
        for w in tree.adj[v]:
            if w > v and tree.valence(w) > 1:
                ss = window if len(window) >= 2 else sorted(placement)
                ds = []
                for s in ss:
                    with mpmath.workdps(F.dps(s)):
                        ds.append(float(hd.dist(placement[s][v], placement[s][w])))
                lengths[frozenset((v, w))] = _slope(ss, ds) if len(ss) >= 2 else ds[0] / ss[0]
    P = PointedMetricTree(tree, special, lengths)
    diag = {"unstable_s": sorted(unstable), "cluster_degrees": degrees, "special_rule": rule}
    return EmbeddedTree(P, placement, diag)


def _origin_shadow(tree: RibbonTree, place: dict, tol: float = 1e-6):
    """Where 0 projects to the placed tree: (u, v, foot) for an edge, or
    (u, None, foot) when the nearest point is the vertex u itself."""
    best = None
    zero = 0 * place[tree.core[0]]
    for v in tree.core:
        for w in tree.adj[v]:
            if tree.valence(w) == 1:
                foot = _ray_foot(zero, place[v], place[w].point)
            elif w > v:
                _, foot, _ = hd.project_to_segment(zero, place[v], place[w])
            else:
                continue
            val = float(hd.dist_to_origin(foot))
            if best is None or val < best[0] - tol:
                best = (val, v, w, foot)
    val, v, w, foot = best
    for u in tree.core:
        if float(hd.dist(foot, place[u])) < tol:
            return u, None, foot
    return v, w, foot


# ---------------------------------------------------------------- verification


@dataclass
class Verification:
    qf_max: dict               # s -> max sampled displacement along the placed tree
    qf_bound: float
    crit_counts: dict          # s -> {vertex: (count, expected)}
    slopes: dict               # (u, v) -> (fitted slope, tree distance)
    qi_deviation: float        # max |dist - s d_T| over the grid
    end_residuals: dict        # s -> max angle residual (turns)
    R: float
    clauses: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(self.clauses.values())

    @property
    def M(self) -> float:
        return max(self.qf_max.values())

    def lines(self) -> list:
        out = [f"quasi-fixed: max displacement {self.M:.4f} (bound {self.qf_bound})",
               f"critically approximating (R={self.R}): {'ok' if self.clauses['critical'] else 'FAIL'}",
               f"quasi-isometry deviation M = {self.qi_deviation:.4f}"]
        for (u, v), (k, dt) in sorted(self.slopes.items()):
            out.append(f"slope {u}-{v}: {k:.4f} vs {dt:.4f}")
        out.append(f"ends approximating: max residual {max(self.end_residuals.values(), default=0.0):.3g}")
        for name, ok in self.clauses.items():
            out.append(f"{name}: {'PASS' if ok else 'FAIL'}")
        return out


def _tree_distances(T: PointedMetricTree, v) -> dict:
    return T.core_distances(v)


def _edge_samples(a, b):
    L = float(hd.dist(a, b))
    n = max(2, int(math.ceil(L / EDGE_STEP)) + 1)
    return [hd._geodesic_raw(a, b, k / (n - 1)) for k in range(n)]


def _ray_samples(v, P: IdealPoint):
    out = []
    t = 0.0
    while t <= END_RAY:
        out.append(hd.point_at_distance(v, P, t) if t > 0 else v)
        t += 1.0
    return out


def sampled_displacement(f: ProperMap, tree: RibbonTree, place: dict) -> float:
    worst = 0.0
    for v in tree.core:
        for w in tree.adj[v]:
            if tree.valence(w) == 1:
                pts = _ray_samples(place[v], place[w])
            elif w > v:
                pts = _edge_samples(place[v], place[w])
            else:
                continue
            for x in pts:
                worst = max(worst, float(hd.dist(x, f(x))))
    return worst


def verify(E: EmbeddedTree, F: Family, M: float | None = None, R: float = R_BALL) -> Verification:
    """Report on the defining clauses of a quasi-fixed tree.  Never raises."""
    T = E.tree
    tree = T.base
    bound = QF_BOUND if M is None else M
    qf, counts, resid = {}, {}, {}
    core = tree.core
    dev = 0.0
    dists = {v: _tree_distances(T, v) for v in core}
    series = {}
    for s in F.grid:
        if s not in E.placement:
            continue
        place = E.placement[s]
        with mpmath.workdps(F.dps(s)):
            f = F.sampler(s)
            qf[s] = sampled_displacement(f, tree, place)
            if s >= CRIT_MIN_S:
                crit = _crit(f)
                row = {}
                for v in tree.branch_points:
                    n = sum(m for c, m in crit if hd.dist(c, place[v]) <= R)
                    row[v] = (n, tree.valence(v) - 2)
                counts[s] = row
            angles = _fixed_points(f)
            ends = tree.ends_ccw()
            r = 0.0
            for k, e in enumerate(ends):
                a = place[e].angle
                r = max(r, float(abs((a - angles[k] + mpmath.mpf(0.5)) % 1 - mpmath.mpf(0.5))))
            resid[s] = r
            for i, v in enumerate(core):
                for w in core[i + 1:]:
                    dvw = float(hd.dist(place[v], place[w]))
                    dev = max(dev, abs(dvw - s * dists[v][w]))
                    series.setdefault((v, w), []).append((s, dvw))
    slopes = {}
    for (v, w), pts in series.items():
        pts = [(s, x) for s, x in pts if SLOPE_WINDOW[0] <= s <= SLOPE_WINDOW[1]]
        if len(pts) >= 2:
            slopes[(v, w)] = (_slope([p[0] for p in pts], [p[1] for p in pts]), dists[v][w])
    V = Verification(qf, bound, counts, slopes, dev, resid, R)
    V.clauses = {
        "quasi-fixed": bool(qf) and max(qf.values()) <= bound,
        "critical": all(n == want for row in counts.values() for n, want in row.values()),
        "slope": all(abs(k / dt - 1) <= SLOPE_TOL for k, dt in slopes.values()),
        "ends": all(r < 1e-6 for r in resid.values()),
    }
    return V


def nudge(E: EmbeddedTree, F: Family, v, amount: float = 2.0, directions: int = 8) -> EmbeddedTree:
    """Copy of E with vertex v moved `amount` units.  At each s the move goes
    along whichever of `directions` evenly spaced directions gives the largest
    displacement at the moved point."""
    placement = {}
    for s, place in E.placement.items():
        place = dict(place)
        with mpmath.workdps(F.dps(s)):
            f = F.sampler(s)
            m = hd.to_origin(place[v])
            r = mpmath.tanh(mpmath.mpf(amount) / 2)
            cands = [m.inverse(r * mpmath.expjpi(2 * mpmath.mpf(k) / directions)) for k in range(directions)]
            place[v] = max(cands, key=lambda y: hd.dist(y, f(y)))
        placement[s] = place
    return EmbeddedTree(E.tree, placement, dict(E.diagnostics))


def pointed_code(T: PointedMetricTree):
    """Isomorphism invariant of a pointed tree, ignoring the metric."""
    return T.base.code(special=T.special)
