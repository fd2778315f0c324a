"""Hyperbolic geometry of the unit disk with the metric 2|dz|/(1-|z|^2).

Points are plain complex numbers (or mpmath ``mpc`` when high precision is
needed), optionally wrapped in :class:`DiskPoint` for validation.  Boundary
points are :class:`IdealPoint` angles measured in turns.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import mpmath

from . import _num as nm
from .errors import DegenerateGeodesic, NoConvergence, ValidationError

MARGIN = 1e-14
IDEAL_CAP = 40.0
TAU_PROJ = 1e-9
GOLDEN = (math.sqrt(5) - 1) / 2


@dataclass(frozen=True)
class DiskPoint:
    value: complex
    margin: float | None = None

    def __post_init__(self):
        margin = self.margin
        if margin is None:
            margin = _default_margin(self.value)
        if not abs(self.value) < 1 - margin:
            raise ValidationError(f"point {self.value} is not inside the disk (margin {margin})")

    def __complex__(self):
        return complex(self.value)


@dataclass(frozen=True)
class IdealPoint:
    angle: float | Fraction

    def __post_init__(self):
        object.__setattr__(self, "angle", self.angle % 1)

    @property
    def point(self):
        if isinstance(self.angle, Fraction):
            return nm.turn(float(self.angle))
        return nm.turn(self.angle)


def _default_margin(z) -> float:
    if nm.is_mp(z):
        return 10.0 ** (-(mpmath.mp.dps - 3))
    return MARGIN


def _coerce(p):
    """Return ('disk', z) or ('ideal', unit complex)."""
    if isinstance(p, IdealPoint):
        return "ideal", p.point
    if isinstance(p, DiskPoint):
        return "disk", p.value
    return "disk", p


def _val(p):
    kind, z = _coerce(p)
    return z


class DiskIsometry:
    """The Mobius map z -> (z - c)/(1 - conj(c) z) sending c to 0."""

    def __init__(self, c):
        self.c = _val(c)

    def __call__(self, z):
        c = self.c
        return (z - c) / (1 - c.conjugate() * z)

    def inverse(self, z):
        c = self.c
        return (z + c) / (1 + c.conjugate() * z)

    def __repr__(self):
        return f"DiskIsometry({self.c})"


def to_origin(c) -> DiskIsometry:
    return DiskIsometry(c)


def dist(a, b):
    """Hyperbolic distance 2 artanh |(a-b)/(1-conj(b)a)|.

    Far apart points use the equivalent log form
    2 log(|1-conj(b)a| + |a-b|) - log((1-|a|^2)(1-|b|^2)),
    which does not saturate when the ratio rounds to 1.
    """
    a = _val(a)
    b = _val(b)
    num = abs(a - b)
    den = abs(1 - b.conjugate() * a)
    x = num / den
    if x < 0.5:
        return 2 * nm.atanh(x)
    ra = abs(a)
    rb = abs(b)
    q = (1 - ra) * (1 + ra) * (1 - rb) * (1 + rb)
    return 2 * nm.log(den + num) - nm.log(q)


def dist_to_origin(z):
    r = abs(_val(z))
    if r < 0.5:
        return 2 * nm.atanh(r)
    return nm.log((1 + r) / (1 - r))


def point_at_distance(base, direction, length):
    """Point at hyperbolic distance `length` from `base`, leaving in the
    direction of `direction` (a disk point or a boundary point)."""
    base = _val(base)
    m = to_origin(base)
    w = m(_val(direction)) if not isinstance(direction, IdealPoint) else m(direction.point)
    if abs(w) == 0:
        raise DegenerateGeodesic("direction coincides with base point")
    r = nm.tanh(length / 2)
    return m.inverse(r * w / abs(w))


def _clamp(z):
    if nm.is_mp(z):
        return z
    r = abs(z)
    if r >= 1 - MARGIN:
        z = z / r * (1 - 2 * MARGIN)
    return z


def geodesic(a, b, t, cap: float = IDEAL_CAP) -> DiskPoint:
    """Point on the geodesic from a to b at parameter t in [0, 1].

    For two disk points t is the fraction of arclength.  Ideal endpoints use
    arclength truncated at `cap` hyperbolic units from the finite end (or
    from the foot of the perpendicular from 0 when both ends are ideal).
    """
    return DiskPoint(_clamp(_geodesic_raw(a, b, t, cap)))


def _geodesic_raw(a, b, t, cap=IDEAL_CAP):
    ka, za = _coerce(a)
    kb, zb = _coerce(b)
    if ka == "disk" and kb == "disk":
        if za == zb:
            raise DegenerateGeodesic("endpoints coincide")
        m = to_origin(za)
        w = m(zb)
        length = dist(za, zb)
        r = nm.tanh(t * length / 2)
        return m.inverse(r * w / abs(w))
    if ka == "disk" and kb == "ideal":
        m = to_origin(za)
        w = m(zb)
        r = nm.tanh(t * cap / 2)
        return m.inverse(r * w / abs(w))
    if ka == "ideal" and kb == "disk":
        return _geodesic_raw(b, a, 1 - t, cap)
    if abs(za - zb) < nm.eps_of(za) * 8:
        raise DegenerateGeodesic("ideal endpoints coincide")
    c = _foot_of_ideal_geodesic(za, zb)
    m = to_origin(c)
    u = m(za)
    v = m(zb)
    s = (2 * t - 1) * cap
    target = v if s > 0 else u
    return m.inverse(nm.tanh(abs(s) / 2) * target / abs(target))


def _foot_of_ideal_geodesic(u, v):
    """Point of the geodesic joining ideal points u, v closest to 0."""
    s = u + v
    if abs(s) < 1e-300:
        return 0 * u
    phi = abs(nm.arg(v / u))
    pi = nm.pi_like(phi)
    rho = mpmath.tan((pi - phi) / 4) if nm.is_mp(phi) else math.tan((pi - phi) / 4)
    return rho * s / abs(s)


def angle_at(v, a, b):
    """Angle in [0, pi] at v between the geodesics [v, a] and [v, b]."""
    zv = _val(v)
    m = to_origin(zv)
    ka, za = _coerce(a)
    kb, zb = _coerce(b)
    wa = m(za)
    wb = m(zb)
    if abs(wa) == 0 or abs(wb) == 0:
        raise DegenerateGeodesic("angle vertex coincides with an endpoint")
    return abs(nm.arg(wb / wa))


def direction_at(v, p):
    """Argument (radians) of the unit tangent at v pointing toward p."""
    m = to_origin(_val(v))
    kp, zp = _coerce(p)
    w = m(zp)
    if abs(w) == 0:
        raise DegenerateGeodesic("direction to itself")
    return nm.arg(w)


# ---------------------------------------------------------------- hulls


def to_klein(z):
    return 2 * z / (1 + abs(z) ** 2)


def from_klein(k):
    r2 = abs(k) ** 2
    return k / (1 + nm.sqrt(1 - r2))


def _cross(o, a, b):
    return (a.real - o.real) * (b.imag - o.imag) - (a.imag - o.imag) * (b.real - o.real)


def _hull_indices(ks):
    """Monotone chain convex hull on Klein points; returns ccw index list."""
    idx = sorted(range(len(ks)), key=lambda i: (ks[i].real, ks[i].imag))
    uniq = []
    for i in idx:
        if uniq and abs(ks[uniq[-1]] - ks[i]) == 0:
            continue
        uniq.append(i)
    if len(uniq) <= 2:
        return uniq
    lower = []
    for i in uniq:
        while len(lower) >= 2 and _cross(ks[lower[-2]], ks[lower[-1]], ks[i]) <= 0:
            lower.pop()
        lower.append(i)
    upper = []
    for i in reversed(uniq):
        while len(upper) >= 2 and _cross(ks[upper[-2]], ks[upper[-1]], ks[i]) <= 0:
            upper.pop()
        upper.append(i)
    return lower[:-1] + upper[:-1]


def _golden_min(fun, lo, hi, tol, maxiter=400):
    """Golden-section search; returns the final bracket (a, b)."""
    a, b = lo, hi
    c = b - GOLDEN * (b - a)
    d = a + GOLDEN * (b - a)
    fc, fd = fun(c), fun(d)
    it = 0
    while abs(b - a) > tol:
        it += 1
        if it > maxiter:
            raise NoConvergence("golden-section search stalled")
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - GOLDEN * (b - a)
            fc = fun(c)
        else:
            a, c, fc = c, d, fd
            d = a + GOLDEN * (b - a)
            fd = fun(d)
    return a, b


def _edge_length(p, q, cap):
    kp, zp = _coerce(p)
    kq, zq = _coerce(q)
    if kp == "disk" and kq == "disk":
        return dist(zp, zq)
    if kp == "ideal" and kq == "ideal":
        return 2 * cap
    return cap


def _ahead(zx, p, q, t, cap):
    """Signed cosine of the angle at the point P(t) between x and the
    forward direction of the geodesic; zero at the foot of the perpendicular."""
    z = _geodesic_raw(p, q, t, cap)
    m = to_origin(z)
    u = m(zx)
    kq, zq = _coerce(q)
    w = m(zq)
    if abs(w) == 0:
        w = -m(_val(p))
    return (u * w.conjugate()).real


def project_to_segment(x, p, q, tol=TAU_PROJ, cap=IDEAL_CAP):
    """Nearest point to x on the geodesic segment [p, q]; returns (t, point, distance).

    A coarse golden-section pass on the distance is followed by bisection on
    the perpendicularity condition, which is linear near the minimum and so
    resolves the foot point to full precision.
    """
    zx = _val(x)
    length = _edge_length(p, q, cap)

    def fun(t):
        return dist(zx, _geodesic_raw(p, q, t, cap))

    scale = max(float(length), 1.0)
    a, b = _golden_min(fun, 0.0, 1.0, 1e-4 / scale)
    a = max(0.0, a - 1e-4 / scale)
    b = min(1.0, b + 1e-4 / scale)
    ga = _ahead(zx, p, q, a, cap)
    gb = _ahead(zx, p, q, b, cap)
    if ga <= 0:
        t = a
    elif gb >= 0:
        t = b
    else:
        it = 0
        while (b - a) * scale > tol * 1e-3:
            it += 1
            if it > 200:
                raise NoConvergence("perpendicular foot bisection stalled")
            mid = (a + b) / 2
            if mid in (a, b):
                break
            if _ahead(zx, p, q, mid, cap) > 0:
                a = mid
            else:
                b = mid
        t = (a + b) / 2
    best = (fun(t), t)
    for tt in (0.0, 1.0):
        if _coerce(p if tt == 0.0 else q)[0] == "disk":
            best = min(best, (fun(tt), tt))
    val, t = best
    return t, _geodesic_raw(p, q, t, cap), val


def project_to_hull(x, pts, tol: float = TAU_PROJ, cap: float = IDEAL_CAP) -> DiskPoint:
    """Nearest point of the hyperbolic convex hull of `pts` to x.

    The hull is convex in the Klein model, so membership is a Euclidean
    polygon test there; outside points are projected by golden-section
    search along each hull edge.
    """
    if not pts:
        raise ValidationError("empty point set")
    zx = _val(x)
    coerced = [_coerce(p) for p in pts]
    ks = [z if kind == "ideal" else to_klein(z) for kind, z in coerced]
    hull = _hull_indices(ks)
    if len(hull) == 1:
        return DiskPoint(_clamp(_val(pts[hull[0]])))
    kx = to_klein(zx)
    if len(hull) >= 3:
        inside = True
        for i in range(len(hull)):
            a = ks[hull[i]]
            b = ks[hull[(i + 1) % len(hull)]]
            if _cross(a, b, kx) < -1e-15:
                inside = False
                break
        if inside:
            return DiskPoint(_clamp(zx))
        edges = [(hull[i], hull[(i + 1) % len(hull)]) for i in range(len(hull))]
    else:
        edges = [(hull[0], hull[1])]
    best = None
    for i, j in edges:
        t, z, val = project_to_segment(zx, pts[i], pts[j], tol, cap)
        if best is None or val < best[0]:
            best = (val, z)
    return DiskPoint(_clamp(best[1]))


# ---------------------------------------------------------------- thin triangles


def triangle_excess(a, b, c):
    """d(A,B) + d(B,C) - d(A,C)."""
    return dist(a, b) + dist(b, c) - dist(a, c)


def thin_triangle_bound(theta: float) -> float:
    """Closed-form supremum 2 log(1/sin(theta/2)) of the excess for angle theta at B."""
    return 2 * math.log(1 / math.sin(theta / 2))


def sample_triangles(theta: float, n: int, seed: int = 0, radius: float = 8.0):
    """Random triangles with angle at least theta at the middle vertex."""
    rng = random.Random(seed)
    out = []
    for _ in range(n):
        b = complex(*(rng.uniform(-0.6, 0.6) for _ in range(2)))
        phi = rng.uniform(0, 2 * math.pi)
        ang = rng.uniform(theta, math.pi)
        la = rng.uniform(0.01, radius)
        lc = rng.uniform(0.01, radius)
        m = to_origin(b)
        a = m.inverse(math.tanh(la / 2) * complex(math.cos(phi), math.sin(phi)))
        c = m.inverse(math.tanh(lc / 2) * complex(math.cos(phi + ang), math.sin(phi + ang)))
        out.append((a, b, c))
    return out


@lru_cache(maxsize=None)
def thin_triangle_constant(theta: float, samples: int = 4000, seed: int = 0) -> float:
    """Empirical C(theta): the largest sampled excess over triangles whose
    angle at the middle vertex is at least theta."""
    return max(triangle_excess(*tri) for tri in sample_triangles(theta, samples, seed))


# ---------------------------------------------------------------- radial comparison


HE_DELTAS = (1e-2, 1e-3, 1e-4, 1e-5, 1e-6, 1e-7, 1e-8)
HE_ALPHAS = (0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9)


def he_grid_violations(deltas=HE_DELTAS, alphas=HE_ALPHAS, tol: float = 1e-12):
    """Check alpha d(0,z) <= d(0,z') <= alpha d(0,z) + log 2 for |z| = 1-delta,
    |z'| = 1-delta^alpha.  Returns the list of failing (delta, alpha) cases."""
    bad = []
    with mpmath.workdps(40):
        for delta in deltas:
            dz = mpmath.log((2 - mpmath.mpf(delta)) / mpmath.mpf(delta))
            for alpha in alphas:
                da = mpmath.mpf(delta) ** mpmath.mpf(alpha)
                dzp = mpmath.log((2 - da) / da)
                lower = alpha * dz
                upper = alpha * dz + mpmath.log(2)
                if not (lower - tol <= dzp <= upper + tol):
                    bad.append((delta, alpha, float(lower), float(dzp), float(upper)))
    return bad
