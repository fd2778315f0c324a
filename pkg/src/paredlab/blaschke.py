"""Anti-Blaschke products and proper antiholomorphic self-maps of the disk.

A proper map of degree D is stored as parameters b_1..b_D and a unit phase,

    g(z) = phase * prod_j (conj(z) - b_j) / (1 - conj(b_j) conj(z)),

so g = phase * conj(B) with B(z) = prod_j (z - conj(b_j)) / (1 - b_j z).
The zeros of g sit at conj(b_j).  An anti-Blaschke product of degree d is
the case b = (0, a_1, ..., a_{d-1}): it fixes 0 and is superattracting there.

Every routine accepts Python complex or mpmath values.
"""

from __future__ import annotations

import cmath
import math
import random
from dataclasses import dataclass, field
from fractions import Fraction

import mpmath
import numpy as np

from . import _num as nm
from . import hypdisk
from .errors import (
    BracketFailure,
    ContinuationStepCollision,
    RootFindFailure,
    ValidationError,
)

EPS_FIX = 1e-12
EPS_SEP = 1e-3
MERGE_RADIUS = 1e-7
GRID_FACTOR = 64


# ---------------------------------------------------------------- polynomials
# coefficient lists, lowest degree first


def _pmul(p, q):
    out = [0 * p[0]] * (len(p) + len(q) - 1)
    for i, x in enumerate(p):
        for j, y in enumerate(q):
            out[i + j] = out[i + j] + x * y
    return out


def _psub(p, q):
    n = max(len(p), len(q))
    z = 0 * (p[0] if p else q[0])
    return [(p[i] if i < len(p) else z) - (q[i] if i < len(q) else z) for i in range(n)]


def _pderiv(p):
    return [i * p[i] for i in range(1, len(p))] or [0 * p[0]]


def _peval(p, z):
    acc = 0 * z
    for c in reversed(p):
        acc = acc * z + c
    return acc


# ---------------------------------------------------------------- maps


@dataclass(frozen=True)
class ProperMap:
    params: tuple
    phase: complex = 1

    @property
    def degree(self) -> int:
        return len(self.params)

    @property
    def is_mp(self) -> bool:
        return nm.is_mp(self.phase, *self.params)

    def __call__(self, z):
        return eval_map(self, z)

    def numerator(self):
        one = self._one()
        p = [one]
        for b in self.params:
            p = _pmul(p, [-b.conjugate(), one])
        return p

    def denominator(self):
        one = self._one()
        q = [one]
        for b in self.params:
            q = _pmul(q, [one, -b])
        return q

    def _one(self):
        return mpmath.mpc(1) if self.is_mp else complex(1)

    def holo(self, z):
        """B(z), so that the map equals phase * conj(B(z))."""
        acc = 1 + 0 * z
        for b in self.params:
            acc = acc * (z - b.conjugate()) / (1 - b * z)
        return acc

    def holo_deriv(self, z):
        """B'(z) by the product rule."""
        total = 0 * z
        facs = [(z - b.conjugate()) / (1 - b * z) for b in self.params]
        ders = [(1 - abs(b) ** 2) / (1 - b * z) ** 2 for b in self.params]
        for i in range(len(facs)):
            term = ders[i]
            for j in range(len(facs)):
                if j != i:
                    term = term * facs[j]
            total = total + term
        return total

    def dbar(self, z):
        """The antiholomorphic derivative d/d(conj z)."""
        return self.phase * self.holo_deriv(z).conjugate()

    def zeros(self):
        return [b.conjugate() for b in self.params]

    def to_json(self) -> dict:
        return {"params": [_cpair(b) for b in self.params], "phase": _cpair(self.phase)}


def _cpair(z):
    if nm.is_mp(z):
        return [mpmath.nstr(z.real, mpmath.mp.dps), mpmath.nstr(z.imag, mpmath.mp.dps)]
    z = complex(z)
    return [z.real, z.imag]


def _cparse(pair, mp=False):
    re, im = pair
    if mp or isinstance(re, str) or isinstance(im, str):
        return mpmath.mpc(mpmath.mpf(re), mpmath.mpf(im))
    return complex(float(re), float(im))


@dataclass(frozen=True)
class AntiBlaschke(ProperMap):
    """f(z) = phase * conj(z) * prod (conj(z) - a_i)/(1 - conj(a_i) conj(z))."""

    @classmethod
    def from_zeros(cls, zeros, phase=1) -> AntiBlaschke:
        zeros = tuple(zeros)
        mp = nm.is_mp(phase, *zeros)
        for a in zeros:
            if not abs(a) < 1:
                raise ValidationError(f"zero {a} is not in the open disk")
        zero = mpmath.mpc(0) if mp else 0j
        if mp:
            zeros = tuple(mpmath.mpc(a) for a in zeros)
            phase = mpmath.mpc(phase)
        else:
            zeros = tuple(complex(a) for a in zeros)
            phase = complex(phase)
        return cls((zero,) + zeros, phase)

    @classmethod
    def monomial(cls, d: int, phase=1) -> AntiBlaschke:
        return cls.from_zeros([0j] * (d - 1), phase)

    @property
    def a(self) -> tuple:
        return self.params[1:]

    @property
    def d(self) -> int:
        return len(self.params)

    def to_json(self) -> dict:
        out = {"d": self.d, "zeros": [_cpair(a) for a in self.a]}
        if self.phase != 1:
            out["phase"] = _cpair(self.phase)
        return out

    @classmethod
    def from_json(cls, obj) -> AntiBlaschke:
        zeros = [_cparse(p) for p in obj["zeros"]]
        phase = _cparse(obj["phase"]) if "phase" in obj else 1
        if any(nm.is_mp(z) for z in zeros):
            zeros = [mpmath.mpc(z) for z in zeros]
            phase = mpmath.mpc(phase)
        f = cls.from_zeros(zeros, phase)
        if obj.get("d", f.d) != f.d:
            raise ValidationError("degree does not match the number of zeros")
        return f


def eval_map(f: ProperMap, z):
    """Product formula value of the map at z (closed disk)."""
    zc = z.conjugate()
    acc = f.phase
    for b in f.params:
        acc = acc * (zc - b) / (1 - b.conjugate() * zc)
    return acc


# ---------------------------------------------------------------- critical points


def critical_polynomial(f: ProperMap):
    """Numerator P'Q - PQ' of B' (lowest degree first)."""
    P = f.numerator()
    Q = f.denominator()
    return _psub(_pmul(_pderiv(P), Q), _pmul(P, _pderiv(Q)))


def _merge(roots, radius):
    clusters = []
    for r in roots:
        for c in clusters:
            if abs(c[0] - r) < radius:
                c.append(r)
                break
        else:
            clusters.append([r])
    out = []
    for c in clusters:
        m = sum(c) / len(c)
        out.append((m, len(c)))
    return out


def critical_points(f: ProperMap, merge_radius: float = MERGE_RADIUS):
    """Critical points in the disk as (point, multiplicity), totalling D-1."""
    N = critical_polynomial(f)
    while len(N) > 1 and N[-1] == 0:
        N.pop()
    # exact zero roots
    m0 = 0
    while m0 < len(N) - 1 and N[m0] == 0:
        m0 += 1
    core = N[m0:]
    if f.is_mp:
        roots = _mp_roots(core)
        zero = mpmath.mpc(0)
    else:
        roots = list(np.roots(np.array(core[::-1], dtype=complex))) if len(core) > 1 else []
        roots = [_newton_polish(core, complex(r)) for r in roots]
        zero = 0j
    inside = [r for r in roots if abs(r) < 1]
    pts = _merge(inside, merge_radius)
    if m0:
        pts = [(zero, m0)] + pts
    total = sum(m for _, m in pts)
    if total != f.degree - 1:
        raise RootFindFailure(f"found {total} critical points in the disk, expected {f.degree - 1}")
    return pts


def _newton_polish(p, z, steps=3):
    dp = _pderiv(p)
    for _ in range(steps):
        dv = _peval(dp, z)
        if dv == 0:
            break
        step = _peval(p, z) / dv
        if not cmath.isfinite(step):
            break
        z = z - step
    return z


def _mp_roots(core):
    if len(core) <= 1:
        return []
    coeffs = list(reversed(core))
    try:
        roots = mpmath.polyroots(coeffs, maxsteps=400, extraprec=4 * mpmath.mp.prec)
    except mpmath.libmp.libhyper.NoConvergence as exc:
        raise RootFindFailure(str(exc)) from exc
    if not isinstance(roots, list):
        roots = [roots]
    return [mpmath.mpc(r) for r in roots]


def critical_list(f: ProperMap):
    """Critical points repeated by multiplicity."""
    out = []
    for z, m in critical_points(f):
        out.extend([z] * m)
    return out


def winding_count(f: ProperMap, radius: float = 1 - 1e-9, samples: int = 4096) -> int:
    """Zeros of B' in |z| < radius by the argument principle on a circle."""
    N = critical_polynomial(f)
    total = 0.0
    prev = None
    first = None
    for k in range(samples + 1):
        z = radius * cmath.exp(2j * math.pi * k / samples)
        w = complex(_peval(N, complex(z)))
        a = cmath.phase(w)
        if prev is not None:
            da = a - prev
            da = (da + math.pi) % (2 * math.pi) - math.pi
            total += da
        prev = a
    return round(total / (2 * math.pi))


# ---------------------------------------------------------------- boundary dynamics


def lift(f: ProperMap, theta):
    """Continuous lift of the boundary map in turns: angle of f(e^{2 pi i theta}).

    Each factor contributes -theta + Arg(1 - b e^{2 pi i theta})/pi, and
    Arg(1 - b w) stays in (-pi/2, pi/2) because |b| < 1.
    """
    w = nm.turn(theta)
    pi = nm.pi_like(w.real if nm.is_mp(w) else theta)
    val = -len(f.params) * theta + nm.arg(f.phase) / (2 * pi)
    for b in f.params:
        val = val + nm.arg(1 - b * w) / pi
    return val


def displacement(f: ProperMap, theta):
    """Lifted circle displacement H(theta) = lift(theta) - theta, strictly decreasing."""
    return lift(f, theta) - theta


def fixed_point_at_level(f: ProperMap, level: int, tol: float | None = None):
    """The unique theta in [0, 1) with H(theta) = level + H-offset.

    H decreases by D+1 over a turn, so every integer in (H(1), H(0)] is hit
    once; the angle for the fixed point labelled k (from the model map) is
    the solution of H = -k.
    """
    mp = f.is_mp
    lo = mpmath.mpf(0) if mp else 0.0
    hi = mpmath.mpf(1) if mp else 1.0
    if tol is None:
        tol = mpmath.mpf(10) ** (-(mpmath.mp.dps - 5)) if mp else EPS_FIX * 1e-3
    h0 = displacement(f, lo)
    # shift the target into the window (H(1), H(0)]
    target = level
    D1 = len(f.params) + 1
    while target > h0:
        target -= D1
    while target <= h0 - D1:
        target += D1
    a, b = lo, hi
    it = 0
    cap = int(math.log2(1 / float(tol))) + 60
    while b - a > tol:
        it += 1
        if it > cap:
            raise BracketFailure("bisection did not converge")
        m = (a + b) / 2
        if displacement(f, m) > target:
            a = m
        else:
            b = m
    return (a + b) / 2


@dataclass
class MarkedFixedPoints:
    angles: list
    marking: int
    residuals: list = field(default_factory=list)
    certificate: dict = field(default_factory=dict)

    def labeled(self, k: int):
        """Angle of the fixed point corresponding to k/(d+1) under the marking."""
        return self.angles[(self.marking + k) % len(self.angles)]


def _wrapped_displacement(f, theta):
    """Angle of f(e^{2 pi i theta}) minus theta, wrapped to (-1/2, 1/2]."""
    w = f(nm.turn(theta))
    x = nm.arg(w) / (2 * nm.pi_like(theta)) - theta
    return x - math.floor(float(x) + 0.5)


def _grid_brackets(f, n):
    """Brackets of integer crossings of the lifted displacement on a grid.

    The lift is evaluated by the closed form in :func:`displacement`, so no
    phase unwrapping is needed even when a zero sits close to the circle.
    """
    thetas = [k / n for k in range(n + 1)]
    vals = [float(displacement(f, t)) for t in thetas]
    brackets = []
    for i in range(n):
        hi, lo = vals[i], vals[i + 1]
        if lo > hi:
            return None
        # H decreases, so each integer in (H(1), H(0)] is crossed once
        for k in range(math.floor(lo) + 1, math.floor(hi) + 1):
            brackets.append((thetas[i], thetas[i + 1], k))
    return brackets


def _refine_level(f, lo, hi, k, tol=EPS_FIX):
    """Bisection for displacement(theta) = k on a bracket."""
    it = 0
    while hi - lo > tol:
        it += 1
        if it > 200:
            raise BracketFailure("bisection stalled")
        m = (lo + hi) / 2
        if displacement(f, m) > k:
            lo = m
        else:
            hi = m
    return (lo + hi) / 2


def _refine(f, lo, hi, tol=EPS_FIX):
    flo = _wrapped_displacement(f, lo)
    fhi = _wrapped_displacement(f, hi)
    if flo == 0:
        return lo
    if fhi == 0:
        return hi
    if flo * fhi > 0:
        raise BracketFailure("bracket does not straddle a fixed point")
    it = 0
    while hi - lo > tol:
        it += 1
        if it > 200:
            raise BracketFailure("bisection stalled")
        m = (lo + hi) / 2
        fm = _wrapped_displacement(f, m)
        if fm == 0:
            return m
        if (fm > 0) == (flo > 0):
            lo, flo = m, fm
        else:
            hi = m
    return (lo + hi) / 2


def fixed_point_angles(f: ProperMap, max_doublings: int = 4) -> list:
    """The D+1 boundary fixed points in increasing angle (double precision)."""
    D1 = len(f.params) + 1
    n = GRID_FACTOR * D1
    for _ in range(max_doublings + 1):
        brackets = _grid_brackets(f, n)
        if brackets is not None and len(brackets) == D1:
            pts = sorted(_refine_level(f, lo, hi, k) % 1.0 for lo, hi, k in brackets)
            return pts
        n *= 2
    raise BracketFailure(f"could not bracket exactly {D1} fixed points")


def continuation_marking(f: ProperMap, eps_sep: float = EPS_SEP, max_steps: int = 100000):
    """Trace the fixed points of the maps with parameters t*b (and phase
    moved along the short arc from 1) from t=0, where the fixed points are
    k/(D+1), to t=1.  Returns the traced angles indexed by k and the
    minimum separation seen."""
    D1 = len(f.params) + 1
    phase_arg = cmath.phase(complex(f.phase))
    params = [complex(b) for b in f.params]

    def at(t):
        return ProperMap(tuple(t * b for b in params), cmath.exp(1j * t * phase_arg))

    pts = [k / D1 for k in range(D1)]
    t = 0.0
    dt = 1.0 / 64
    min_sep = 1.0
    steps = 0
    while t < 1.0:
        steps += 1
        if steps > max_steps:
            raise ContinuationStepCollision("continuation took too many steps")
        t1 = min(1.0, t + dt)
        g = at(t1)
        new = []
        ok = True
        for x in pts:
            r = _local_fixed_point(g, x, eps_sep / 4)
            if r is None:
                ok = False
                break
            new.append(r)
        if not ok:
            dt /= 2
            if dt < 1e-9:
                raise ContinuationStepCollision("step size underflow in continuation")
            continue
        sep = min(_circ_dist(new[i], new[j]) for i in range(D1) for j in range(i + 1, D1))
        if sep < eps_sep:
            raise ContinuationStepCollision(f"fixed points within {sep:.2e}")
        min_sep = min(min_sep, sep)
        pts = new
        t = t1
        dt = min(dt * 1.5, 0.25)
    return pts, min_sep


def _circ_dist(x, y):
    d = abs(x - y) % 1.0
    return min(d, 1 - d)


def _local_fixed_point(g, x0, window):
    """Fixed point of g within `window` turns of x0, or None."""
    lo, hi = x0 - window, x0 + window
    flo = _wrapped_displacement(g, lo)
    fhi = _wrapped_displacement(g, hi)
    if flo * fhi > 0:
        return None
    return _refine(g, lo, hi) % 1.0


def boundary_fixed_points(f: ProperMap, check_paths: bool = False) -> MarkedFixedPoints:
    """Boundary fixed points with the marking from continuation in t*a."""
    angles = fixed_point_angles(f)
    traced, min_sep = continuation_marking(f)
    marked = traced[0]
    idx = min(range(len(angles)), key=lambda i: _circ_dist(angles[i], marked))
    if _circ_dist(angles[idx], marked) > 1e-8:
        raise ContinuationStepCollision("continued point does not land on a fixed point")
    residuals = [abs(complex(f(nm.turn(t))) - complex(nm.turn(t))) for t in angles]
    cert = {"min_separation": min_sep}
    if check_paths:
        other = lift_marking(f)
        cert["lift_marking_agrees"] = _circ_dist(other, marked) < 1e-8
    return MarkedFixedPoints(angles, idx, residuals, cert)


def lift_marking(f: ProperMap):
    """Marked fixed point from the lift formula (solution of H = 0)."""
    return fixed_point_at_level(f, 0) % 1


def labeled_fixed_point(f: ProperMap, k: int):
    """Fixed point corresponding to k/(D+1), from the lift formula (works in mp)."""
    return fixed_point_at_level(f, -k) % 1


# ---------------------------------------------------------------- multipliers


def boundary_derivative(f: ProperMap, theta):
    """|B'(e^{2 pi i theta})| = sum_j (1-|b_j|^2)/|w - conj(b_j)|^2."""
    w = nm.turn(theta)
    return sum((1 - abs(b) ** 2) / abs(w - b.conjugate()) ** 2 for b in f.params)


def multiplier(f: ProperMap, which, marked: MarkedFixedPoints | None = None):
    """L_f(x) = log |f'| at the fixed point labelled x (an index k or k/(d+1))."""
    D1 = len(f.params) + 1
    if isinstance(which, Fraction):
        k = which * D1
        if k.denominator != 1:
            raise ValidationError(f"{which} is not a fixed point of the model map")
        k = int(k)
    else:
        k = int(which)
    if marked is None:
        if f.is_mp:
            theta = labeled_fixed_point(f, k)
        else:
            marked = boundary_fixed_points(f)
            theta = marked.labeled(k)
    else:
        theta = marked.labeled(k)
    return nm.log(boundary_derivative(f, theta))


def multipliers(f: ProperMap) -> list:
    marked = None if f.is_mp else boundary_fixed_points(f)
    return [multiplier(f, k, marked) for k in range(len(f.params) + 1)]


def pared_membership(f: ProperMap, K: float) -> bool:
    return max(multipliers(f)) <= K


def critical_displacements(f: ProperMap) -> list:
    return [hypdisk.dist(c, f(c)) for c, _ in critical_points(f)]


def qf_membership(f: ProperMap, M: float) -> bool:
    return max(critical_displacements(f)) <= M


# ---------------------------------------------------------------- rescaling


def rescale(f: ProperMap, base) -> ProperMap:
    """The conjugate T o f o T^{-1} with T = to_origin(base).

    Its zeros are T(u) for the d solutions u in the disk of f(u) = base.
    """
    base = hypdisk._val(base)
    if base == 0:
        return f
    T = hypdisk.to_origin(base)
    # f(u) = base  <=>  B(u) = conj(base / phase)
    target = (base / f.phase).conjugate()
    P = f.numerator()
    Q = f.denominator()
    poly = _psub(P, [target * q for q in Q])
    while len(poly) > 1 and poly[-1] == 0:
        poly.pop()
    if f.is_mp:
        roots = _mp_roots(poly)
    else:
        roots = [_newton_polish(poly, complex(r)) for r in np.roots(np.array(poly[::-1], dtype=complex))]
    inside = [r for r in roots if abs(r) < 1]
    if len(inside) != f.degree:
        raise RootFindFailure(f"found {len(inside)} preimages of the base point, expected {f.degree}")
    zeros = [T(u) for u in inside]
    params = tuple(w.conjugate() for w in zeros)
    probe = (mpmath.mpc(0.3, 0.1) if f.is_mp else 0.3 + 0.1j)
    g0 = ProperMap(params, 1)
    want = T(f(T.inverse(probe)))
    phase = want / g0(probe)
    phase = phase / abs(phase)
    return ProperMap(params, phase)


def rotate(f: ProperMap, lam) -> ProperMap:
    """Conjugate z -> lam^{-1} f(lam z) by the rotation z -> lam z."""
    params = tuple(b * lam for b in f.params)
    # conj(lam z) - b = conj(lam) (conj z - lam b); 1 - conj(b) conj(lam z) = 1 - conj(lam b) conj z
    phase = f.phase * lam.conjugate() ** len(f.params) / lam
    return ProperMap(params, phase)


@dataclass
class SymbolicLimit:
    factor: ProperMap
    holes: list


def symbolic_limit(zero_limits, tol: float = 0.0) -> SymbolicLimit:
    """Limit of z -> conj(z) prod M_{a_i}(z) when some a_i reach the circle.

    A factor (conj z - a)/(1 - conj(a) conj z) with |a| = 1 equals the
    constant -a away from z = conj(a), where it has a hole.
    """
    phase = 1
    keep = []
    holes = []
    for a in zero_limits:
        if abs(abs(a) - 1) <= tol:
            phase = phase * (-a)
            holes.append(a.conjugate())
        elif abs(a) < 1:
            keep.append(a)
        else:
            raise ValidationError(f"limit {a} lies outside the closed disk")
    mp = nm.is_mp(*zero_limits) if zero_limits else False
    zero = mpmath.mpc(0) if mp else 0j
    params = (zero,) + tuple(keep)
    return SymbolicLimit(ProperMap(params, phase), holes)


# ---------------------------------------------------------------- sweeps


def random_zero(rng: random.Random, rmax: float = 1.0) -> complex:
    while True:
        z = complex(rng.uniform(-rmax, rmax), rng.uniform(-rmax, rmax))
        if abs(z) < rmax:
            return z


# max critical displacement from pared_sweep(3, 3.0, 200, seed=0)
SWEEP_M_D3_K3 = 2.334083925088475


def pared_sweep(d: int = 3, K: float = 3.0, samples: int = 200, seed: int = 0):
    """Seeded sample of BP_d with every multiplier at most K; returns
    (maximum critical displacement, accepted maps, rejected count)."""
    rng = random.Random(seed)
    accepted = []
    rejected = 0
    while len(accepted) < samples:
        f = AntiBlaschke.from_zeros([random_zero(rng) for _ in range(d - 1)])
        bd = max(math.log(boundary_derivative(f, t)) for t in fixed_point_angles(f))
        if bd > K:
            rejected += 1
            continue
        accepted.append(f)
    m = max(max(critical_displacements(f)) for f in accepted)
    return m, accepted, rejected


def circle_degree(f: ProperMap, samples: int = 2048) -> int:
    """Winding number of theta -> f(e^{2 pi i theta})."""
    total = 0.0
    prev = None
    for k in range(samples + 1):
        w = complex(f(nm.turn(k / samples)))
        a = cmath.phase(w)
        if prev is not None:
            da = a - prev
            total += (da + math.pi) % (2 * math.pi) - math.pi
        prev = a
    return round(total / (2 * math.pi))


# ---------------------------------------------------------------- single factor estimate


EM_DELTAS = (1e-2, 1e-3, 1e-4, 1e-5, 1e-6, 1e-7, 1e-8)
EM_ALPHAS = (0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9)


def em_grid_violations(deltas=EM_DELTAS, alphas=EM_ALPHAS, directions: int = 5,
                       radii: int = 5, angles: int = 24, tol: float = 1e-12):
    """Check |M_a(z) + a/|a|| <= 2 delta^(1-alpha) for |a| = 1 - delta and
    |z| <= 1 - delta^alpha, with M_a the degree one proper map with parameter a.
    Returns the list of failing (delta, alpha, a, z, lhs, rhs) cases."""
    bad = []
    with mpmath.workdps(40):
        for delta in deltas:
            dl = mpmath.mpf(delta)
            for j in range(directions):
                ahat = mpmath.expj(2 * mpmath.pi * (mpmath.mpf(j) / directions + mpmath.mpf(1) / 7))
                a = (1 - dl) * ahat
                M = ProperMap((a,), mpmath.mpc(1))
                for alpha in alphas:
                    rmax = 1 - dl ** mpmath.mpf(alpha)
                    rhs = 2 * dl ** (1 - mpmath.mpf(alpha))
                    for i in range(radii + 1):
                        for k in range(angles):
                            z = rmax * mpmath.mpf(i) / radii * mpmath.expj(2 * mpmath.pi * k / angles)
                            lhs = abs(eval_map(M, z) + ahat)
                            if lhs > rhs + tol:
                                bad.append((delta, alpha, complex(a), complex(z), float(lhs), float(rhs)))
    return bad
