"""Markov pieces, periodic-point continuation and braid words along paths of maps.

Pieces are the arcs between consecutive boundary fixed points, labelled by
the lift marking of the map.  Periodic points of period >= 3 are followed by
Newton continuation; their planar motion (the unit circle sits in the
plane) is read as a braid by watching the left-to-right order of the
strands change.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from fractions import Fraction

from .blaschke import AntiBlaschke, ProperMap, labeled_fixed_point
from .errors import Collision, EndpointMismatch, StepTooLarge, ValidationError

EPS_SEP = 1e-3
MAX_REFINE = 20
NEWTON_TOL = 1e-13


# ---------------------------------------------------------------- Markov pieces


@dataclass
class MarkovLabeling:
    d: int
    pieces: list               # [(start, end)] in turns
    transition: list           # (d+1) x (d+1) 0/1 matrix


def markov_base(d: int) -> MarkovLabeling:
    if d < 2:
        raise ValidationError("degree must be at least 2")
    n = d + 1
    pieces = [(Fraction(k, n), Fraction(k + 1, n)) for k in range(n)]
    M = [[0 if i == j else 1 for j in range(n)] for i in range(n)]
    return MarkovLabeling(d, pieces, M)


def mdeg(d: int, theta: Fraction) -> Fraction:
    """The model map m_{-d}: theta -> -d theta mod 1."""
    return (-d * theta) % 1


def piece_image(d: int, k: int) -> list:
    """Pieces covered by m_{-d} of piece k, from exact endpoint images.

    The map reverses orientation and stretches by d, so the arc
    [a, b] goes to the arc swept clockwise from m(a) by d(b - a).
    """
    n = d + 1
    a = Fraction(k, n)
    start = mdeg(d, a)
    covered = []
    for j in range(n):
        # piece j is covered iff its midpoint lies in the swept arc
        mid = Fraction(2 * j + 1, 2 * n)
        back = (start - mid) % 1
        if back < Fraction(d, n):
            covered.append(j)
    return covered


def exact_periodic(d: int, period: int) -> list:
    """All angles of exact period `period` under m_{-d}."""
    N = d ** period - (-1) ** period
    out = []
    for k in range(N):
        t = Fraction(k, N)
        x = t
        least = None
        for i in range(1, period + 1):
            x = mdeg(d, x)
            if x == t:
                least = i
                break
        if least == period:
            out.append(t)
    return out


def seed_periodic_points(d: int, period: int = 3) -> list:
    """One exact periodic angle per open piece.

    In piece 0 the angle nearest the midpoint is taken (smallest on ties);
    piece k gets that angle plus k/(d+1), which commutes with m_{-d}, so the
    choice is invariant under rotation by one piece.
    """
    if period < 3:
        raise ValidationError("period must be at least 3")
    n = d + 1
    cands = [t for t in exact_periodic(d, period) if 0 < t < Fraction(1, n)]
    if not cands:
        raise ValidationError(f"no periodic angle of period {period} inside a piece")
    mid = Fraction(1, 2 * n)
    t0 = min(cands, key=lambda t: (abs(t - mid), t))
    return [t0 + Fraction(k, n) for k in range(n)]


# ---------------------------------------------------------------- circle dynamics


def _turn(theta: float) -> complex:
    return cmath.exp(2j * math.pi * theta)


def _angle(z: complex) -> float:
    return (cmath.phase(z) / (2 * math.pi)) % 1


def _wrap(x: float) -> float:
    return (x + 0.5) % 1 - 0.5


def _circle_deriv(f: ProperMap, z: complex) -> float:
    return sum((1 - abs(b) ** 2) / abs(z - b.conjugate()) ** 2 for b in f.params)


def _residual(f: ProperMap, theta: float, period: int):
    """Wrapped f^p(theta) - theta and its derivative in theta."""
    z = _turn(theta)
    deriv = 1.0
    for _ in range(period):
        deriv *= -_circle_deriv(f, z)
        w = f(z)
        z = w / abs(w)
    return _wrap(_angle(z) - theta), deriv - 1


def newton_periodic(f: ProperMap, theta: float, period: int, window: float, maxiter: int = 50):
    """Periodic point of f near theta; None if Newton leaves the window."""
    x = float(theta)
    for _ in range(maxiter):
        r, dr = _residual(f, x, period)
        if dr == 0:
            return None
        step = r / dr
        x -= step
        if abs(_wrap(x - theta)) > window:
            return None
        if abs(step) < NEWTON_TOL:
            return x % 1
    return None


def periodic_points(f: ProperMap, period: int, grid: int = 4096) -> list:
    """All period-dividing points of the boundary map located by a grid scan."""
    out = []
    prev = None
    for k in range(grid + 1):
        t = k / grid
        r = _residual(f, t, period)[0]
        if prev is not None and (prev[1] > 0) != (r > 0) and abs(prev[1] - r) < 0.5:
            x = newton_periodic(f, (prev[0] + t) / 2, period, 2.0 / grid)
            if x is not None and all(abs(_wrap(x - y)) > 1e-9 for y in out):
                out.append(x)
        prev = (t, r)
    return sorted(out)


def marked_pieces(f: ProperMap) -> list:
    """Fixed-point angles in label order 0..D; piece i runs from label i to i+1."""
    return [labeled_fixed_point(f, k) for k in range(len(f.params) + 1)]


def piece_of(theta: float, fixed: list) -> int:
    n = len(fixed)
    for i in range(n):
        a = fixed[i]
        b = fixed[(i + 1) % n]
        if 0 < (theta - a) % 1 < (b - a) % 1 or (n == 1):
            return i
    raise ValidationError("angle sits on a piece boundary")


def default_seeds(f: ProperMap, period: int = 3) -> list:
    """Per piece of f, the exact-period point nearest the middle of the piece."""
    fixed = marked_pieces(f)
    pts = [x for x in periodic_points(f, period) if _least_period(f, x, period) == period]
    n = len(fixed)
    out = []
    for i in range(n):
        a, b = fixed[i], fixed[(i + 1) % n]
        width = (b - a) % 1
        mid = (a + width / 2) % 1
        inside = [x for x in pts if 0 < (x - a) % 1 < width]
        if not inside:
            raise ValidationError(f"no period-{period} point inside piece {i}")
        out.append(min(inside, key=lambda x: abs(_wrap(x - mid))))
    return out


def _least_period(f, x, period):
    z = _turn(x)
    for i in range(1, period + 1):
        w = f(z)
        z = w / abs(w)
        if abs(_wrap(_angle(z) - x)) < 1e-9:
            return i
    return None


# ---------------------------------------------------------------- paths


def interpolate(f: ProperMap, g: ProperMap, u: float) -> ProperMap:
    """Straight-line path in the zeros, shortest arc in the phase."""
    if len(f.params) != len(g.params):
        raise ValidationError("maps along a path must have equal degree")
    params = tuple((1 - u) * complex(a) + u * complex(b) for a, b in zip(f.params, g.params))
    pa = cmath.phase(complex(f.phase))
    dp = _wrap((cmath.phase(complex(g.phase)) - pa) / (2 * math.pi)) * 2 * math.pi
    return ProperMap(params, cmath.exp(1j * (pa + u * dp)))


def rotation_loop(d: int, samples: int = 64) -> list:
    """theta -> e^{i theta} conj(z)^d for theta from 0 to 2 pi."""
    return [AntiBlaschke.monomial(d, cmath.exp(2j * math.pi * k / samples)) for k in range(samples + 1)]


def rotation_loop_positions(d: int, theta: float, seeds: list) -> list:
    """Closed form along the rotation loop: every periodic point turns by theta/(2 pi (d+1))."""
    return [(float(s) + theta / (2 * math.pi * (d + 1))) % 1 for s in seeds]


# ---------------------------------------------------------------- braids


def _order(positions: list) -> list:
    """Strand indices sorted left to right in the plane."""
    return sorted(range(len(positions)), key=lambda i: (_turn(positions[i]).real, i))


def crossings(old: list, new: list) -> list:
    """Signed generators for the passage between two nearby configurations.

    Adjacent swaps in the left-to-right order are read off by bubble sort.
    Generator k (1-based) swaps positions k and k+1; the sign is +1 when the
    strand moving right passes below the one moving left.
    """
    order = _order(old)
    target = _order(new)
    rank = {s: i for i, s in enumerate(target)}
    word = []
    changed = True
    while changed:
        changed = False
        for k in range(len(order) - 1):
            a, b = order[k], order[k + 1]
            if rank[a] > rank[b]:
                ya = (_turn(old[a]).imag + _turn(new[a]).imag) / 2
                yb = (_turn(old[b]).imag + _turn(new[b]).imag) / 2
                # a moves right past b
                word.append(k + 1 if ya < yb else -(k + 1))
                order[k], order[k + 1] = b, a
                changed = True
    return word


def _commute(a: int, b: int) -> bool:
    return abs(abs(a) - abs(b)) >= 2


def free_reduce(word: list) -> list:
    """Cancel g ... g^-1 pairs whose intermediate letters all commute with g
    (distant generators commute), then return the lexicographic normal form:
    greedily emit the smallest letter not blocked by an earlier letter it
    fails to commute with."""
    w = list(word)
    changed = True
    while changed:
        changed = False
        for i in range(len(w)):
            for j in range(i + 1, len(w)):
                if w[j] == -w[i]:
                    del w[j]
                    del w[i]
                    changed = True
                    break
                if not _commute(w[i], w[j]):
                    break
            if changed:
                break
    out = []
    left = list(range(len(w)))
    while left:
        free = [k for n, k in enumerate(left) if all(_commute(w[k], w[m]) for m in left[:n])]
        k = min(free, key=lambda k: (abs(w[k]), w[k]))
        out.append(w[k])
        left.remove(k)
    return out


def invert_word(word: list) -> list:
    return [-g for g in reversed(word)]


def word_permutation(word: list, n: int) -> list:
    """Position permutation of a braid word: slot i ends at slot perm[i]."""
    slots = list(range(n))
    for g in word:
        k = abs(g) - 1
        slots[k], slots[k + 1] = slots[k + 1], slots[k]
    perm = [0] * n
    for pos, start in enumerate(slots):
        perm[start] = pos
    return perm


# ---------------------------------------------------------------- tracing


@dataclass
class TracedPath:
    samples: list
    period: int
    tracked: list              # per strand, list of angles (one per accepted step)
    permutation: tuple         # s with K_{s(i)}(1) = K_i(0)
    braid: list
    residuals: list = field(default_factory=list)

    @property
    def initial(self) -> list:
        return [t[0] for t in self.tracked]

    @property
    def final(self) -> list:
        return [t[-1] for t in self.tracked]

    def to_json(self) -> dict:
        return {"period": self.period, "permutation": list(self.permutation),
                "braid": list(self.braid), "residuals": list(self.residuals),
                "initial": self.initial, "final": self.final}


def _min_sep(pos: list) -> float:
    n = len(pos)
    return min((abs(_wrap(pos[i] - pos[j])) for i in range(n) for j in range(i + 1, n)), default=1.0)


def _piece_permutation(final_map: ProperMap, final: list, start_pieces: list) -> tuple:
    fixed = marked_pieces(final_map)
    sigma = {start_pieces[i]: piece_of(x, fixed) for i, x in enumerate(final)}
    s = [0] * len(fixed)
    for i, j in sigma.items():
        s[j] = i
    return tuple(s)


def trace(path: list, seeds: list | None = None, period: int = 3,
          eps_sep: float = EPS_SEP, max_refine: int = MAX_REFINE) -> TracedPath:
    if len(path) < 1:
        raise ValidationError("empty path")
    if period < 3:
        raise ValidationError("period must be at least 3")
    f0 = path[0]
    n = len(f0.params) + 1
    if seeds is None:
        seeds = default_seeds(f0, period)
    if len(seeds) != n:
        raise ValidationError(f"need {n} seeds, one per piece")
    pos = []
    for s in seeds:
        x = newton_periodic(f0, float(s), period, eps_sep / 2)
        if x is None:
            raise StepTooLarge(f"seed {s} is not near a periodic point")
        pos.append(x)
    fixed0 = marked_pieces(f0)
    start_pieces = [piece_of(x, fixed0) for x in pos]
    if sorted(start_pieces) != list(range(n)):
        raise ValidationError("seeds must lie one in each piece")
    tracked = [[x] for x in pos]
    word = []
    residuals = []
    for a, b in zip(path, path[1:]):
        u = 0.0
        du = 1.0
        depth = 0
        while u < 1.0:
            step = min(du, 1.0 - u)
            g = b if u + step >= 1.0 else interpolate(a, b, u + step)
            new = []
            ok = True
            for x in pos:
                y = newton_periodic(g, x, period, eps_sep / 2)
                if y is None or abs(_wrap(y - x)) >= eps_sep / 2:
                    ok = False
                    break
                new.append(y)
            if ok and _min_sep(new) <= eps_sep:
                if depth >= max_refine:
                    raise Collision(f"strands within {eps_sep} turns")
                ok = False
            if not ok:
                depth += 1
                if depth > max_refine:
                    raise StepTooLarge("parameter step refinement cap reached")
                du = step / 2
                continue
            word.extend(crossings(pos, new))
            residuals.append(max(abs(_residual(g, y, period)[0]) for y in new))
            pos = new
            for t, y in zip(tracked, new):
                t.append(y)
            u += step
            du = min(1.0, 2 * step)
            depth = max(0, depth - 1)
    perm = _piece_permutation(path[-1], pos, start_pieces)
    return TracedPath(list(path), period, tracked, perm, free_reduce(word), residuals)


def _same_map(f: ProperMap, g: ProperMap, tol: float = 1e-9) -> bool:
    if len(f.params) != len(g.params):
        return False
    return all(abs(complex(a) - complex(b)) < tol for a, b in zip(f.params, g.params)) and \
        abs(complex(f.phase) - complex(g.phase)) < tol


def compose(a: TracedPath, b: TracedPath, tol: float = 1e-8) -> TracedPath:
    """Trace of the concatenated path, assembled from the two halves."""
    if not _same_map(a.samples[-1], b.samples[0]):
        raise EndpointMismatch("end map of the first path differs from the start of the second")
    if a.period != b.period:
        raise EndpointMismatch("periods differ")
    link = {}
    for i, x in enumerate(a.final):
        js = [j for j, y in enumerate(b.initial) if abs(_wrap(x - y)) < tol]
        if len(js) != 1:
            raise EndpointMismatch("tracked points at the junction do not match")
        link[i] = js[0]
    tracked = [a.tracked[i] + b.tracked[link[i]][1:] for i in range(len(a.tracked))]
    s = tuple(a.permutation[b.permutation[i]] for i in range(len(a.permutation)))
    return TracedPath(a.samples + b.samples[1:], a.period, tracked, s,
                      free_reduce(a.braid + b.braid), a.residuals + b.residuals)


def reverse(path: list) -> list:
    return list(reversed(path))


def invert_permutation(s) -> tuple:
    out = [0] * len(s)
    for i, j in enumerate(s):
        out[j] = i
    return tuple(out)
