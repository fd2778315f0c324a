"""The thirteen acceptance criteria, one test each (criterion 9 is split into
its regression half and its stability half).  Each records one PASS/FAIL
line that the terminal summary prints."""

from __future__ import annotations

import contextlib
import itertools
import math
import random
from fractions import Fraction

import mpmath
import pytest

from conftest import ACCEPTANCE
from oracles import (
    dart_automorphism_count,
    embedding_orbits_burnside,
    on_circle_cross,
    pullback_matchings,
)
from paredlab import blaschke as bl
from paredlab import degeneration as dg
from paredlab import hypdisk as hd
from paredlab import lamination as lam
from paredlab import monodromy as mono
from paredlab import planegraph as pg
from paredlab import ribbontree as rt
from paredlab import tischler as ti


@contextlib.contextmanager
def criterion(k, title, note=""):
    try:
        yield
    except BaseException:
        ACCEPTANCE[k] = (title, "FAIL", note)
        print(f"criterion {k} FAIL: {title}")
        raise
    ACCEPTANCE[k] = (title, "PASS", note)
    print(f"criterion {k} PASS: {title}")


def test_criterion_01_atlas_and_verdicts():
    with criterion(1, "atlas n=4, verdicts and domination chain"):
        atlas = pg.enumerate_atlas(4)
        assert len(atlas) == 3
        C4, C4C, K4 = sorted(atlas, key=lambda G: G.num_edges)
        assert pg.plane_isomorphic(K4, pg.k4()) is not None
        assert [ti.boundedness_verdict(G).bounded for G in (C4, C4C, K4)] == [False, False, True]
        for G, H in itertools.product(atlas, repeat=2):
            strict = pg.dominates(H, G) and H.num_edges > G.num_edges
            assert ti.bifurcates(G, H).bifurcates == strict
        assert pg.dominates(C4C, C4) and pg.dominates(K4, C4C)
        assert not pg.dominates(C4, C4C) and not pg.dominates(C4C, K4)


def test_criterion_02_duality_involution():
    with criterion(2, "dual(dual(G)) isomorphic to G for the n <= 6 atlas"):
        count = 0
        for n in range(3, 7):
            for G in pg.enumerate_atlas(n):
                assert pg.plane_isomorphic(pg.dual(pg.dual(G)), G) is not None
                count += 1
        assert count > 0


def test_criterion_03_counting():
    with criterion(3, "N(C4 -> K4) = 1, |Aut(C4)| = 8, |Aut(K4)| = 12"):
        C4, K4 = pg.cycle_graph(4), pg.k4()
        assert pg.count_double_cosets(C4, K4) == 1
        embs = [e.dart_map for e in pg.embeddings(C4, K4)]
        assert embedding_orbits_burnside(embs, pg.automorphisms(C4), pg.automorphisms(K4), C4.num_darts) == 1
        assert dart_automorphism_count(C4) == len(pg.automorphisms(C4)) == 8
        assert dart_automorphism_count(K4) == len(pg.automorphisms(K4)) == 12


def test_criterion_04_two_cycle_law():
    with criterion(4, "|two_cycles(d)| = (d+1)(d-2)/2 for 2 <= d <= 8"):
        for d in range(2, 9):
            N = d * d - 1
            orbits = {frozenset((Fraction(k, N), (-d * Fraction(k, N)) % 1)) for k in range(N)}
            brute = sum(1 for o in orbits if len(o) == 2)
            n = d + 1
            nonadj = sum(1 for i, j in itertools.combinations(range(n), 2) if (j - i) % n not in (1, n - 1))
            assert len(lam.two_cycles(d)) == brute == nonadj == (d + 1) * (d - 2) // 2


def test_criterion_05_lamination_generation():
    with criterion(5, "d=3 pullback of 1/8:5/8 is unique, invariant to depth 6"):
        g = lam.Chord(Fraction(1, 8), Fraction(5, 8))
        L1 = lam.generate([g], 3, 1)
        assert L1.levels[1] == [lam.Chord(Fraction(7, 24), Fraction(11, 24)),
                                lam.Chord(Fraction(19, 24), Fraction(23, 24))]
        found = pullback_matchings((g.a, g.b), 3, [(g.a, g.b)], {(g.a, g.b)})
        assert len(found) == 1 and (g.a, g.b) in found[0]
        L = lam.generate([g], 3, 6)
        pairs = [(c.a, c.b) for c in L.leaves]
        assert not any(on_circle_cross(p, q) for p, q in itertools.combinations(pairs, 2))
        assert lam.forward_invariance_violations(L) == []


def test_criterion_06_dual_tree_round_trip():
    with criterion(6, "dual_tree(dual_lamination(T)) = T for d <= 4"):
        for d in (2, 3, 4):
            for T in rt.enumerate_trees(d):
                assert rt.isomorphic(lam.dual_tree(lam.dual_lamination(T), d), T)


def test_criterion_07_admissibility():
    with criterion(7, "NSG bigon, trivial enrichments, non-admissible iff not 3-connected"):
        v = ti.is_admissible(ti.load_fixture("nsg")["enrichment"])
        assert not v.admissible and v.certificate["kind"] == "bigon"
        for n in (4, 5):
            for G in pg.enumerate_atlas(n):
                T = ti.tischler_of(G)
                assert ti.is_admissible(ti.enrich(T, {})).admissible
                bad = any(not ti.is_admissible(E).admissible for E in ti.enumerate_enrichments(T))
                assert bad == (not pg.is_k_connected(G, 3))


def test_criterion_08_blaschke_numerics():
    with criterion(8, "fixed points and multipliers of the monomial, finite differences"):
        import cmath
        for d in range(2, 6):
            f = bl.AntiBlaschke.monomial(d)
            marked = bl.boundary_fixed_points(f)
            for k in range(d + 1):
                assert abs(marked.labeled(k) - k / (d + 1)) < 1e-10
                assert abs(bl.multiplier(f, k, marked) - math.log(d)) < 1e-10
        rng = random.Random(8)
        h = 1e-5
        for _ in range(20):
            f = bl.AntiBlaschke.from_zeros([bl.random_zero(rng, 0.9) for _ in range(2)])
            marked = bl.boundary_fixed_points(f)
            for k in range(4):
                t = marked.labeled(k)
                a = cmath.phase(f(cmath.exp(2j * math.pi * (t + h))))
                b = cmath.phase(f(cmath.exp(2j * math.pi * (t - h))))
                delta = ((a - b) / (2 * math.pi) + 0.5) % 1 - 0.5
                assert abs(bl.multiplier(f, k, marked) - math.log(abs(delta / (2 * h)))) < 1e-6


def test_criterion_09_sweep_regression():
    m, acc, _ = bl.pared_sweep(3, 3.0, 200, seed=0)
    assert len(acc) == 200 and math.isfinite(m)
    assert m == pytest.approx(bl.SWEEP_M_D3_K3, abs=1e-12)


@pytest.mark.xfail(strict=True, reason="the sampled maximum still grows by about 7% from 200 to 400 samples")
def test_criterion_09_sweep_stability():
    with criterion(9, "pared sweep maximum stable within 5% under doubling",
                   "expected failure: 2.334 at 200 samples, 2.503 at 400"):
        m200, _, _ = bl.pared_sweep(3, 3.0, 200, seed=0)
        m400, _, _ = bl.pared_sweep(3, 3.0, 400, seed=0)
        assert m200 == pytest.approx(bl.SWEEP_M_D3_K3, abs=1e-12)
        assert abs(m400 / m200 - 1) <= 0.05


def test_criterion_10_realization_round_trip():
    with criterion(10, "realize, verify and extract round trip for every pointed tree with d <= 4"):
        n = 0
        for d in (2, 3, 4):
            for P in rt.enumerate_pointed(d):
                F = dg.realize(P)
                V = dg.verify(F.embedded, F)
                assert V.passed, (d, V.lines())
                for row in V.crit_counts.values():
                    assert all(c == want for c, want in row.values())
                assert all(abs(k / dt - 1) <= 0.05 for k, dt in V.slopes.values())
                E = dg.extract_tree(F)
                assert dg.pointed_code(E.tree) == dg.pointed_code(P)
                n += 1
        assert n == sum(len(rt.enumerate_pointed(d)) for d in (2, 3, 4))


def test_criterion_11_parabolic_real_family():
    with criterion(11, "parabolic real family: fixed points 0, +-1, symmetry, multiplier -> 1"):
        T = next(t for t in rt.enumerate_trees(3) if len(t.branch_points) == 2)
        P = rt.extend_on_edge(T, *T.branch_points)
        F = dg.realize_parabolic_real(P)
        mus = []
        for t in F.grid:
            with mpmath.workdps(F.dps(t)):
                f = F.at(t)
                one = mpmath.mpc(1)
                assert abs(f(mpmath.mpc(0))) < 1e-10
                assert abs(f(one) - one) < 1e-10 and abs(f(-one) + one) < 1e-10
                for z in (mpmath.mpc(0.3, 0.2), mpmath.mpc(-0.6, -0.1)):
                    assert f(mpmath.conj(z)) == mpmath.conj(f(z))
                mus.append(float(dg.parabolic_multiplier(f, t)[0]))
        assert all(b < a for a, b in zip(mus, mus[1:])) and mus[-1] - 1 < 1e-3


def test_criterion_12_monodromy():
    with criterion(12, "rotation loop cycle, loop and reverse cancel, homomorphism on 10 pairs"):
        import cmath
        for d in (2, 3, 4):
            seeds = mono.seed_periodic_points(d)
            loop = mono.rotation_loop(d)
            A = mono.trace(loop, seeds)
            n = d + 1
            assert A.permutation == tuple((j - 1) % n for j in range(n))
            want = mono.rotation_loop_positions(d, 2 * math.pi, seeds)
            assert max(abs(mono._wrap(a - b)) for a, b in zip(A.final, want)) < 1e-10
            C = mono.compose(A, mono.trace(mono.reverse(loop), A.final))
            assert C.permutation == tuple(range(n)) and C.braid == []
        rng = random.Random(12)

        def leg(start, turns, k=12):
            end = [bl.random_zero(rng, 0.45) for _ in range(2)]
            out = [start]
            for i in range(1, k + 1):
                u = i / k
                zs = [(1 - u) * a + u * b for a, b in zip(start.a, end)]
                out.append(bl.AntiBlaschke.from_zeros(zs, start.phase * cmath.exp(2j * math.pi * turns * u)))
            return out

        for _ in range(10):
            a = leg(bl.AntiBlaschke.from_zeros([bl.random_zero(rng, 0.45) for _ in range(2)]),
                    rng.choice([0, 1, 0.5]))
            b = leg(a[-1], rng.choice([0, -1, 1]))
            TA = mono.trace(a)
            TB = mono.trace(b, TA.final)
            whole = mono.trace(a + b[1:], TA.initial)
            AB = mono.compose(TA, TB)
            assert (AB.permutation, AB.braid) == (whole.permutation, whole.braid)
            R = mono.trace(mono.reverse(a), TA.final)
            assert R.permutation == mono.invert_permutation(TA.permutation)
            assert R.braid == mono.free_reduce(mono.invert_word(TA.braid))


def test_criterion_13_hyperbolic_inequalities():
    with criterion(13, "radial comparison and single factor grids have no violations"):
        assert hd.he_grid_violations() == []
        assert bl.em_grid_violations() == []
