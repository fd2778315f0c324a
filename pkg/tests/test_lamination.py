from __future__ import annotations

import itertools
from fractions import Fraction as Fr

import pytest
from hypothesis import given, strategies as st

from oracles import on_circle_cross, pullback_matchings
from paredlab import lamination as lam
from paredlab import ribbontree as rt
from paredlab.errors import NotSimple, ValidationError

GEN = lam.Chord(Fr(1, 8), Fr(5, 8))


def brute_two_cycles(d):
    N = d * d - 1
    pts = [Fr(k, N) for k in range(N)]
    out = set()
    for x in pts:
        y = (-d * x) % 1
        if y != x and (-d * y) % 1 == x:
            out.add(tuple(sorted((x, y))))
    return out


def nonadjacent_pairs(d):
    n = d + 1
    return sum(1 for i, j in itertools.combinations(range(n), 2) if (j - i) % n not in (1, n - 1))


def test_m_minus_d():
    assert lam.m_minus_d(Fr(1, 8), 3) == Fr(5, 8)
    assert lam.m_minus_d(0, 4) == 0
    for d in range(2, 7):
        for k in range(d + 1):
            assert lam.m_minus_d(Fr(k, d + 1), d) == Fr(k, d + 1)
    with pytest.raises(ValidationError):
        lam.m_minus_d(0.25, 3)


def test_two_cycle_examples():
    assert [(c.a, c.b) for c in lam.two_cycles(3)] == [(Fr(1, 8), Fr(5, 8)), (Fr(3, 8), Fr(7, 8))]
    assert lam.two_cycles(2) == []
    assert len(lam.two_cycles(5)) == 9


@pytest.mark.parametrize("d", range(2, 9))
def test_two_cycle_law(d):
    got = lam.two_cycles(d)
    assert {(c.a, c.b) for c in got} == brute_two_cycles(d)
    assert len(got) == nonadjacent_pairs(d) == (d + 1) * (d - 2) // 2
    pieces = {frozenset((lam.piece_of(c.a, d), lam.piece_of(c.b, d))) for c in got}
    assert len(pieces) == len(got)


def test_depth_one_pullback():
    L = lam.generate([GEN], 3, 1)
    assert L.levels[0] == [GEN]
    assert L.levels[1] == [lam.Chord(Fr(7, 24), Fr(11, 24)), lam.Chord(Fr(19, 24), Fr(23, 24))]
    found = pullback_matchings((GEN.a, GEN.b), 3, [(GEN.a, GEN.b)], {(GEN.a, GEN.b)})
    assert len(found) == 1
    assert (Fr(1, 8), Fr(5, 8)) in found[0]
    assert (Fr(3, 24), Fr(7, 24)) not in found[0]


def test_depth_zero():
    assert lam.generate([GEN], 3, 0).leaves == [GEN]


def test_lamination_to_depth_six():
    L = lam.generate([GEN], 3, 6)
    pairs = [(c.a, c.b) for c in L.leaves]
    assert not any(on_circle_cross(p, q) for p, q in itertools.combinations(pairs, 2))
    assert lam.forward_invariance_violations(L) == []
    sizes = [len(lvl) for lvl in L.levels]
    assert sizes[0] == 1
    for a, b in zip(sizes[1:], sizes[2:]):
        assert b <= 3 * a
    # each pulled back leaf contributes d preimages, the generator one of them itself
    assert sizes[1] == 2 and all(sizes[k + 1] == 3 * sizes[k] for k in range(1, 6))


def test_pullback_uniqueness_against_oracle():
    L = lam.generate([GEN], 3, 3)
    existing = [(GEN.a, GEN.b)]
    for k in range(1, 4):
        for c in L.levels[k - 1]:
            found = pullback_matchings((c.a, c.b), 3, existing, {(GEN.a, GEN.b)})
            assert len(found) == 1
        existing += [(c.a, c.b) for c in L.levels[k]]


def test_dual_tree_examples():
    T = lam.dual_tree([GEN], 3)
    assert len(T.branch_points) == 2
    for v in T.branch_points:
        assert sum(1 for w in T.adj[v] if T.valence(w) == 1) == 2
    # the marked end (fixed point 0) shares its region with fixed point 3/4
    v0 = T.adj[T.marked_end][0]
    assert 3 in T.adj[v0]
    assert rt.isomorphic(lam.dual_tree([], 4), rt.star(4))
    with pytest.raises(NotSimple):
        lam.dual_tree(lam.two_cycles(3), 3)


@pytest.mark.parametrize("d", [2, 3, 4])
def test_dual_round_trip(d):
    for T in rt.enumerate_trees(d):
        assert rt.isomorphic(lam.dual_tree(lam.dual_lamination(T), d), T)


def test_quotient_classes():
    L = [GEN]
    assert lam.quotient_classes(L, [GEN.a, GEN.b]) == [frozenset({GEN.a, GEN.b})]
    c2 = lam.Chord(Fr(7, 24), Fr(11, 24))
    angs = [GEN.a, GEN.b, c2.a, c2.b]
    assert len(lam.quotient_classes([GEN, c2], angs)) == 2


def test_quotient_refines_monotonically():
    angs = sorted({x for c in lam.generate([GEN], 3, 4).leaves for x in (c.a, c.b)})
    prev = None
    for k in range(5):
        classes = lam.quotient_classes(lam.generate([GEN], 3, k), angs)
        if prev is not None:
            for cls in prev:
                assert any(cls <= c for c in classes)
        prev = classes


def test_svg_has_one_path_per_leaf():
    L = lam.generate([GEN], 3, 2)
    svg = lam.to_svg(L)
    assert svg.count("<path") == len(L.leaves)


@given(st.integers(3, 6), st.data())
def test_generated_laminations_invariant(d, data):
    gen = data.draw(st.sampled_from(lam.two_cycles(d)))
    L = lam.generate([gen], d, 2)
    assert lam.crossing_pairs(L.leaves) == []
    assert lam.forward_invariance_violations(L) == []
