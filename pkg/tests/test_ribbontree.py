from __future__ import annotations

import pytest
from hypothesis import given, strategies as st

from oracles import polygon_dissections
from paredlab import ribbontree as rt
from paredlab.errors import Irreducible, ValidationError


def test_tree_counts_against_dissections():
    for d in range(2, 7):
        assert len(rt.enumerate_trees(d)) == len(polygon_dissections(d + 1))


def test_pointed_counts_against_dissections():
    # a dissection with k diagonals has k + 1 regions, one per branch point
    for d in range(2, 6):
        want = sum(len(s) + 1 for s in polygon_dissections(d + 1))
        assert len(rt.enumerate_pointed(d)) == want


def test_tripod_and_d3_trees():
    (t,) = rt.enumerate_trees(2)
    assert len(t.branch_points) == 1 and t.valence(t.branch_points[0]) == 3
    shapes = sorted(len(T.branch_points) for T in rt.enumerate_trees(3))
    assert shapes == [1, 2, 2]


@pytest.mark.parametrize("d", [2, 3, 4, 5, 6])
def test_tree_invariants(d):
    codes = set()
    for T in rt.enumerate_trees(d):
        assert len(T.ends) == d + 1
        assert sum(T.valence(v) - 2 for v in T.branch_points) == d - 1
        assert all(T.valence(v) != 2 for v in T.vertices)
        codes.add(T.code())
    assert len(codes) == len(rt.enumerate_trees(d))


def test_invalid_tree_rejected():
    with pytest.raises(ValidationError):
        rt.RibbonTree({0: [1, 2], 1: [0], 2: [0]}, 1, 1)
    with pytest.raises(ValidationError):
        rt.RibbonTree({0: [1, 2, 3], 1: [0], 2: [0], 3: [0]}, 1, 3)


def test_star_irreducible():
    with pytest.raises(Irreducible):
        rt.reduce(rt.PointedMetricTree(rt.star(4), 0))


def test_reduce_two_branch_tree():
    T = next(T for T in rt.enumerate_trees(3) if len(T.branch_points) == 2)
    p = next(v for v in T.branch_points if T.marked_end in T.adj[v])
    R, data = rt.reduce(rt.PointedMetricTree(T, p))
    assert R.d == 2 and len(R.base.branch_points) == 1
    assert data.w != p and not data.kept
    assert R.base.marked_end == T.marked_end


@pytest.mark.parametrize("d", [3, 4, 5])
def test_reduce_reglue_round_trip(d):
    for P in rt.enumerate_pointed(d):
        if len(P.base.core) < 2:
            continue
        R, data = rt.reduce(P)
        assert R.d == d - 1 and R.base.marked_end == P.base.marked_end
        assert rt.pointed_isomorphic(rt.reglue(R, data), P)


def test_dilate():
    T = next(T for T in rt.enumerate_trees(3) if len(T.branch_points) == 2)
    P = rt.PointedMetricTree(T, T.branch_points[0])
    u, v = T.branch_points
    assert rt.dilate(P, 1)[(u, v)] == 1.0
    assert rt.dilate(P, 2)[(u, v)] == 2.0
    e = T.ends[0]
    assert rt.dilate(P, 2)[(e, u)] is rt.INF
    with pytest.raises(ValidationError):
        rt.dilate(P, 0)


def test_extended_tree():
    T = rt.star(2)
    P = rt.extend_on_edge(T, 0, 2)
    assert P.extended and P.base.valence(P.special) == 2
    assert rt.PointedMetricTree.from_json(P.to_json()).code() == P.code()


@given(st.integers(2, 5), st.data())
def test_json_round_trip(d, data):
    trees = rt.enumerate_pointed(d)
    P = data.draw(st.sampled_from(trees))
    Q = rt.PointedMetricTree.from_json(P.to_json())
    assert rt.pointed_isomorphic(P, Q)


def test_enumeration_deterministic():
    a = [T.code() for T in rt.enumerate_trees(5)]
    b = [T.code() for T in rt.enumerate_trees(5)]
    assert a == b
