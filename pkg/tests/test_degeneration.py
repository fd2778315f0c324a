from __future__ import annotations

import json

import mpmath
import pytest

from paredlab import blaschke as bl
from paredlab import degeneration as dg
from paredlab import hypdisk as hd
from paredlab import ribbontree as rt
from paredlab.errors import ValidationError


def tanh_family(grid=dg.DEFAULT_GRID):
    def sample(s):
        return bl.AntiBlaschke.from_zeros([mpmath.mpc(mpmath.tanh(mpmath.mpf(s) / 2))])
    return dg.Family(sample, 2, grid, {"dps": {float(s): 40 for s in grid}, "kind": "tanh"})


def extended_trees(d):
    out = []
    seen = set()
    for T in rt.enumerate_trees(d):
        for u in T.core:
            for v in T.adj[u]:
                if T.valence(v) > 1 and v < u:
                    continue
                P = rt.extend_on_edge(T, u, v)
                if dg.pointed_code(P) not in seen:
                    seen.add(dg.pointed_code(P))
                    out.append(P)
    return out


def two_branch_tree():
    T = next(t for t in rt.enumerate_trees(3) if len(t.branch_points) == 2)
    return rt.PointedMetricTree(T, T.branch_points[0])


def parabolic_tree():
    T = next(t for t in rt.enumerate_trees(3) if len(t.branch_points) == 2)
    u, v = T.branch_points
    return rt.extend_on_edge(T, u, v)


def test_family_validation():
    f = bl.AntiBlaschke.monomial(2)
    with pytest.raises(ValidationError):
        dg.Family(lambda s: f, 2, (1, 2))
    with pytest.raises(ValidationError):
        dg.Family(lambda s: f, 2, (1, 2, 4))
    with pytest.raises(ValidationError):
        dg.Family(lambda s: f, 2, (1, 8, 4))


def test_constant_family():
    F = dg.constant_family(3)
    rep = dg.cluster_critical_points(F)
    assert rep.degrees == [3] and rep.active == [False]
    E = dg.extract_tree(F)
    assert rt.isomorphic(E.tree.base, rt.star(3))
    assert E.tree.special == E.tree.base.branch_points[0]
    assert abs(complex(E.placement[F.grid[-1]][E.tree.special])) < 1e-12
    assert dg.verify(E, F).passed
    for s in F.grid:
        c = E.placement[s][E.tree.special]
        assert hd.dist(c, F.at(s)(c)) == 0


def test_star_realizes_as_monomial():
    P = rt.PointedMetricTree(rt.star(3), 0)
    F = dg.realize(P)
    for s in F.grid:
        f = F.at(s)
        assert all(abs(complex(a)) < 1e-12 for a in f.a) and abs(complex(f.phase) - 1) < 1e-12


def test_tanh_family_cluster():
    F = tanh_family()
    rep = dg.cluster_critical_points(F)
    assert rep.degrees == [2] and rep.active == [True]
    for s in F.grid:
        with mpmath.workdps(40):
            a = mpmath.tanh(mpmath.mpf(s) / 2)
            want = (1 - mpmath.sqrt(1 - a * a)) / a
            (c, m), = bl.critical_points(F.at(s))
            assert abs(c - want) < mpmath.mpf(10) ** -25
    E = dg.extract_tree(F)
    base = E.tree.base
    assert len(base.branch_points) == 1 and len(base.ends) == 3
    assert E.diagnostics["special_rule"] == "inserted" and E.tree.extended


def test_two_branch_separation_slope():
    F = dg.realize(two_branch_tree())
    V = dg.verify(F.embedded, F)
    assert V.passed
    (k, dt), = V.slopes.values()
    assert dt == 1.0 and abs(k - 1) <= 0.05
    rep = dg.cluster_critical_points(F)
    assert rep.degrees == [2, 2]


@pytest.mark.parametrize("d", [2, 3])
def test_round_trip_small(d):
    for P in rt.enumerate_pointed(d):
        F = dg.realize(P)
        V = dg.verify(F.embedded, F)
        assert V.passed, V.lines()
        E = dg.extract_tree(F)
        assert dg.pointed_code(E.tree) == dg.pointed_code(P)
        for v, deg in E.diagnostics["cluster_degrees"].items():
            assert deg + 1 == E.tree.base.valence(v)


@pytest.mark.parametrize("d", [2, 3])
def test_extended_round_trip(d):
    for P in extended_trees(d):
        F = dg.realize_extended(P)
        assert dg.verify(F.embedded, F).passed
        E = dg.extract_tree(F)
        assert dg.pointed_code(E.tree) == dg.pointed_code(P)
        assert E.tree.extended


def test_realize_rejects_wrong_kind():
    with pytest.raises(ValidationError):
        dg.realize(rt.extend_on_edge(rt.star(2), 0, 1))
    with pytest.raises(ValidationError):
        dg.realize_extended(rt.PointedMetricTree(rt.star(2), 0))


def test_quasi_isometry_contract():
    F = dg.realize(two_branch_tree())
    V = dg.verify(F.embedded, F)
    E = F.embedded
    u, v = E.tree.base.branch_points
    for s in F.grid:
        with mpmath.workdps(F.dps(s)):
            gap = float(hd.dist(E.placement[s][u], E.placement[s][v])) - s
        assert abs(gap) <= V.qi_deviation + 1e-12


def test_nudge_is_detected():
    P = two_branch_tree()
    F = dg.realize(P)
    V = dg.verify(F.embedded, F)
    assert V.passed
    bad = dg.nudge(F.embedded, F, P.base.branch_points[1], amount=2.0)
    W = dg.verify(bad, F, M=V.M + 0.1)
    assert not W.clauses["quasi-fixed"]


def test_critical_location_law():
    # k angle separated co-preimages at a vertex force k - 1 critical points nearby
    for P in rt.enumerate_pointed(3):
        F = dg.realize(P)
        V = dg.verify(F.embedded, F)
        for row in V.crit_counts.values():
            for v, (n, want) in row.items():
                assert n >= P.base.valence(v) - 2 == want


def test_family_json_round_trip():
    F = dg.realize(two_branch_tree())
    G = dg.Family.from_json(json.loads(json.dumps(F.to_json())))
    for s in F.grid:
        with mpmath.workdps(F.dps(s)):
            a, b = F.at(s), G.at(s)
            assert max(abs(x - y) for x, y in zip(a.params, b.params)) < mpmath.mpf(10) ** (-(F.dps(s) - 5))
    assert dg.pointed_code(dg.extract_tree(G).tree) == dg.pointed_code(two_branch_tree())


def test_parabolic_family():
    F = dg.realize_parabolic_real(parabolic_tree())
    mus = []
    for t in F.grid:
        with mpmath.workdps(F.dps(t)):
            f = F.at(t)
            one = mpmath.mpc(1)
            assert abs(f(mpmath.mpc(0))) < 1e-10
            assert abs(f(one) - one) < 1e-10 and abs(f(-one) + one) < 1e-10
            assert all(abs(mpmath.im(a)) == 0 for a in f.a)
            for z in (mpmath.mpc(0.3, 0.2), mpmath.mpc(-0.5, 0.1), mpmath.mpc(0.1, -0.7)):
                assert f(mpmath.conj(z)) == mpmath.conj(f(z))
            # closed form for d = 3: zeros +-sqrt(c)
            r = mpmath.tanh(mpmath.mpf(t) / 2)
            c = (-(1 + r ** 4) + mpmath.sqrt((1 + r ** 4) ** 2 + 12 * r ** 4)) / (2 * r ** 2)
            got = sorted(mpmath.re(a) for a in f.a)
            assert abs(got[0] + mpmath.sqrt(c)) < 1e-20 and abs(got[1] - mpmath.sqrt(c)) < 1e-20
            mu, off = dg.parabolic_multiplier(f, t)
            mus.append(float(mu))
    assert all(b < a for a, b in zip(mus, mus[1:]))
    assert mus[-1] - 1 < 1e-3 and min(mus) >= 1


def test_parabolic_needs_odd_degree():
    T = next(t for t in rt.enumerate_trees(4) if len(t.branch_points) == 2
             and {t.valence(v) for v in t.branch_points} == {3, 4})
    u, v = T.branch_points
    with pytest.raises(ValidationError):
        dg.realize_parabolic_real(rt.extend_on_edge(T, u, v))
