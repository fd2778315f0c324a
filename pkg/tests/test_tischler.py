from __future__ import annotations

import itertools
import random

import pytest

from oracles import hamiltonian_count
from paredlab import planegraph as pg
from paredlab import tischler as ti
from paredlab.errors import CyclicOrderViolation, EndCountMismatch, NotRealizable
from paredlab.ribbontree import enumerate_trees, star

C4 = pg.cycle_graph(4)
K4 = pg.k4()
C4C = pg.c4_chord()


def any_non_admissible(G):
    return any(not ti.is_admissible(E).admissible for E in ti.enumerate_enrichments(ti.tischler_of(G)))


def test_tischler_of_examples():
    for d in (2, 3, 4):
        T = ti.tischler_of(pg.cycle_graph(d + 1))
        assert T.graph.n == 2 and T.graph.num_edges == d + 1
        assert T.vertex_degrees == (d, d) and T.degree == 2 * d + 1
    T = ti.tischler_of(K4)
    assert pg.plane_isomorphic(T.graph, K4) is not None
    assert T.vertex_degrees == (2, 2, 2, 2)
    with pytest.raises(NotRealizable):
        ti.tischler_of(pg.path_graph(4))


@pytest.mark.parametrize("n", [4, 5])
def test_trivial_enrichment_is_base(n):
    for G in pg.enumerate_atlas(n):
        T = ti.tischler_of(G)
        E = ti.enrich(T, {})
        assert pg.plane_isomorphic(E.result, T.graph) is not None
        assert ti.is_admissible(E).admissible


def test_enrich_rejects_bad_blowups():
    T = ti.tischler_of(C4)
    with pytest.raises(EndCountMismatch):
        ti.enrich(T, {0: ti.Blowup(star(2), T.graph.darts_at(0)[0])})
    tree = next(t for t in enumerate_trees(3) if len(t.branch_points) == 2)
    darts = T.graph.darts_at(0)
    bad = {e: darts[i] for i, e in enumerate(reversed(tree.ends_ccw()))}
    with pytest.raises(CyclicOrderViolation):
        ti.enrich(T, {0: ti.Blowup(tree, darts[0], bad)})


def test_faces_preserved_on_random_enrichments():
    rng = random.Random(0)
    atlas = pg.enumerate_atlas(4) + pg.enumerate_atlas(5)
    for _ in range(50):
        G = rng.choice(atlas)
        T = ti.tischler_of(G)
        blow = {v: rng.choice(ti.blowup_options(T.graph, v)) for v in range(T.graph.n)}
        E = ti.enrich(T, blow)
        assert E.result.num_faces == T.graph.num_faces
        assert len(E.crossing) == T.graph.num_darts
        assert E.result.n - E.result.num_edges + E.result.num_faces == 2


def test_nsg_fixture_rejected_with_bigon():
    fx = ti.load_fixture("nsg")
    v = ti.is_admissible(fx["enrichment"])
    assert not v.admissible
    assert v.certificate["kind"] == "bigon" and not v.certificate["trivial"]


@pytest.mark.parametrize("n", [4, 5])
def test_non_admissible_iff_not_three_connected(n):
    for G in pg.enumerate_atlas(n):
        assert any_non_admissible(G) == (not pg.is_k_connected(G, 3))


@pytest.mark.parametrize("n", [4, 5])
def test_enriched_duals_dominate(n):
    for G in pg.enumerate_atlas(n):
        for E in ti.enumerate_enrichments(ti.tischler_of(G)):
            D = ti.enriched_dual(E)
            assert pg.is_pseudo_simple(D) or not ti.is_admissible(E).admissible
            if ti.is_admissible(E).admissible:
                assert D.is_simple()
                Gp, emb = ti.embedding_of_enrichment(G, E)
                assert pg.dominates(Gp, G)


def test_verdicts():
    assert str(ti.boundedness_verdict(K4)) == "Bounded"
    for G in (C4, C4C):
        v = ti.boundedness_verdict(G)
        assert str(v) == "Unbounded"
        assert not ti.is_admissible(v.witness).admissible
        assert v.cut is not None


@pytest.mark.parametrize("n", [4, 5, 6])
def test_verdict_matches_three_connectivity(n):
    for G in pg.enumerate_atlas(n):
        assert ti.boundedness_verdict(G).bounded == pg.is_k_connected(G, 3)


def test_bifurcation_examples():
    b = ti.bifurcates(C4, K4)
    assert b.bifurcates and b.double_cosets == 1
    assert not ti.bifurcates(K4, C4).bifurcates
    for G in (C4, C4C, K4):
        assert not ti.bifurcates(G, G).bifurcates


@pytest.mark.parametrize("n", [4, 5])
def test_embedding_enrichment_round_trip(n):
    atlas = pg.enumerate_atlas(n)
    for G, H in itertools.product(atlas, repeat=2):
        b = ti.bifurcates(G, H)
        if not b.bifurcates:
            continue
        reps = ti._double_coset_reps(G, H, b.embeddings)
        for e, E in zip(reps, b.enrichments):
            assert ti.is_admissible(E).admissible
            Hp, e2 = ti.embedding_of_enrichment(G, E)
            iso = pg.plane_isomorphic(Hp, H)
            assert iso is not None
            moved = pg.GraphEmbedding(e2.vertex_map, {}, tuple(iso[x] for x in e2.dart_map))
            assert ti.same_double_coset(G, H, moved, e)


def test_orbit_counting_consistency():
    for n in (4, 5):
        atlas = pg.enumerate_atlas(n)
        for G, H in itertools.product(atlas, repeat=2):
            embs = pg.embeddings(G, H)
            if not embs:
                continue
            reps = ti._double_coset_reps(G, H, embs)
            assert len(reps) == pg.count_double_cosets(G, H)


def test_k4_mating_report():
    rep = ti.shared_mating_report(K4)
    assert len(rep.cycles) == 3 and len(rep.orbits) == 1


def test_figure_fixtures():
    assert set(ti.fixture_names()) >= {"nsb", "nsg", "sb1a", "sb2"}
    sb1 = ti.load_fixture("sb1a")
    assert pg.count_double_cosets(sb1["gamma"], sb1["gamma_prime"]) == 2
    sb2 = ti.load_fixture("sb2")
    rep = ti.shared_mating_report(sb2["gamma_prime"])
    assert len(rep.orbits) == 2 and all(dec is not None for _, _, dec in rep.pairs)
    nsb = ti.load_fixture("nsb")
    H = nsb["gamma_prime"]
    assert len(pg.hamiltonian_cycles(H)) == hamiltonian_count(H.adjacency()) == 2
    rep = ti.shared_mating_report(H)
    assert len(rep.orbits) == 2 and all(dec is None for _, _, dec in rep.pairs)
    assert "no common arrow structure" in "\n".join(rep.lines())


def test_arrow_compatibility():
    sb1 = ti.load_fixture("sb1a")
    G, H = sb1["gamma"], sb1["gamma_prime"]
    for e in pg.embeddings(G, H):
        assert ti.arrow_compatible(ti.Diagram(G, H, e), sb1["arrows"])
    # all dots is compatible with the identity diagram, which has one chamber per face
    e = pg.embeddings(H, H)[0]
    dots = ti.ArrowedGraph(H, {f: ti.DOT for f in range(H.num_faces)})
    assert ti.arrow_compatible(ti.Diagram(H, H, e), dots)


def test_nsb_exhaustive_search_is_empty():
    nsb = ti.load_fixture("nsb")
    H = nsb["gamma_prime"]
    d1, d2 = (ti.cycle_diagram(H, o[0]) for o in ti.cycle_orbits(H))
    both = [s for s in ti.compatible_structures(d1)
            if ti.arrow_compatible(d2, ti.ArrowedGraph(H, s))]
    assert both == []
