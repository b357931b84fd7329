import random
from itertools import combinations

import networkx as nx
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from racg.graph_core import SimplicialGraph
from racg.polygon import (FEIT_HIGMAN, PolygonError, catalog_build, check_axioms, enumerate_apartments,
                          intersection_is_path, verify_polygon)

from conftest import cycle_graph, from_nx, random_connected_bipartite, to_nx

# frozen from networkx: sum(1 for c in nx.simple_cycles(G, length_bound=2m) if len(c) == 2m)
HEAWOOD_APARTMENTS = 28
TUTTE_COXETER_APARTMENTS = 90


def nx_cycle_count(g, length):
    return sum(1 for c in nx.simple_cycles(to_nx(g), length_bound=length) if len(c) == length)


@pytest.fixture(scope="module")
def heawood_apartments(heawood):
    return enumerate_apartments(heawood, 3)


def test_heawood_report(heawood):
    rep = verify_polygon(heawood)
    assert (rep.is_generalized_polygon, rep.m, rep.thick, rep.r, rep.b) == (True, 3, True, 2, 2)
    assert (rep.girth, rep.diameter, rep.mode) == (6, 3, "direct")
    assert rep.direct_check and rep.metric_criterion and rep.feit_higman_consistent
    assert rep.verifier_error is None


def test_tutte_coxeter_report(tutte_coxeter):
    rep = verify_polygon(tutte_coxeter)
    assert (rep.is_generalized_polygon, rep.m, rep.thick, rep.r, rep.b) == (True, 4, True, 2, 2)
    assert (rep.girth, rep.diameter) == (8, 4)


def test_k34_report(k34):
    rep = verify_polygon(k34)
    assert (rep.is_generalized_polygon, rep.m, rep.r, rep.b) == (True, 2, 2, 3)


def test_c6_is_thin_hexagon_of_triangles():
    rep = verify_polygon(cycle_graph(6))
    assert rep.is_generalized_polygon and rep.m == 3 and not rep.thick
    assert rep.feit_higman_consistent is None


def test_petersen_rejected():
    rep = verify_polygon(from_nx(nx.petersen_graph()))
    assert not rep.is_generalized_polygon and not rep.bipartite
    assert rep.mode == "bipartite-check"
    cycle = rep.axiom_failures[0]["odd_cycle"]
    assert len(cycle) % 2 == 1


def test_tree_fails_axiom_one():
    path = SimplicialGraph.from_edges(["a", "b", "c"], [("a", "b"), ("b", "c")])
    rep = verify_polygon(path)
    assert not rep.is_generalized_polygon
    assert rep.axiom_failures[0]["axiom"] == 1


def test_c8_with_chord_fails_axioms():
    g = cycle_graph(8)
    g = SimplicialGraph.from_edges(g.vertices, g.edge_list() + [("v1", "v6")])
    rep = verify_polygon(g)
    assert not rep.is_generalized_polygon
    assert rep.axiom_failures and rep.verifier_error is None


@pytest.mark.parametrize("g", [SimplicialGraph.from_edges(["a"], []),
                               SimplicialGraph.from_edges(["a", "b", "c", "d"], [("a", "b"), ("c", "d")])],
                         ids=["edgeless", "disconnected"])
def test_precondition_errors(g):
    with pytest.raises(PolygonError):
        verify_polygon(g)


def test_metric_only_above_threshold(heawood):
    rep = verify_polygon(heawood, max_direct_check=10)
    assert rep.mode == "metric-only" and rep.direct_check is None and rep.is_generalized_polygon


# -- apartments ------------------------------------------------------------------

def test_apartment_counts(heawood, tutte_coxeter, heawood_apartments):
    assert len(enumerate_apartments(cycle_graph(6), 3)) == 1
    assert len(heawood_apartments) == HEAWOOD_APARTMENTS == nx_cycle_count(heawood, 6)
    assert enumerate_apartments(heawood, 2) == []
    assert len(enumerate_apartments(tutte_coxeter, 4)) == TUTTE_COXETER_APARTMENTS == nx_cycle_count(tutte_coxeter, 8)


def test_apartments_canonical_and_valid(heawood, heawood_apartments):
    order = heawood.index
    for a in heawood_apartments:
        vs = a.vertices
        assert len(set(vs)) == 6
        assert all(heawood.has_edge(vs[i], vs[(i + 1) % 6]) for i in range(6))
        assert order[vs[0]] == min(order[v] for v in vs)
        assert order[vs[1]] < order[vs[-1]]
    assert heawood_apartments == sorted(heawood_apartments, key=lambda a: [order[v] for v in a.vertices])


def test_axiom_one_exhaustive_on_heawood(heawood, heawood_apartments):
    cover = [a.edges() for a in heawood_apartments]
    for e, f in combinations([frozenset(e) for e in heawood.edge_list()], 2):
        assert any(e in c and f in c for c in cover)


@pytest.mark.parametrize("name, kw, m", [
    ("projective_plane", {"q": 2}, 3),
    ("symplectic_quadrangle", {"q": 2}, 4),
    ("complete_bipartite", {"sizes": (3, 4)}, 2),
])
def test_apartments_sharing_an_edge_meet_in_a_path(name, kw, m):
    g = catalog_build(name, **kw)
    aps = enumerate_apartments(g, m)
    for a1, a2 in combinations(aps, 2):
        if a1.edges() & a2.edges():
            assert intersection_is_path(a1, a2)
    assert check_axioms(g, m, aps) == []


# -- catalog -----------------------------------------------------------------------

@pytest.mark.parametrize("name, q, counts, m", [
    ("projective_plane", 2, (14, 21), 3),
    ("projective_plane", 3, (26, 52), 3),
    ("projective_plane", 4, (42, 105), 3),
    ("symplectic_quadrangle", 2, (30, 45), 4),
    ("symplectic_quadrangle", 3, (80, 160), 4),
])
def test_catalog_parameters(name, q, counts, m):
    g = catalog_build(name, q=q)
    assert (g.n, len(g.edges)) == counts
    rep = verify_polygon(g)
    assert rep.is_generalized_polygon and rep.m == m and rep.r == rep.b == q
    h = to_nx(g)
    assert (nx.girth(h), nx.diameter(h)) == (2 * m, m)
    if rep.mode == "direct":
        assert rep.direct_check == rep.metric_criterion
    reds = [v for v, c in g.colors.items() if c == "red"]
    assert len(reds) == g.n // 2


def test_heawood_matches_networkx(heawood):
    assert nx.is_isomorphic(to_nx(heawood), nx.heawood_graph())


def test_catalog_errors(tmp_path):
    with pytest.raises(PolygonError):
        catalog_build("projective_plane", q=5)
    with pytest.raises(PolygonError):
        catalog_build("symplectic_quadrangle", q=4)
    with pytest.raises(PolygonError):
        catalog_build("hexagon", q=2)
    with pytest.raises(PolygonError):
        catalog_build("complete_bipartite", sizes=(0, 3))


def test_catalog_cache(tmp_path, monkeypatch):
    monkeypatch.setenv("CACHE_DIR", str(tmp_path))
    g = catalog_build("complete_bipartite", sizes=(2, 3))
    assert (tmp_path / "racg-catalog" / "complete_bipartite-2x3.json").exists()
    again = catalog_build("complete_bipartite", sizes=(2, 3))
    assert again == g and dict(again.colors) == dict(g.colors)


# -- Feit-Higman ---------------------------------------------------------------------

@given(st.integers(0, 2**32 - 1))
@settings(max_examples=60, deadline=None)
def test_feit_higman_gate(seed):
    g = random_connected_bipartite(random.Random(seed))
    rep = verify_polygon(g)
    assert rep.verifier_error is None
    if rep.is_generalized_polygon:
        assert rep.girth == 2 * rep.m and rep.diameter == rep.m
        if rep.thick:
            assert rep.m in FEIT_HIGMAN
        if rep.m % 2 == 1 and rep.thick:
            assert rep.r == rep.b
