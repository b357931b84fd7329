import json
import warnings

import networkx as nx
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from racg.coxeter_words import append_letter, normal_form, reflection_matrix
from racg.davis import (BudgetExceeded, ComplexError, build_davis_ball, build_PL, interior_vertices,
                        vertex_link)
from racg.graph_core import SimplicialGraph

from conftest import cycle_graph, to_nx

# sphere sizes, frozen from the clique growth-series oracle below
C5_SPHERES = (1, 5, 15, 40, 105)
HEAWOOD_SPHERES = (1, 14, 161, 1820, 20552, 232064)


def growth_series(g: SimplicialGraph, terms: int) -> list[int]:
    """Sphere sizes from 1/W(t) = sum over cliques s of (-t/(1+t))^|s|.

    Clearing denominators with d = clique number gives
    W(t) = (1+t)^d / sum_s (-t)^|s| (1+t)^(d-|s|), expanded as a power series.
    """
    sizes = [len(c) for c in nx.enumerate_all_cliques(to_nx(g))]
    d = max(sizes, default=0)
    binom = np.polynomial.polynomial

    def one_plus_t(k):
        return binom.polypow([1, 1], k) if k else np.array([1.0])

    den = np.zeros(d + 1)
    for k in [0] + sizes:
        term = binom.polymul(binom.polypow([0, -1], k) if k else [1.0], one_plus_t(d - k))
        den[:len(term)] += term
    num = np.zeros(terms)
    top = one_plus_t(d)
    num[:min(terms, len(top))] = top[:terms]
    out = []
    for n in range(terms):
        acc = num[n] - sum(den[j] * out[n - j] for j in range(1, min(n, d) + 1))
        out.append(int(round(acc / den[0])))
    return out


def matrix_spheres(g: SimplicialGraph, radius: int) -> list[int]:
    """Cayley-graph BFS keyed by Tits matrices (no normal forms involved)."""
    start = reflection_matrix(g, []).tobytes()
    seen = {start}
    layer = [[]]
    sizes = [1]
    for _ in range(radius):
        nxt = []
        for w in layer:
            for v in g.vertices:
                key = reflection_matrix(g, w + [v]).tobytes()
                if key not in seen:
                    seen.add(key)
                    nxt.append(w + [v])
        sizes.append(len(nxt))
        layer = nxt
    return sizes


@pytest.fixture(scope="module")
def heawood_ball3(heawood):
    return build_davis_ball(heawood, 3)


def test_frozen_spheres_match_oracles(c5, heawood):
    assert tuple(growth_series(c5, 5)) == C5_SPHERES
    assert tuple(growth_series(heawood, 6)) == HEAWOOD_SPHERES
    assert tuple(matrix_spheres(c5, 4)) == C5_SPHERES
    assert tuple(matrix_spheres(heawood, 2)) == HEAWOOD_SPHERES[:3]


# -- P_L ------------------------------------------------------------------------

@pytest.mark.parametrize("fixture, counts", [("c5", (32, 80, 40)), ("heawood", (16384, 114688, 86016))])
def test_pl_counts(request, fixture, counts):
    cx = build_PL(request.getfixturevalue(fixture))
    assert (cx.num_vertices, cx.num_edges, cx.num_squares) == counts


def test_pl_single_vertex():
    cx = build_PL(SimplicialGraph.from_edges(["a"], []))
    assert (cx.num_vertices, cx.num_edges, cx.num_squares) == (2, 1, 0)


@st.composite
def small_graphs(draw, max_n=10, triangle_free=True):
    n = draw(st.integers(1, max_n))
    names = [f"x{i}" for i in range(n)]
    pairs = [(names[i], names[j]) for i in range(n) for j in range(i + 1, n)]
    chosen = draw(st.lists(st.sampled_from(pairs), unique=True, max_size=2 * n)) if pairs else []
    g = SimplicialGraph.from_edges(names, chosen)
    if triangle_free:
        h = to_nx(g)
        while sum(nx.triangles(h).values()):
            tri = next(c for c in nx.enumerate_all_cliques(h) if len(c) == 3)
            h.remove_edge(tri[0], tri[1])
        g = SimplicialGraph.from_edges(names, list(h.edges))
    return g


@given(small_graphs())
@settings(max_examples=30, deadline=None)
def test_pl_count_formulas_and_tags(g):
    cx = build_PL(g)
    n, e = g.n, len(g.edges)
    assert cx.num_vertices == 2 ** n
    assert cx.num_edges == n * 2 ** (n - 1)
    assert cx.num_squares == (e * 2 ** (n - 2) if n >= 2 else 0)
    for k in range(cx.num_edges):
        u, v, s = cx.edge(k)
        assert u ^ v == 1 << s
    for sq in cx.squares[:200]:
        s, t = sq.gens
        assert g.has_edge(g.vertices[s], g.vertices[t])
        assert [cx.edge(k)[2] for k in sq.edges] == [s, t, s, t]


def test_pl_links(c5):
    cx = build_PL(c5)
    for v in range(cx.num_vertices):
        link = vertex_link(cx, v)
        assert link.full and link.isomorphism is not None
        assert link.isomorphism.is_valid(link.graph, c5)


def test_pl_guard_and_triangles():
    big = cycle_graph(26)
    with pytest.raises(ComplexError):
        build_PL(big)
    k3 = SimplicialGraph.from_edges(["a", "b", "c"], [("a", "b"), ("b", "c"), ("a", "c")])
    with pytest.warns(UserWarning):
        build_PL(k3)


def test_pl_find_vertex(c5):
    cx = build_PL(c5)
    v = cx.find_vertex([-1, 1, 1, -1, 1])
    assert v == 0b01001 and cx.vertex_name(v) == "(-,+,+,-,+)"
    with pytest.raises(ComplexError):
        cx.find_vertex([1, 1])
    with pytest.raises(ComplexError):
        cx.element(0)


# -- Davis balls ----------------------------------------------------------------

def test_ball_radius_zero(heawood):
    cx = build_davis_ball(heawood, 0)
    assert (cx.num_vertices, cx.num_edges, cx.num_squares) == (1, 0, 0)


def test_ball_c5_small(c5):
    b1 = build_davis_ball(c5, 1)
    assert (b1.num_vertices, b1.num_edges, b1.num_squares) == (6, 5, 0)
    b2 = build_davis_ball(c5, 2)
    assert np.bincount(b2.depth).tolist() == [1, 5, 15]
    assert b2.num_squares == 5


@given(small_graphs(max_n=6, triangle_free=False), st.integers(0, 4))
@settings(max_examples=25, deadline=None)
def test_ball_spheres_match_growth_series(g, r):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        cx = build_davis_ball(g, r)
    assert np.bincount(cx.depth, minlength=r + 1).tolist() == growth_series(g, r + 1)


def test_ball_edges_and_squares(heawood_ball3, heawood):
    cx = heawood_ball3
    comm = heawood.adj_mask
    for k in range(cx.num_edges):
        u, v, s = cx.edge(k)
        assert append_letter(cx.keys[u], s, comm) == cx.keys[v]
    for sq in cx.squares:
        s, t = sq.gens
        assert [cx.edge(k)[2] for k in sq.edges] == [s, t, s, t]
        g0 = cx.keys[sq.vertices[0]]
        assert cx.keys[sq.vertices[2]] == append_letter(append_letter(g0, s, comm), t, comm)
    # a pair g, gs lies in the ball iff an edge joins them
    expected = sum(1 for w in cx.keys for s in range(heawood.n)
                   if len(append_letter(w, s, comm)) > len(w) and len(w) < cx.radius)
    assert cx.num_edges == expected


def test_ball_monotone(c5):
    small, big = build_davis_ball(c5, 3), build_davis_ball(c5, 4)
    assert big.keys[:small.num_vertices] == small.keys

    def edges(cx):
        return {(cx.keys[u], cx.keys[v], s) for u, v, s in map(cx.edge, range(cx.num_edges))}

    def squares(cx):
        return {frozenset(cx.keys[v] for v in sq.vertices) for sq in cx.squares}

    inside = set(small.keys)
    assert edges(small) == {e for e in edges(big) if e[0] in inside and e[1] in inside}
    assert squares(small) == {q for q in squares(big) if q <= inside}


def test_ball_links(heawood_ball3, heawood, c5):
    link = vertex_link(heawood_ball3, 0)
    assert link.isomorphism is not None and link.isomorphism.is_valid(link.graph, heawood)
    for v in interior_vertices(heawood_ball3):
        assert vertex_link(heawood_ball3, int(v)).isomorphism is not None
    rim = vertex_link(build_davis_ball(c5, 1), 1)
    assert rim.graph.n < c5.n and not rim.full


def test_links_one_step_from_the_rim_are_truncated(heawood_ball3, heawood):
    """At depth radius-1 every edge is present but some corners are not."""
    v = int(np.nonzero(heawood_ball3.depth == 2)[0][0])
    link = vertex_link(heawood_ball3, v)
    assert link.full and link.isomorphism is None
    assert len(link.graph.edges) < len(heawood.edges)


def test_ball_budget(heawood):
    with pytest.raises(BudgetExceeded) as err:
        build_davis_ball(heawood, 6, budget=1000)
    assert err.value.radius_reached == 2


def test_ball_errors_and_lookup(c5):
    with pytest.raises(ComplexError):
        build_davis_ball(c5, -1)
    cx = build_davis_ball(c5, 2)
    v = cx.find_vertex("v3 v1")
    assert cx.element(v) == normal_form(c5, "v3 v1")
    assert cx.find_vertex(normal_form(c5, "v2 v1")) == cx.find_vertex("v1 v2")
    with pytest.raises(ComplexError):
        cx.find_vertex("v1 v3 v5")
    with pytest.raises(ComplexError):
        vertex_link(cx, 10_000)


def test_export(c5):
    cx = build_davis_ball(c5, 2)
    doc = json.loads(cx.to_json())
    assert (len(doc["vertices"]), len(doc["edges"]), len(doc["squares"])) == (21, cx.num_edges, 5)
    assert doc["edges"][0]["color"] is None
    dot = cx.to_dot()
    assert dot.count(" -- ") == cx.num_edges and 'label="e"' in dot
