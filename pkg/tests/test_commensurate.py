import itertools
import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from racg.commensurate import (CommensurationError, build_gamma_prime, canonical_conjugate,
                               expected_vertex_count, factor_kernel_element, factors_product,
                               identity_holds, h_map, join_names, verify_commensuration)
from racg.coxeter_words import CliqueSelection, g_of_epsilon, normal_form, retraction_phi
from racg.graph_core import GraphError, SimplicialGraph, graph_isomorphism

from conftest import cycle_graph

GOLDEN_VERTICES = {"v3", "v4", "v5", "v1v3v1", "v1v4v1", "v2v4v2", "v2v5v2", "v1v2v4v1v2"}
IDENTITIES = [("v3", "v2 v3 v2"), ("v2 v5 v2", "v1 v2 v5 v1 v2"),
           ("v1 v3 v1", "v1 v2 v3 v1 v2"), ("v5", "v1 v5 v1")]


@pytest.fixture(scope="module")
def c5_clique(c5):
    return CliqueSelection(c5, ("v1", "v2"))


@pytest.fixture(scope="module")
def golden(c5, c5_clique):
    return build_gamma_prime(c5, c5_clique, debug=True)


# -- the golden example -----------------------------------------------------------

def test_golden_vertices_and_shape(golden):
    assert set(golden.graph.vertices) == GOLDEN_VERTICES
    assert graph_isomorphism(golden.graph, cycle_graph(8, "c")) is not None


@pytest.mark.parametrize("left, right", IDENTITIES)
def test_golden_identities(c5, left, right):
    assert identity_holds(c5, left, right)


def test_misprinted_identity_fails(c5):
    assert not identity_holds(c5, "v2 v5 v2", "v1 v2 v5 v1 v2 v5")


def test_provenance_is_reduced(golden):
    for name, g in golden.generators.items():
        word = golden.provenance[name]
        assert len(word) == len(g.letters)
        assert h_map(golden, [name]) == word
        assert word.compact() == name


@pytest.mark.parametrize("v, eps, name", [
    ("v3", (0, 1), "v3"),
    ("v4", (1, 1), "v1v2v4v1v2"),
    ("v5", (1, 0), "v5"),
    ("v4", (0, 1), "v2v4v2"),
])
def test_canonical_conjugate(c5, c5_clique, v, eps, name):
    cg = canonical_conjugate(c5, c5_clique, v, eps)
    assert cg.name == name
    raw = [c for c, x in zip(c5_clique.members, eps) if x]
    assert normal_form(c5, raw + [v] + raw) == normal_form(c5, cg.letters)


def test_canonical_conjugate_errors(c5, c5_clique):
    with pytest.raises(CommensurationError):
        canonical_conjugate(c5, c5_clique, "v1", (0, 0))
    with pytest.raises(GraphError):
        canonical_conjugate(c5, c5_clique, "v9", (0, 0))
    with pytest.raises(CommensurationError):
        canonical_conjugate(c5, c5_clique, "v3", (0, 1, 1))


def test_vertex_count(c5, c5_clique, golden):
    assert expected_vertex_count(c5, c5_clique) == 2 + 4 + 2 == golden.graph.n


def test_single_vertex_clique_on_a_square():
    c4 = cycle_graph(4)
    k = CliqueSelection(c4, ("v1",))
    gp = build_gamma_prime(c4, k, debug=True)
    # v2 and v4 commute with v1; v3 does not
    assert expected_vertex_count(c4, k) == 1 + 2 + 1 == gp.graph.n
    assert set(gp.graph.vertices) == {"v2", "v3", "v1v3v1", "v4"}


# -- H ------------------------------------------------------------------------------

def test_h_examples(c5, c5_clique, golden):
    assert h_map(golden, ["v3", "v3"]).is_identity()
    assert golden.graph.has_edge("v3", "v2v4v2")
    x = h_map(golden, ["v3", "v2v4v2"])
    assert (x * x).is_identity()
    y = h_map(golden, "v4")
    assert y.word == ("v4",) and retraction_phi(c5_clique, y).is_identity()
    with pytest.raises(CommensurationError):
        h_map(golden, ["v1"])


def test_h_sends_edges_to_commuting_pairs(golden):
    for a, b in golden.graph.edge_list():
        x = h_map(golden, [a, b])
        assert (x * x).is_identity()


# -- rewriting kernel elements --------------------------------------------------------

def test_sample_factorization(c5, c5_clique):
    raw = "v1 v3 v2 v4 v2 v3 v1"
    fs = factor_kernel_element(c5, c5_clique, raw)
    assert [f.name for f in fs] == ["v1v3v1", "v1v2v4v1v2", "v1v3v1"]
    assert factors_product(c5, fs) == normal_form(c5, raw)
    # v3 commutes with v2 and v4, so the reduced element is a single conjugate
    reduced = factor_kernel_element(c5, c5_clique, normal_form(c5, raw))
    assert [f.name for f in reduced] == ["v1v2v4v1v2"]


def test_factorization_rejects_non_kernel(c5, c5_clique):
    with pytest.raises(CommensurationError):
        factor_kernel_element(c5, c5_clique, "v1 v3")


@given(st.lists(st.sampled_from(["v1", "v2", "v3", "v4", "v5"]), max_size=14))
def test_factorization_property(word):
    c5 = cycle_graph(5)
    k = CliqueSelection(c5, ("v1", "v2"))
    word = word + [x for x in ("v1", "v2") if word.count(x) % 2]
    fs = factor_kernel_element(c5, k, word)
    assert factors_product(c5, fs) == normal_form(c5, word)


# -- verification ------------------------------------------------------------------------

def test_verify_small_radii(c5, c5_clique, golden):
    rep = verify_commensuration(c5, c5_clique, radius_inj=3, radius_gen=5, gp=golden)
    assert rep.ok and rep.index_ok
    assert rep.coset_representatives == ["e", "v2", "v1", "v1 v2"]
    assert all(s["verified"] for s in rep.sample_factorizations)
    doc = json.loads(rep.to_json())
    assert doc["index"] == 4 and doc["counterexamples"] == {}


def test_verify_radius_zero(c5, c5_clique):
    rep = verify_commensuration(c5, c5_clique, radius_inj=0, radius_gen=0)
    assert rep.ok and rep.elements_tested == 1 and rep.kernel_targets == 1


# -- general graphs --------------------------------------------------------------------

@st.composite
def graph_with_clique(draw):
    n = draw(st.integers(3, 7))
    names = [f"x{i}" for i in range(n)]
    pairs = list(itertools.combinations(names, 2))
    edges = set(draw(st.lists(st.sampled_from(pairs), unique=True)))
    size = draw(st.integers(1, min(3, n - 1)))
    clique = names[:size]
    edges |= set(itertools.combinations(clique, 2))
    return SimplicialGraph.from_edges(names, sorted(edges)), tuple(clique)


@given(graph_with_clique())
@settings(max_examples=40, deadline=None)
def test_edge_rule_against_existential_definition(data):
    """Brute force the defining condition with group-element equality."""
    gamma, members = data
    k = CliqueSelection(gamma, members)
    gp = build_gamma_prime(gamma, k, debug=True)
    conj = {}
    for v in gamma.vertices:
        if v in members:
            continue
        for eps in itertools.product((0, 1), repeat=k.k):
            raw = [c for c, x in zip(members, eps) if x]
            conj[(v, eps)] = normal_form(gamma, raw + [v] + raw)
    assert len(set(conj.values())) == gp.graph.n == expected_vertex_count(gamma, k)
    by_word = {w: n for n, w in gp.provenance.items()}
    for a, b in itertools.combinations(gp.graph.vertices, 2):
        u, v = gp.generators[a], gp.generators[b]
        expected = gamma.has_edge(u.base, v.base) and any(
            conj[(u.base, e)] == gp.provenance[a] and conj[(v.base, e)] == gp.provenance[b]
            for e in itertools.product((0, 1), repeat=k.k))
        assert gp.graph.has_edge(a, b) == expected
    # each copy Lambda_eps is the graph with the clique deleted
    lam = gamma.induced([v for v in gamma.vertices if v not in members])
    for eps in itertools.product((0, 1), repeat=k.k):
        image = {v: by_word[conj[(v, eps)]] for v in lam.vertices}
        for x, y in itertools.combinations(lam.vertices, 2):
            assert lam.has_edge(x, y) == gp.graph.has_edge(image[x], image[y])


def test_display_names():
    g = SimplicialGraph.from_edges(["a", "ab", "c"], [("a", "ab")])
    assert join_names(g, ["a", "c", "a"]) == "a.c.a"
    assert join_names(cycle_graph(5), ["v1", "v3", "v1"]) == "v1v3v1"
    assert join_names(g, []) == "e"


def test_export(golden):
    doc = golden.to_dict()
    assert len(doc["provenance"]) == 8
    assert doc["source"]["clique"] == ["v1", "v2"]
    assert g_of_epsilon(golden.source[1], (1, 1)).word == ("v1", "v2")
