import random

import pytest

from racg.classify import NOT_QI, OUT_OF_CLASS, QI, class_membership, qi_decide
from racg.graph_core import join_graphs
from racg.polygon import catalog_build

from conftest import cycle_graph, prefixed


def shuffled(g, seed, prefix="z"):
    rng = random.Random(seed)
    names = list(g.vertices)
    perm = names[:]
    rng.shuffle(perm)
    return g.relabel({a: prefix + b for a, b in zip(names, perm)})


@pytest.fixture(scope="module")
def hh(heawood):
    return join_graphs([prefixed(heawood, "A"), prefixed(heawood, "B")])


@pytest.fixture(scope="module")
def tc_join_h(heawood, tutte_coxeter):
    return join_graphs([prefixed(tutte_coxeter, "C"), prefixed(heawood, "D")])


def test_membership(heawood, heawood_join_tc):
    c = class_membership(heawood)
    assert c.in_class and len(c.factors) == 1 and c.factors[0].report.m == 3
    c2 = class_membership(heawood_join_tc)
    assert c2.in_class and sorted(f.report.m for f in c2.factors) == [3, 4]


@pytest.mark.parametrize("g, reason", [
    (cycle_graph(4), "graph has no edges"),
    (cycle_graph(6), "not thick"),
    (catalog_build("complete_bipartite", sizes=(3, 4)), "graph has no edges"),
    (cycle_graph(5), "not a generalized polygon"),
])
def test_out_of_class(g, reason):
    cert = class_membership(g)
    assert not cert.in_class
    assert any(f.reason and reason in f.reason for f in cert.factors)


def test_examples(heawood, tutte_coxeter, heawood_join_tc, tc_join_h, hh):
    d = qi_decide(heawood, shuffled(heawood, 1))
    assert d.verdict == QI and d.isomorphism.is_valid(heawood, shuffled(heawood, 1))
    d = qi_decide(heawood, tutte_coxeter)
    assert d.verdict == NOT_QI
    assert [x["m"] for x in d.certificate["first"]] == [3]
    assert [x["m"] for x in d.certificate["second"]] == [4]
    d = qi_decide(heawood_join_tc, tc_join_h)
    assert d.verdict == QI and d.isomorphism.is_valid(heawood_join_tc, tc_join_h)
    assert qi_decide(hh, heawood_join_tc).verdict == NOT_QI
    assert qi_decide(cycle_graph(4), cycle_graph(4)).verdict == OUT_OF_CLASS
    assert qi_decide(heawood, cycle_graph(4)).verdict == OUT_OF_CLASS


def test_factor_count_mismatch(heawood, hh):
    d = qi_decide(heawood, hh)
    assert d.verdict == NOT_QI and d.certificate["invariant"] == "factor count"


def test_reflexive_and_symmetric(heawood, tutte_coxeter, heawood_join_tc, tc_join_h, hh):
    graphs = [heawood, tutte_coxeter, heawood_join_tc, tc_join_h, hh]
    for g in graphs:
        assert qi_decide(g, g).verdict == QI
    for a in graphs:
        for b in graphs:
            ab, ba = qi_decide(a, b), qi_decide(b, a)
            assert ab.verdict == ba.verdict
            if ab.verdict == QI:
                inv = ab.isomorphism.inverse()
                assert inv.is_valid(b, a)


@pytest.mark.parametrize("seed", range(4))
def test_not_qi_survives_relabeling(heawood, tutte_coxeter, hh, heawood_join_tc, seed):
    for a, b in [(heawood, tutte_coxeter), (hh, heawood_join_tc)]:
        before = qi_decide(a, b)
        after = qi_decide(shuffled(a, seed, "p"), shuffled(b, seed + 100, "q"))
        assert before.verdict == after.verdict == NOT_QI
        assert before.certificate == after.certificate


def test_larger_catalog_pair():
    pg3 = catalog_build("projective_plane", q=3)
    d = qi_decide(pg3, shuffled(pg3, 9))
    assert d.verdict == QI
    assert qi_decide(pg3, catalog_build("projective_plane", q=2)).verdict == NOT_QI
    doc = d.to_dict()
    assert doc["verdict"] == "QI" and len(doc["isomorphism"]) == 26
