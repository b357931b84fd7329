"""Quasi-isometry decisions for joins of thick generalized polygons.

Within this class two groups are quasi-isometric exactly when their defining
graphs are isomorphic, which for joins means the factor lists match up to
reordering.  Outside the class nothing is claimed.
"""

from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass, field

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import maximum_bipartite_matching

from .graph_core import GraphIsomorphism, SimplicialGraph, graph_isomorphism, graph_to_dict, join_decompose
from .polygon import PolygonError, PolygonReport, verify_polygon

QI = "QI"
NOT_QI = "not-QI"
OUT_OF_CLASS = "out-of-class"


@dataclass(frozen=True, eq=False)
class FactorCheck:
    graph: SimplicialGraph
    report: PolygonReport | None
    ok: bool
    reason: str | None

    def invariant(self) -> tuple:
        r = self.report
        pair = tuple(sorted((r.r, r.b)))
        return (r.m, pair, r.num_vertices, tuple(sorted(r.degrees)))

    def to_dict(self) -> dict:
        return {"vertices": list(self.graph.vertices), "ok": self.ok, "reason": self.reason,
                "report": None if self.report is None else self.report.to_dict()}


@dataclass(frozen=True, eq=False)
class ClassCertificate:
    graph: SimplicialGraph
    factors: tuple[FactorCheck, ...]

    @property
    def in_class(self) -> bool:
        return all(f.ok for f in self.factors)

    def to_dict(self) -> dict:
        return {"schema_version": 1, "in_class": self.in_class,
                "factor_count": len(self.factors), "factors": [f.to_dict() for f in self.factors]}


def _check_factor(f: SimplicialGraph) -> FactorCheck:
    try:
        rep = verify_polygon(f)
    except PolygonError as exc:
        return FactorCheck(f, None, False, str(exc))
    if not rep.is_generalized_polygon:
        return FactorCheck(f, rep, False, "not a generalized polygon")
    if rep.m is None or rep.m < 3:
        return FactorCheck(f, rep, False, f"gonality {rep.m} is below 3")
    if not rep.thick:
        return FactorCheck(f, rep, False, "not thick")
    return FactorCheck(f, rep, True, None)


def class_membership(g: SimplicialGraph) -> ClassCertificate:
    if g.n == 0:
        return ClassCertificate(g, (FactorCheck(g, None, False, "empty graph"),))
    return ClassCertificate(g, tuple(_check_factor(f) for f in join_decompose(g)))


@dataclass(frozen=True, eq=False)
class QIDecision:
    verdict: str
    certificate: dict = field(default_factory=dict)
    isomorphism: GraphIsomorphism | None = None

    def to_dict(self) -> dict:
        out = {"schema_version": 1, "verdict": self.verdict, "certificate": self.certificate}
        if self.isomorphism is not None:
            out["isomorphism"] = dict(sorted(self.isomorphism.mapping.items()))
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


def _match(f1: list[FactorCheck], f2: list[FactorCheck]):
    """Maximum matching over factor pairs that pass the invariant filter and
    are isomorphic; returns the matching and the witnesses."""
    n1, n2 = len(f1), len(f2)
    witnesses: dict[tuple[int, int], GraphIsomorphism] = {}
    rows, cols = [], []
    for i, a in enumerate(f1):
        for j, b in enumerate(f2):
            if a.invariant() != b.invariant():
                continue
            iso = graph_isomorphism(a.graph, b.graph)
            if iso is not None:
                witnesses[(i, j)] = iso
                rows.append(i)
                cols.append(j)
    mat = csr_matrix((np.ones(len(rows), dtype=np.int8), (rows, cols)), shape=(n1, n2))
    match = maximum_bipartite_matching(mat, perm_type="column")
    return match, witnesses


def qi_decide(g1: SimplicialGraph, g2: SimplicialGraph) -> QIDecision:
    c1, c2 = class_membership(g1), class_membership(g2)
    if not (c1.in_class and c2.in_class):
        return QIDecision(OUT_OF_CLASS, {"first": c1.to_dict(), "second": c2.to_dict()})
    f1, f2 = list(c1.factors), list(c2.factors)
    if len(f1) != len(f2):
        return QIDecision(NOT_QI, {"invariant": "factor count", "first": len(f1), "second": len(f2)})
    inv1 = Counter(f.invariant() for f in f1)
    inv2 = Counter(f.invariant() for f in f2)
    if inv1 != inv2:
        def fmt(c):
            return sorted([{"m": k[0], "r_b": list(k[1]), "vertices": k[2], "count": n}
                           for k, n in c.items()], key=lambda d: (d["m"], d["r_b"], d["vertices"]))
        return QIDecision(NOT_QI, {"invariant": "factor (m, r, b, |V|) multiset",
                                   "first": fmt(inv1), "second": fmt(inv2)})
    match, witnesses = _match(f1, f2)
    if (match < 0).any():
        return QIDecision(NOT_QI, {"invariant": "isomorphism search failure",
                                   "unmatched": [i for i, j in enumerate(match) if j < 0]})
    mapping: dict[str, str] = {}
    pairs = []
    for i, j in enumerate(match):
        iso = witnesses[(i, int(j))]
        mapping.update(iso.mapping)
        pairs.append({"first": i, "second": int(j), "isomorphism": dict(sorted(iso.mapping.items()))})
    full = GraphIsomorphism(mapping)
    if not full.is_valid(g1, g2):
        raise AssertionError("factor witnesses do not assemble into an isomorphism")
    return QIDecision(QI, {"matching": pairs, "first": graph_to_dict(g1)["vertices"]}, full)
