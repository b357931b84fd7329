"""Square complexes: the compact complex P_L and finite balls of the Davis complex.

Both kinds share one representation.  Vertices are integer ids; ``nbr[v, s]``
is the vertex reached from ``v`` along generator ``s`` (``-1`` when that
edge is not in the complex).  For P_L a vertex is a sign vector stored as a
bitmask (bit ``i`` set means coordinate ``i`` is -1), so the all-ones vertex
is id 0.  For a ball a vertex is a canonical word, ids follow shortlex order,
and the identity is id 0.

A square is a coset ``{g, gu, guv, gv}`` for an edge ``(u, v)`` of the
defining graph; ``corner_square[v, k]`` gives the square at ``v`` spanned by
the ``k``-th graph edge.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass
from functools import cached_property
from typing import Hashable, Sequence

import numpy as np

from .coxeter_words import GroupElement, append_letter, right_descents
from .graph_core import (GraphIsomorphism, SimplicialGraph, bipartition, graph_isomorphism,
                         graph_to_dict, is_triangle_free)

PL_MAX_VERTICES = 24
DEFAULT_BUDGET = 2_000_000


class ComplexError(ValueError):
    pass


class BudgetExceeded(ComplexError):
    def __init__(self, budget: int, radius_reached: int):
        self.budget = budget
        self.radius_reached = radius_reached
        super().__init__(f"vertex budget {budget} exceeded; complete up to radius {radius_reached}")


@dataclass(frozen=True, slots=True)
class Square:
    id: int
    vertices: tuple[int, int, int, int]
    edges: tuple[int, int, int, int]
    gens: tuple[int, int]


class SquareComplex:
    """A square complex built by :func:`build_PL` or :func:`build_davis_ball`."""

    def __init__(self, graph: SimplicialGraph, kind: str, keys: list[Hashable],
                 nbr: np.ndarray, depth: np.ndarray, radius: int | None = None):
        self.graph = graph
        self.kind = kind
        self.radius = radius
        self.keys = keys
        self.nbr = nbr
        self.depth = depth
        self.base_vertex = 0
        self.graph_edges: list[tuple[int, int]] = sorted(
            tuple(sorted((graph.index[a], graph.index[b]))) for a, b in graph.edge_list())
        self.graph_edge_index = {e: k for k, e in enumerate(self.graph_edges)}
        self._build_edges()
        self._build_squares()

    # -- construction ---------------------------------------------------------

    def _build_edges(self) -> None:
        N, n = self.nbr.shape
        us, ws, ss = [], [], []
        ids = np.arange(N)
        for s in range(n):
            w = self.nbr[:, s]
            mask = w > ids
            us.append(ids[mask])
            ws.append(w[mask])
            ss.append(np.full(int(mask.sum()), s))
        u = np.concatenate(us) if us else np.zeros(0, dtype=np.int64)
        w = np.concatenate(ws) if ws else np.zeros(0, dtype=np.int64)
        s = np.concatenate(ss) if ss else np.zeros(0, dtype=np.int64)
        order = np.lexsort((s, u))
        self.edge_u, self.edge_v, self.edge_gen = u[order], w[order], s[order]
        eid = np.full((N, n), -1, dtype=np.int64)
        idx = np.arange(len(order))
        eid[self.edge_u, self.edge_gen] = idx
        eid[self.edge_v, self.edge_gen] = idx
        self.edge_ids = eid

    def _build_squares(self) -> None:
        N = self.nbr.shape[0]
        nbr = self.nbr
        ids = np.arange(N)
        corner = np.full((N, len(self.graph_edges)), -1, dtype=np.int64)
        recs = []
        for k, (s, t) in enumerate(self.graph_edges):
            a, b = nbr[:, s], nbr[:, t]
            ok = (a >= 0) & (b >= 0)
            c = np.where(ok, nbr[np.where(ok, a, 0), t], -1)
            ok &= c >= 0
            ok &= (ids < a) & (ids < b) & (ids < c)
            g = ids[ok]
            recs.append((g, np.full(len(g), k)))
        if recs:
            g = np.concatenate([r[0] for r in recs])
            k = np.concatenate([r[1] for r in recs])
        else:
            g = k = np.zeros(0, dtype=np.int64)
        order = np.lexsort((k, g))
        g, k = g[order], k[order]
        gens = np.array(self.graph_edges, dtype=np.int64).reshape(-1, 2)
        s_arr = gens[k, 0] if len(k) else k
        t_arr = gens[k, 1] if len(k) else k
        a = nbr[g, s_arr]
        b = nbr[g, t_arr]
        c = nbr[a, t_arr]
        eid = self.edge_ids
        sq_ids = np.arange(len(g))
        for corners in (g, a, b, c):
            corner[corners, k] = sq_ids
        self.corner_square = corner
        self._sq = np.stack([g, a, c, b,
                             eid[g, s_arr], eid[a, t_arr], eid[b, s_arr], eid[g, t_arr],
                             s_arr, t_arr], axis=1) if len(g) else np.zeros((0, 10), dtype=np.int64)

    # -- sizes and records ----------------------------------------------------

    @property
    def num_vertices(self) -> int:
        return self.nbr.shape[0]

    @property
    def num_edges(self) -> int:
        return len(self.edge_u)

    @property
    def num_squares(self) -> int:
        return self._sq.shape[0]

    def square(self, i: int) -> Square:
        r = self._sq[i]
        return Square(int(i), tuple(int(x) for x in r[0:4]), tuple(int(x) for x in r[4:8]),
                      (int(r[8]), int(r[9])))

    @cached_property
    def squares(self) -> list[Square]:
        return [self.square(i) for i in range(self.num_squares)]

    def edge(self, e: int) -> tuple[int, int, int]:
        return int(self.edge_u[e]), int(self.edge_v[e]), int(self.edge_gen[e])

    @cached_property
    def generator_colors(self) -> list[str] | None:
        bp = bipartition(self.graph)
        if bp is None:
            return None
        return [bp.color[v] for v in self.graph.vertices]

    def edge_color(self, e: int) -> str | None:
        cols = self.generator_colors
        return None if cols is None else cols[int(self.edge_gen[e])]

    def square_at(self, v: int, s: int, t: int) -> int | None:
        k = self.graph_edge_index.get((min(s, t), max(s, t)))
        if k is None:
            return None
        sq = int(self.corner_square[v, k])
        return sq if sq >= 0 else None

    def squares_at(self, v: int) -> list[int]:
        row = self.corner_square[v]
        return [int(x) for x in row[row >= 0]]

    def edges_at(self, v: int) -> list[int]:
        row = self.edge_ids[v]
        return [int(x) for x in row[row >= 0]]

    def squares_on_edge(self, e: int) -> list[int]:
        u, _, s = self.edge(e)
        out = []
        for t in self.graph.adj_index[s]:
            sq = self.square_at(u, s, t)
            if sq is not None:
                out.append(sq)
        return sorted(out)

    def edge_degrees(self) -> np.ndarray:
        """Number of squares containing each edge."""
        deg = np.zeros(self.num_edges, dtype=np.int64)
        if self.num_squares:
            np.add.at(deg, self._sq[:, 4:8].ravel(), 1)
        return deg

    def other_end(self, v: int, e: int) -> int:
        u, w, _ = self.edge(e)
        return w if u == v else u

    # -- vertex naming -------------------------------------------------------

    def vertex_record(self, v: int):
        key = self.keys[v]
        if self.kind == "P_L":
            return [(-1 if (key >> i) & 1 else 1) for i in range(self.graph.n)]
        return [self.graph.vertices[i] for i in key]

    def vertex_name(self, v: int) -> str:
        if self.kind == "P_L":
            return "(" + ",".join("+" if x > 0 else "-" for x in self.vertex_record(v)) + ")"
        word = self.vertex_record(v)
        return " ".join(word) if word else "e"

    def element(self, v: int) -> GroupElement:
        if self.kind != "davis_ball":
            raise ComplexError("group elements label only Davis-ball vertices")
        return GroupElement(self.graph, self.keys[v])

    def find_vertex(self, spec) -> int:
        """Vertex id from an id, a sign vector, a word, or a GroupElement."""
        if isinstance(spec, (int, np.integer)):
            if not 0 <= int(spec) < self.num_vertices:
                raise ComplexError(f"unknown vertex {spec}")
            return int(spec)
        if self.kind == "P_L":
            signs = list(spec)
            if len(signs) != self.graph.n or any(x not in (1, -1) for x in signs):
                raise ComplexError(f"not a sign vector: {spec}")
            return sum(1 << i for i, x in enumerate(signs) if x == -1)
        if isinstance(spec, GroupElement):
            key = spec.letters
        else:
            from .coxeter_words import normal_form
            key = normal_form(self.graph, spec).letters
        idx = self._key_index.get(key)
        if idx is None:
            raise ComplexError(f"unknown vertex {spec}")
        return idx

    @cached_property
    def _key_index(self) -> dict:
        return {k: i for i, k in enumerate(self.keys)}

    # -- export ------------------------------------------------------------------

    def to_dict(self) -> dict:
        cols = self.generator_colors
        gv = self.graph.vertices
        return {
            "schema_version": 1,
            "kind": self.kind,
            "radius": self.radius,
            "graph": graph_to_dict(self.graph),
            "base_vertex": self.base_vertex,
            "vertices": [{"id": v, "record": self.vertex_record(v)} for v in range(self.num_vertices)],
            "edges": [{"id": e, "endpoints": [int(self.edge_u[e]), int(self.edge_v[e])],
                       "generator": gv[int(self.edge_gen[e])],
                       "color": None if cols is None else cols[int(self.edge_gen[e])]}
                      for e in range(self.num_edges)],
            "squares": [{"id": sq.id, "vertices": list(sq.vertices), "edges": list(sq.edges),
                         "generators": [gv[sq.gens[0]], gv[sq.gens[1]]]} for sq in self.squares],
        }

    def summary(self) -> dict:
        return {"schema_version": 1, "kind": self.kind, "radius": self.radius,
                "vertices": self.num_vertices, "edges": self.num_edges, "squares": self.num_squares}

    def to_dot(self, edge_labels: Sequence[int] | None = None) -> str:
        lines = ["graph complex {"]
        for v in range(self.num_vertices):
            lines.append(f'  {v} [label="{self.vertex_name(v)}"];')
        gv = self.graph.vertices
        for e in range(self.num_edges):
            u, w, s = self.edge(e)
            attrs = [f'gen="{gv[s]}"']
            col = self.edge_color(e)
            if col:
                attrs.append(f"color={col}")
            if edge_labels is not None:
                attrs.append(f'label="{int(edge_labels[e])}"')
            lines.append(f"  {u} -- {w} [{', '.join(attrs)}];")
        lines.append("}")
        return "\n".join(lines) + "\n"

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


def _warn_triangles(graph: SimplicialGraph) -> None:
    if not is_triangle_free(graph):
        warnings.warn("defining graph has triangles; only the 2-skeleton is built", stacklevel=3)


def build_PL(graph: SimplicialGraph) -> SquareComplex:
    """The compact complex P_L: all sign vectors, every coordinate flip, and a
    square for each pair of coordinates that spans an edge of the graph."""
    n = graph.n
    if n > PL_MAX_VERTICES:
        raise ComplexError(f"P_L size guard: {n} > {PL_MAX_VERTICES} generators")
    _warn_triangles(graph)
    N = 1 << n
    ids = np.arange(N, dtype=np.int64)
    nbr = np.stack([ids ^ (1 << s) for s in range(n)], axis=1) if n else np.zeros((N, 0), dtype=np.int64)
    depth = np.array([bin(v).count("1") for v in range(N)], dtype=np.int64)
    return SquareComplex(graph, "P_L", list(range(N)), nbr, depth)


def build_davis_ball(graph: SimplicialGraph, radius: int, budget: int = DEFAULT_BUDGET) -> SquareComplex:
    """Ball of the given radius about the identity in the Davis complex.

    Vertices are the canonical words of length at most ``radius``; an edge
    joins g and gs whenever both lie in the ball, and a square is present
    when all four corners do.
    """
    if radius < 0:
        raise ComplexError("radius must be >= 0")
    _warn_triangles(graph)
    comm = graph.adj_mask
    n = graph.n
    layers: list[list[tuple[int, ...]]] = [[()]]
    count = 1
    for r in range(1, radius + 1):
        nxt: set[tuple[int, ...]] = set()
        for w in layers[-1]:
            desc = set(right_descents(w, comm))
            for s in range(n):
                if s not in desc:
                    nxt.add(append_letter(w, s, comm))
        count += len(nxt)
        if count > budget:
            raise BudgetExceeded(budget, r - 1)
        layers.append(sorted(nxt))
    keys = [w for layer in layers for w in layer]
    index = {w: i for i, w in enumerate(keys)}
    N = len(keys)
    nbr = np.full((N, n), -1, dtype=np.int64)
    depth = np.zeros(N, dtype=np.int64)
    for i, w in enumerate(keys):
        depth[i] = len(w)
        if len(w) < radius:
            row = nbr[i]
            for s in range(n):
                row[s] = index[append_letter(w, s, comm)]
        else:
            for s in right_descents(w, comm):
                nbr[i, s] = index[append_letter(w, s, comm)]
    return SquareComplex(graph, "davis_ball", keys, nbr, depth, radius)


# -- vertex links ---------------------------------------------------------------

@dataclass(frozen=True)
class VertexLink:
    vertex: int
    graph: SimplicialGraph
    edge_of_node: dict
    full: bool
    isomorphism: GraphIsomorphism | None


def vertex_link(cx: SquareComplex, v: int) -> VertexLink:
    """Link of ``v``: one node per incident edge (named by its generator),
    one link edge per square corner at ``v``.

    When every generator edge is present the link is tested against the
    defining graph and the isomorphism is attached.
    """
    if not 0 <= v < cx.num_vertices:
        raise ComplexError(f"unknown vertex {v}")
    gv = cx.graph.vertices
    nodes = [s for s in range(cx.graph.n) if cx.nbr[v, s] >= 0]
    link_edges = [(gv[s], gv[t]) for k, (s, t) in enumerate(cx.graph_edges)
                  if cx.corner_square[v, k] >= 0]
    lg = SimplicialGraph.from_edges([gv[s] for s in nodes], link_edges)
    full = len(nodes) == cx.graph.n
    iso = graph_isomorphism(lg, cx.graph) if full else None
    return VertexLink(v, lg, {gv[s]: int(cx.edge_ids[v, s]) for s in nodes}, full, iso)


def interior_vertices(cx: SquareComplex) -> np.ndarray:
    """Vertices whose full star lies in the complex (depth <= radius - 2 for balls)."""
    if cx.kind == "P_L":
        return np.arange(cx.num_vertices)
    return np.nonzero(cx.depth <= cx.radius - 2)[0]
