"""Edge labelings by {1,2,3,4} of P_L and Davis balls.

A labeling of the edges at one vertex is fixed by two residues: the label of
its red edges and the label of its blue edges, which differ by one mod 4.
Moving across an edge keeps that edge's label and reflects the other colour's
label through it, so ``(i, i+1)`` across a red edge becomes ``(i, i-1)`` and
across a blue edge becomes ``(i+2, i+1)``.  This is the unique compatible
labeling at the far end.

:func:`label_complex` propagates breadth first from a base vertex and then
checks every edge and square, so path independence is certified on each run
rather than assumed.
"""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .davis import SquareComplex
from .graph_core import BLUE, RED


class LabelingError(ValueError):
    pass


class ConsistencyError(LabelingError):
    """Propagation reached an edge with two different labels (an internal defect)."""

    def __init__(self, message: str, cycle: list[int]):
        self.cycle = cycle
        super().__init__(message)


def mod4(x: int) -> int:
    """Residue in {1,2,3,4}; 0 reads as 4 and 5 as 1."""
    return (x - 1) % 4 + 1


def _mod4_arr(x: np.ndarray) -> np.ndarray:
    return (x - 1) % 4 + 1


def step(red: int, blue: int, edge_is_blue: bool) -> tuple[int, int]:
    """Compatible (red, blue) labels across an edge of the given colour."""
    if edge_is_blue:
        return mod4(2 * blue - red), blue
    return red, mod4(2 * red - blue)


def forced_coloring(graph) -> list[str]:
    """Breadth-first red/blue colouring that ignores odd-cycle conflicts."""
    cols: list[str | None] = [None] * graph.n
    for start in range(graph.n):
        if cols[start] is not None:
            continue
        cols[start] = RED
        queue = deque([start])
        while queue:
            x = queue.popleft()
            for y in graph.adj_index[x]:
                if cols[y] is None:
                    cols[y] = BLUE if cols[x] == RED else RED
                    queue.append(y)
    return cols


def _blue_gens(cx: SquareComplex, improper: bool = False) -> np.ndarray:
    """Colour of each generator axis.

    ``improper`` accepts a non-bipartite graph, colouring it breadth first;
    propagation is still well defined but squares on monochromatic edges of
    the graph cannot be cyclic.
    """
    cols = cx.generator_colors
    if cols is None:
        if not improper:
            raise LabelingError("ambient graph is not bipartite; no red/blue labeling exists")
        cols = forced_coloring(cx.graph)
    return np.array([c == BLUE for c in cols], dtype=bool)


# -- labelings of E_v -----------------------------------------------------------

@dataclass(frozen=True)
class VertexLabeling:
    """A labeling of the edges at one vertex, with the colour rule made explicit."""

    vertex: int
    red: int
    blue: int
    labels: dict = field(default_factory=dict)
    error: str | None = None

    @property
    def low(self) -> int:
        """``i`` such that the label set is {i, i+1}."""
        return self.red if mod4(self.red + 1) == self.blue else self.blue

    @property
    def label_set(self) -> tuple[int, int]:
        return self.low, mod4(self.low + 1)

    def is_valid(self, cx: SquareComplex, improper: bool = False) -> bool:
        if self.error is not None:
            return False
        if mod4(self.red - self.blue) not in (1, 3):
            return False
        blue = _blue_gens(cx, improper)
        expected = {}
        for e in cx.edges_at(self.vertex):
            expected[e] = self.blue if blue[cx.edge(e)[2]] else self.red
        return expected == dict(self.labels)


def _vertex_labeling(cx: SquareComplex, v: int, red: int, blue: int,
                     improper: bool = False) -> VertexLabeling:
    bl = _blue_gens(cx, improper)
    labels = {e: (blue if bl[cx.edge(e)[2]] else red) for e in cx.edges_at(v)}
    return VertexLabeling(v, red, blue, labels)


def initial_labeling(cx: SquareComplex, base: int, i: int = 1, improper: bool = False) -> VertexLabeling:
    """Red edges at ``base`` get ``i`` and blue edges ``i+1``.

    A base with no incident edges yields an empty labeling with ``error`` set.
    """
    if i not in (1, 2, 3, 4):
        raise LabelingError(f"label must be in 1..4, got {i}")
    _blue_gens(cx, improper)
    if not 0 <= base < cx.num_vertices:
        raise LabelingError(f"unknown vertex {base}")
    lab = _vertex_labeling(cx, base, i, mod4(i + 1), improper)
    if not lab.labels:
        return VertexLabeling(base, i, mod4(i + 1), {}, error="base vertex has no incident edges")
    return lab


def propagate_compatible(cx: SquareComplex, l1: VertexLabeling, e: int,
                         improper: bool = False) -> VertexLabeling:
    """The unique labeling at the other end of ``e`` compatible with ``l1``."""
    if not l1.is_valid(cx, improper):
        raise LabelingError(f"invalid labeling at vertex {l1.vertex}")
    u, w, s = cx.edge(e)
    if l1.vertex not in (u, w):
        raise LabelingError(f"edge {e} is not incident to vertex {l1.vertex}")
    other = w if u == l1.vertex else u
    red, blue = step(l1.red, l1.blue, bool(_blue_gens(cx, improper)[s]))
    return _vertex_labeling(cx, other, red, blue, improper)


def propagate_path(cx: SquareComplex, red: int, blue: int, path: Sequence[tuple[int, int]],
                   improper: bool = False) -> tuple[int, int]:
    """Carry (red, blue) along oriented edges ``(tail, generator)``."""
    bl = _blue_gens(cx, improper)
    for _, s in path:
        red, blue = step(red, blue, bool(bl[s]))
    return red, blue


# -- global labeling ---------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class EdgeLabeling:
    complex: SquareComplex
    labels: np.ndarray
    red: np.ndarray
    blue: np.ndarray
    base: int
    start: int
    certificate: dict
    metadata: dict

    def label(self, e: int) -> int:
        return int(self.labels[e])

    def vertex_label(self, v: int) -> tuple[int, int]:
        r, b = int(self.red[v]), int(self.blue[v])
        low = r if mod4(r + 1) == b else b
        return low, mod4(low + 1)

    def square_labels(self, sq: int) -> tuple[int, ...]:
        return tuple(int(self.labels[e]) for e in self.complex.square(sq).edges)

    def cyclic_squares(self, squares: Sequence[int] | None = None) -> np.ndarray:
        return _cyclic(self.complex, self.labels, squares)

    def to_dict(self) -> dict:
        return {"schema_version": 1, "base": self.base, "start_label": self.start,
                "labels": {str(e): int(x) for e, x in enumerate(self.labels)},
                "certificate": self.certificate, "metadata": self.metadata}

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    def to_dot(self) -> str:
        return self.complex.to_dot(edge_labels=self.labels)


def _cyclic(cx: SquareComplex, labels: np.ndarray, squares=None) -> np.ndarray:
    sq = cx._sq if squares is None else cx._sq[np.asarray(squares, dtype=np.int64)]
    if len(sq) == 0:
        return np.zeros(0, dtype=bool)
    lab = labels[sq[:, 4:8]]
    diffs = (np.roll(lab, -1, axis=1) - lab) % 4
    same = (diffs == diffs[:, :1]).all(axis=1)
    return same & ((diffs[:, 0] == 1) | (diffs[:, 0] == 3))


def _tree_path(parent: np.ndarray, v: int) -> list[int]:
    out = [v]
    while parent[v] >= 0:
        v = int(parent[v])
        out.append(v)
    return out


def label_complex(cx: SquareComplex, base: int = 0, i: int = 1, improper: bool = False) -> EdgeLabeling:
    """Propagate from ``base`` and certify the result edge by edge and square by square.

    With ``improper`` a non-bipartite graph is coloured breadth first and
    non-cyclic squares are reported in the certificate instead of raising.
    """
    blue_gen = _blue_gens(cx, improper)
    init = initial_labeling(cx, base, i, improper)
    N, n = cx.nbr.shape
    red = np.zeros(N, dtype=np.int64)
    blue = np.zeros(N, dtype=np.int64)
    parent = np.full(N, -1, dtype=np.int64)
    red[base], blue[base] = init.red, init.blue
    frontier = np.array([base], dtype=np.int64)
    while len(frontier):
        cand_v, cand_r, cand_b, cand_p = [], [], [], []
        for s in range(n):
            nb = cx.nbr[frontier, s]
            ok = nb >= 0
            ok[ok] = red[nb[ok]] == 0
            if not ok.any():
                continue
            src = frontier[ok]
            r, b = red[src], blue[src]
            if blue_gen[s]:
                r = _mod4_arr(2 * b - r)
            else:
                b = _mod4_arr(2 * r - b)
            cand_v.append(nb[ok])
            cand_r.append(r)
            cand_b.append(b)
            cand_p.append(src)
        if not cand_v:
            break
        v = np.concatenate(cand_v)
        uniq, first = np.unique(v, return_index=True)
        red[uniq] = np.concatenate(cand_r)[first]
        blue[uniq] = np.concatenate(cand_b)[first]
        parent[uniq] = np.concatenate(cand_p)[first]
        frontier = uniq
    if (red == 0).any():
        raise LabelingError("complex is not connected")

    # certificate: every edge, read from either end, carries the same label,
    # and the two local labelings are compatible across it
    eu, ev, eg = cx.edge_u, cx.edge_v, cx.edge_gen
    isb = blue_gen[eg]
    lab_u = np.where(isb, blue[eu], red[eu])
    lab_v = np.where(isb, blue[ev], red[ev])
    pr = np.where(isb, _mod4_arr(2 * blue[eu] - red[eu]), red[eu])
    pb = np.where(isb, blue[eu], _mod4_arr(2 * red[eu] - blue[eu]))
    bad = np.nonzero((lab_u != lab_v) | (pr != red[ev]) | (pb != blue[ev]))[0]
    if len(bad):
        e = int(bad[0])
        a = _tree_path(parent, int(eu[e]))
        b = _tree_path(parent, int(ev[e]))
        raise ConsistencyError(f"labels disagree across edge {e}", list(reversed(a)) + b)
    labels = lab_u.astype(np.int8)
    pair_ok = bool(np.isin(_mod4_arr(red - blue), (1, 3)).all())
    cyc = _cyclic(cx, labels)
    cert = {
        "edges_checked": int(cx.num_edges),
        "edges_consistent": True,
        "vertex_pairs_adjacent": pair_ok,
        "squares_checked": int(cx.num_squares),
        "squares_cyclic": int(cyc.sum()),
        "all_squares_cyclic": bool(cyc.all()),
    }
    proper = cx.generator_colors is not None
    if not pair_ok or (proper and not cert["all_squares_cyclic"]):
        raise ConsistencyError("labeling fails the square or vertex condition", [])
    gv = cx.graph.vertices
    meta = {"base": cx.vertex_name(base), "base_id": base, "start_label": i,
            "coloring": "proper" if proper else "improper",
            "axis_colors": {gv[s]: (BLUE if blue_gen[s] else RED) for s in range(n)},
            "convention": "red edges at base get the start label, blue edges the next",
            "symmetry_note": "other choices of base or start label differ by a dihedral relabeling"}
    return EdgeLabeling(cx, labels, red, blue, base, i, cert, meta)


# -- degrees ---------------------------------------------------------------------

def degree_report(cx: SquareComplex, labeling: EdgeLabeling) -> dict:
    """Square-degree per label and the parity/colour table.

    For Davis balls only edges with an endpoint at depth <= radius - 2 are
    counted, since their squares are all present.
    """
    deg = cx.edge_degrees()
    if cx.kind == "davis_ball":
        near = np.minimum(cx.depth[cx.edge_u], cx.depth[cx.edge_v]) <= cx.radius - 2
    else:
        near = np.ones(cx.num_edges, dtype=bool)
    cols = cx.generator_colors or []
    per_label = {}
    for lab in (1, 2, 3, 4):
        mask = (labeling.labels == lab) & near
        ds = sorted({int(x) for x in deg[mask]})
        cs = sorted({cols[int(g)] for g in cx.edge_gen[mask]}) if cols else []
        per_label[lab] = {"count": int(mask.sum()), "degrees": ds,
                          "degree": ds[0] if len(ds) == 1 else None, "colors": cs}
    parity = {}
    for p, labs in (("odd", (1, 3)), ("even", (2, 4))):
        ds = sorted({d for lab in labs for d in per_label[lab]["degrees"]})
        cs = sorted({c for lab in labs for c in per_label[lab]["colors"]})
        parity[p] = {"labels": list(labs), "degrees": ds, "colors": cs}
    used = [lab for lab in per_label if per_label[lab]["count"]]
    checks = {
        "degree_constant_per_label": all(len(per_label[lab]["degrees"]) == 1 for lab in used),
        "same_parity_same_color": all(len(parity[p]["colors"]) <= 1 for p in parity),
        "different_parity_different_color": not (parity["odd"]["colors"] and
                                                 parity["odd"]["colors"] == parity["even"]["colors"]),
        "same_parity_same_degree": all(len(parity[p]["degrees"]) <= 1 for p in parity),
    }
    return {"schema_version": 1, "labels": {str(k): v for k, v in per_label.items()},
            "parity": parity, "checks": checks, "ok": all(checks.values())}


# -- loop decomposition in P_L ------------------------------------------------

Oriented = tuple[int, int]  # (tail vertex, generator)


def _head(e: Oriented) -> int:
    return e[0] ^ (1 << e[1])


def free_reduce(path: Sequence[Oriented]) -> list[Oriented]:
    """Cancel backtracks e e^-1.  In P_L two consecutive edges along the
    same generator always form such a pair."""
    out: list[Oriented] = []
    for e in path:
        if out and out[-1][1] == e[1] and _head(out[-1]) == e[0]:
            out.pop()
        else:
            out.append(e)
    return out


def invert_path(path: Sequence[Oriented]) -> list[Oriented]:
    return [(_head(e), e[1]) for e in reversed(path)]


@dataclass(frozen=True)
class LoopFactor:
    conjugator: tuple[Oriented, ...]
    core: tuple[Oriented, Oriented, Oriented, Oriented]

    def expanded(self) -> list[Oriented]:
        return list(self.conjugator) + list(self.core) + invert_path(self.conjugator)

    def core_shape_ok(self) -> bool:
        """Core reads ẽs ẽt ēs ēt: generators a,b,a,b with the second pass reversed."""
        (x1, a), (x2, b), (x3, a2), (x4, b2) = self.core
        if a != a2 or b != b2 or a == b:
            return False
        path = list(self.core)
        closed = all(_head(path[k]) == path[(k + 1) % 4][0] for k in range(4))
        bit = lambda v, g: (v >> g) & 1  # noqa: E731
        return closed and bit(x1, a) != bit(x3, a) and bit(x2, b) != bit(x4, b)


@dataclass(frozen=True)
class LoopDecomposition:
    original: tuple[Oriented, ...]
    base: int
    factors: tuple[LoopFactor, ...]

    def product(self) -> list[Oriented]:
        return [e for f in self.factors for e in f.expanded()]

    def reconstructs(self) -> bool:
        """Factor product and original agree after free reduction."""
        return free_reduce(self.product()) == free_reduce(self.original)

    def to_dict(self, cx: SquareComplex) -> dict:
        gv = cx.graph.vertices

        def fmt(p):
            return [{"from": cx.vertex_name(t), "generator": gv[s]} for t, s in p]
        return {"schema_version": 1, "base": cx.vertex_name(self.base),
                "loop_length": len(self.original), "reconstructs": self.reconstructs(),
                "factors": [{"conjugator": fmt(f.conjugator), "core": fmt(f.core),
                             "core_generators": [gv[f.core[0][1]], gv[f.core[1][1]]],
                             "core_is_square": cx.square_at(f.core[0][0], f.core[0][1], f.core[1][1]) is not None}
                            for f in self.factors]}


def path_from_vertices(cx: SquareComplex, vertices: Sequence[int]) -> list[Oriented]:
    out = []
    for a, b in zip(vertices, vertices[1:]):
        x = a ^ b
        if x == 0 or x & (x - 1) or not 0 <= b < cx.num_vertices:
            raise LabelingError(f"vertices {a} and {b} are not adjacent")
        out.append((a, x.bit_length() - 1))
    return out


def path_from_generators(start: int, gens: Sequence[int]) -> list[Oriented]:
    out, v = [], start
    for s in gens:
        out.append((v, s))
        v ^= 1 << s
    return out


def decompose_loop(cx: SquareComplex, loop: Sequence[Oriented]) -> LoopDecomposition:
    """Write a closed edge path as a product of conjugated 4-cycles.

    After free reduction let e1 flip coordinate a and let e_j be the next
    edge along a (necessarily anti-parallel to e1).  For each edge e_k in
    between, the parallel copy of e1 is pushed past e_k, splitting off the
    factor  alpha (ẽ1 e_k ē1 ē_k) alpha^-1  where alpha is the path of shadow
    edges already crossed.  What remains is the shadow path followed by
    e_{j+1} ... e_2n, shorter by two, and the step repeats.
    """
    if cx.kind != "P_L":
        raise LabelingError("loop decomposition needs a P_L complex")
    loop = [(int(t), int(s)) for t, s in loop]
    for k, (t, s) in enumerate(loop):
        if not 0 <= t < cx.num_vertices or not 0 <= s < cx.graph.n:
            raise LabelingError(f"edge {k} is not in the complex")
        if k and _head(loop[k - 1]) != t:
            raise LabelingError(f"path breaks before edge {k}")
    base = loop[0][0] if loop else 0
    if loop and _head(loop[-1]) != base:
        raise LabelingError("edge path is not closed")
    factors: list[LoopFactor] = []
    cur = free_reduce(loop)
    while cur:
        a = cur[0][1]
        j = next(k for k in range(1, len(cur)) if cur[k][1] == a)
        shadow: list[Oriented] = []
        u = cur[0][0]
        for k in range(1, j):
            ek = cur[k]
            g = ek[1]
            core = ((u, a), ek, (_head(ek), a), (u ^ (1 << g), g))
            factors.append(LoopFactor(tuple(shadow), core))
            shadow.append((u, g))
            u ^= 1 << g
        cur = free_reduce(shadow + cur[j + 1:])
    return LoopDecomposition(tuple(loop), base, tuple(factors))
