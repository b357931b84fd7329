"""Combinatorial disks in a Davis ball and the apartment-growing procedure.

A disk is a set of squares of a ``davis_ball`` complex whose union is a
topological disk.  Angles are counted in units of pi/m: a boundary vertex
with k squares has angle k, so it is convex, flat or concave as k is below,
equal to or above m; an interior vertex is flat when k = 2m.  A square has
area 2m - 4 in the same units.

Growth works at vertices.  The squares of a disk at a vertex v form a path
in the link of v, which is the defining graph.  Completing that path to a
2m-cycle of the graph (an apartment of the polygon) and adding the squares
along the completion makes v interior and flat.
"""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass, field
from functools import cached_property, lru_cache
from typing import Iterable, Sequence

from .davis import SquareComplex
from .graph_core import SimplicialGraph
from .polygon import verify_polygon


class DiskError(ValueError):
    pass


class TruncationError(DiskError):
    """Squares needed by a growth step lie outside the ball."""

    def __init__(self, message: str, missing: list[dict]):
        self.missing = missing
        super().__init__(message)


class ApartmentError(DiskError):
    def __init__(self, message: str, partial: "CombinatorialDisk | None" = None, diagnostic: dict | None = None):
        self.partial = partial
        self.diagnostic = diagnostic or {}
        super().__init__(message)


@lru_cache(maxsize=32)
def polygon_gonality(graph: SimplicialGraph) -> int:
    rep = verify_polygon(graph)
    if not rep.is_generalized_polygon:
        raise DiskError("defining graph is not a generalized polygon")
    return rep.m


@dataclass(frozen=True, eq=False)
class CombinatorialDisk:
    ambient: SquareComplex
    squares: frozenset[int]
    m: int

    def __post_init__(self):
        object.__setattr__(self, "squares", frozenset(int(s) for s in self.squares))
        if self.ambient.kind != "davis_ball":
            raise DiskError("disks live in a Davis ball")
        if not self.squares:
            raise DiskError("a disk needs at least one square")
        bad = [s for s in self.squares if not 0 <= s < self.ambient.num_squares]
        if bad:
            raise DiskError(f"squares not in the ambient complex: {sorted(bad)[:5]}")
        self._validate()

    # -- structure -------------------------------------------------------------

    @cached_property
    def _incidence(self):
        cx = self.ambient
        at_vertex: dict[int, list[int]] = {}
        on_edge: dict[int, list[int]] = {}
        for sq in sorted(self.squares):
            rec = cx.square(sq)
            for v in rec.vertices:
                at_vertex.setdefault(v, []).append(sq)
            for e in rec.edges:
                on_edge.setdefault(e, []).append(sq)
        return at_vertex, on_edge

    @property
    def vertices(self) -> list[int]:
        return sorted(self._incidence[0])

    @property
    def edges(self) -> list[int]:
        return sorted(self._incidence[1])

    def k(self, v: int) -> int:
        return len(self._incidence[0].get(v, ()))

    @cached_property
    def boundary_edges(self) -> frozenset[int]:
        return frozenset(e for e, sqs in self._incidence[1].items() if len(sqs) == 1)

    @cached_property
    def boundary_vertices(self) -> frozenset[int]:
        cx = self.ambient
        return frozenset(x for e in self.boundary_edges for x in cx.edge(e)[:2])

    @cached_property
    def interior_vertices(self) -> frozenset[int]:
        return frozenset(self._incidence[0]) - self.boundary_vertices

    def fan(self, v: int) -> list[int]:
        """Generators of the disk's edges at ``v`` in link order.

        For a boundary vertex this is the link path from its smaller end;
        for an interior vertex a closed cycle starting at its least node.
        """
        cx = self.ambient
        adj: dict[int, list[int]] = {}
        for sq in self._incidence[0].get(v, ()):
            s, t = cx.square(sq).gens
            adj.setdefault(s, []).append(t)
            adj.setdefault(t, []).append(s)
        if not adj:
            return []
        ends = sorted(x for x, ys in adj.items() if len(ys) == 1)
        start = ends[0] if ends else min(adj)
        order, prev, cur = [start], None, start
        while True:
            nxt = [y for y in sorted(adj[cur]) if y != prev]
            if not nxt or nxt[0] == start or nxt[0] in order:
                break
            prev, cur = cur, nxt[0]
            order.append(cur)
        return order

    def _validate(self) -> None:
        cx = self.ambient
        at_vertex, on_edge = self._incidence
        for e, sqs in on_edge.items():
            if len(sqs) > 2:
                raise DiskError(f"edge {e} lies in {len(sqs)} squares of the disk")
        # each vertex link inside the disk must be a path or a cycle
        for v, sqs in at_vertex.items():
            deg: dict[int, int] = {}
            for sq in sqs:
                for g in cx.square(sq).gens:
                    deg[g] = deg.get(g, 0) + 1
            if any(d > 2 for d in deg.values()):
                raise DiskError(f"vertex {v} is a branch point of the disk")
            ones = sum(1 for d in deg.values() if d == 1)
            if ones not in (0, 2):
                raise DiskError(f"link of vertex {v} is not a path or a cycle")
            fan = self.fan(v)
            if len(fan) != len(deg):
                raise DiskError(f"link of vertex {v} is disconnected (pinched disk)")
        # connectivity through shared edges
        sq_list = sorted(self.squares)
        seen = {sq_list[0]}
        queue = deque([sq_list[0]])
        while queue:
            sq = queue.popleft()
            for e in cx.square(sq).edges:
                for other in on_edge[e]:
                    if other not in seen:
                        seen.add(other)
                        queue.append(other)
        if len(seen) != len(sq_list):
            raise DiskError("squares do not form a connected union")
        chi = len(at_vertex) - len(on_edge) + len(sq_list)
        if chi != 1:
            raise DiskError(f"Euler characteristic {chi}, not 1")
        cycle = self.boundary_cycle
        if len(cycle) != len(self.boundary_edges):
            raise DiskError("boundary is not a single cycle")

    @cached_property
    def boundary_cycle(self) -> list[int]:
        """Boundary vertices in cyclic order from the least one."""
        cx = self.ambient
        nbrs: dict[int, list[int]] = {}
        for e in self.boundary_edges:
            u, w, _ = cx.edge(e)
            nbrs.setdefault(u, []).append(w)
            nbrs.setdefault(w, []).append(u)
        if any(len(x) != 2 for x in nbrs.values()):
            return []
        start = min(nbrs)
        cycle = [start]
        prev, cur = start, min(nbrs[start])
        while cur != start:
            cycle.append(cur)
            a, b = nbrs[cur]
            prev, cur = cur, (b if a == prev else a)
        return cycle

    def with_squares(self, extra: Iterable[int]) -> "CombinatorialDisk":
        return CombinatorialDisk(self.ambient, self.squares | frozenset(extra), self.m)

    def to_dict(self) -> dict:
        cx = self.ambient
        return {"schema_version": 1, "m": self.m, "squares": sorted(self.squares),
                "boundary_cycle": [cx.vertex_name(v) for v in self.boundary_cycle],
                "shapes": [s.to_dict(cx) for s in classify_vertices(self)],
                "gauss_bonnet": gauss_bonnet_certificate(self)}


# -- vertex shapes and Gauss-Bonnet -------------------------------------------

@dataclass(frozen=True)
class VertexShape:
    vertex: int
    k: int
    boundary: bool
    shape: str

    def to_dict(self, cx: SquareComplex | None = None) -> dict:
        name = cx.vertex_name(self.vertex) if cx is not None else self.vertex
        return {"vertex": name, "k": self.k, "boundary": self.boundary, "shape": self.shape}


def shape_of(k: int, m: int, boundary: bool) -> str:
    if boundary:
        return "convex" if k < m else "flat" if k == m else "concave"
    return "interior-flat" if k == 2 * m else "interior-nonflat"


def classify_vertices(d: CombinatorialDisk) -> list[VertexShape]:
    bnd = d.boundary_vertices
    return [VertexShape(v, d.k(v), v in bnd, shape_of(d.k(v), d.m, v in bnd)) for v in d.vertices]


def gauss_bonnet_certificate(d: CombinatorialDisk) -> dict:
    """Exact angle bookkeeping in units of pi/m.

    Boundary turning sum(m - k), interior excess sum(k - 2m) and the total
    area N(2m - 4) satisfy  turning - excess - area = 2m  for every disk.
    """
    m = d.m
    shapes = classify_vertices(d)
    turning = sum(m - s.k for s in shapes if s.boundary)
    excess = sum(s.k - 2 * m for s in shapes if not s.boundary)
    area = len(d.squares) * (2 * m - 4)
    convex = sum(1 for s in shapes if s.shape == "convex")
    concave = sum(1 for s in shapes if s.shape == "concave")
    lhs = turning - excess - area
    if lhs != 2 * m:
        raise DiskError(f"Gauss-Bonnet fails: {lhs} != {2 * m} (units of pi/m)")
    nonneg_excess = all(s.k >= 2 * m for s in shapes if not s.boundary)
    out = {
        "units": "pi/m",
        "m": m,
        "boundary_turning": turning,
        "interior_excess": excess,
        "area": area,
        "identity_value": lhs,
        "identity_holds": True,
        "convex_count": convex,
        "concave_count": concave,
        "flat_count": sum(1 for s in shapes if s.shape == "flat"),
        # the inequality form: turning minus area is at least 2m once no
        # interior vertex has a deficit
        "inequality_applies": nonneg_excess,
        "inequality_holds": (turning - area >= 2 * m) if nonneg_excess else None,
    }
    if nonneg_excess and concave == 0 and m >= 3:
        out["convex_count_at_least_3"] = convex >= 3
    return out


def is_convex(d: CombinatorialDisk) -> bool:
    return all(s.shape in ("convex", "flat", "interior-flat") for s in classify_vertices(d))


def validate_geodesic_disk(d: CombinatorialDisk) -> dict:
    """Lint for the two properties of disks cut out by geodesics."""
    m = d.m
    cycle = d.boundary_cycle
    shape = {v: shape_of(d.k(v), m, True) for v in cycle}
    violations = []
    for v in cycle:
        if shape[v] == "concave" and d.k(v) != m + 1:
            violations.append({"rule": "concave-count", "vertex": v, "k": d.k(v)})
    concave_pos = [i for i, v in enumerate(cycle) if shape[v] == "concave"]
    if len(concave_pos) >= 2:
        n = len(cycle)
        for a, b in zip(concave_pos, concave_pos[1:] + [concave_pos[0] + n]):
            arc = [cycle[j % n] for j in range(a + 1, b)]
            if not any(shape[x] == "convex" for x in arc):
                violations.append({"rule": "convex-between-concave",
                                   "between": [cycle[a % n], cycle[b % n]]})
    return {"ok": not violations, "violations": violations}


# -- growth steps --------------------------------------------------------------

def _completions(graph: SimplicialGraph, fan: Sequence[int], length: int) -> list[tuple[int, ...]]:
    """Simple paths of the given length from fan[-1] back to fan[0] avoiding the fan."""
    start, goal = fan[-1], fan[0]
    blocked = set(fan)
    adj = graph.adj_index
    out: list[tuple[int, ...]] = []

    def walk(path: list[int]) -> None:
        x = path[-1]
        left = length - (len(path) - 1)
        if left == 1:
            if goal in adj[x]:
                out.append(tuple(path) + (goal,))
            return
        for y in adj[x]:
            if y not in blocked and y not in path:
                path.append(y)
                walk(path)
                path.pop()

    if length >= 1:
        walk([start])
    return sorted(out)


def _link_squares(d: CombinatorialDisk, v: int, path: Sequence[int]) -> list[int]:
    cx = d.ambient
    gv = cx.graph.vertices
    found, missing = [], []
    for s, t in zip(path, path[1:]):
        sq = cx.square_at(v, s, t)
        if sq is None:
            missing.append({"vertex": cx.vertex_name(v), "generators": [gv[s], gv[t]]})
        else:
            found.append(sq)
    if missing:
        raise TruncationError(f"{len(missing)} squares at vertex {cx.vertex_name(v)} lie outside the ball", missing)
    return found


def _complete_at(d: CombinatorialDisk, v: int) -> CombinatorialDisk:
    fan = d.fan(v)
    k = d.k(v)
    comps = _completions(d.ambient.graph, fan, 2 * d.m - k)
    if not comps:
        raise DiskError(f"link path at vertex {v} does not extend to an apartment of the link")
    # least completion in vertex order; unique once k >= m + 1
    new = _link_squares(d, v, comps[0])
    return d.with_squares(new)


def extend_at_concave(d: CombinatorialDisk, v: int) -> CombinatorialDisk:
    """Fill in the m - 1 squares that make a concave vertex interior and flat."""
    if v not in d.boundary_vertices:
        raise DiskError(f"vertex {v} is not on the boundary")
    k = d.k(v)
    if k <= d.m:
        raise DiskError(f"vertex {v} is not concave (k={k}, m={d.m})")
    if k != d.m + 1:
        raise DiskError(f"concave vertex {v} has k={k}, expected m+1={d.m + 1}")
    if len(d.fan(v)) != k + 1:
        raise DiskError(f"squares at vertex {v} do not form a consecutive fan")
    return _complete_at(d, v)


def make_convex(d: CombinatorialDisk, max_steps: int | None = None) -> CombinatorialDisk:
    """Extend at concave vertices, in boundary order, until none remain."""
    for v in d.interior_vertices:
        if d.k(v) != 2 * d.m:
            raise DiskError(f"interior vertex {v} has k={d.k(v)}; cannot be made flat")
    limit = max_steps if max_steps is not None else 4 * len(d.boundary_cycle) + 64
    steps = 0
    while True:
        concave = [v for v in d.boundary_cycle if d.k(v) > d.m]
        if not concave:
            return d
        ready = [v for v in concave if d.k(v) == d.m + 1]
        if not ready:
            raise DiskError(f"concave vertices with more than m+1 squares: {concave}")
        if steps >= limit:
            raise DiskError(f"convexification did not finish within {limit} steps")
        d = extend_at_concave(d, ready[0])
        steps += 1


def engulf_vertex(d: CombinatorialDisk, v: int, max_steps: int | None = None) -> CombinatorialDisk:
    """Make a boundary vertex of a convex disk interior, then re-convexify."""
    if v not in d.boundary_vertices:
        raise DiskError(f"vertex {v} is not on the boundary")
    if not is_convex(d):
        raise DiskError("engulfing needs a convex disk")
    return make_convex(_complete_at(d, v), max_steps)


def square_neighbors(cx: SquareComplex, sq: int) -> list[int]:
    out = set()
    for e in cx.square(sq).edges:
        out.update(cx.squares_on_edge(e))
    out.discard(sq)
    return sorted(out)


def shortest_gallery(cx: SquareComplex, p: int, q: int, max_length: int | None = None) -> list[int] | None:
    """Shortest sequence of squares from p to q, consecutive ones sharing an edge."""
    prev = {p: None}
    queue = deque([(p, 0)])
    while queue:
        sq, dist = queue.popleft()
        if sq == q:
            path = [q]
            while prev[path[-1]] is not None:
                path.append(prev[path[-1]])
            return path[::-1]
        if max_length is not None and dist >= max_length:
            continue
        for nb in square_neighbors(cx, sq):
            if nb not in prev:
                prev[nb] = sq
                queue.append((nb, dist + 1))
    return None


@dataclass(frozen=True, eq=False)
class ApartmentFragment:
    disk: CombinatorialDisk
    p_square: int
    q_square: int
    gallery: tuple[int, ...]
    engulfed: tuple[int, ...]
    truncated: tuple[int, ...]
    chamber: dict = field(default_factory=lambda: {"sides": 4, "angle_units_pi_over_m": 1})

    def tessellation_ok(self) -> bool:
        d = self.disk
        interior_edges_ok = all(len(d._incidence[1][e]) == 2
                                for e in d._incidence[1] if e not in d.boundary_edges)
        return interior_edges_ok and all(d.k(v) == 2 * d.m for v in d.interior_vertices)

    def contains_both(self) -> bool:
        return self.p_square in self.disk.squares and self.q_square in self.disk.squares

    def to_dict(self) -> dict:
        cx = self.disk.ambient
        out = self.disk.to_dict()
        out.update({"p_square": self.p_square, "q_square": self.q_square,
                    "gallery": list(self.gallery),
                    "engulfed": [cx.vertex_name(v) for v in self.engulfed],
                    "truncated": [cx.vertex_name(v) for v in self.truncated],
                    "contains_both": self.contains_both(),
                    "tessellation_ok": self.tessellation_ok(), "chamber": self.chamber})
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


def grow_apartment(ball: SquareComplex, p_square: int, q_square: int, effort: int = 6,
                   m: int | None = None) -> ApartmentFragment:
    """Grow a convex disk containing both squares.

    The seed is the union of a shortest gallery from p to q, made convex.
    Boundary vertices are then engulfed in boundary order, skipping those
    whose link squares leave the ball, until ``effort`` engulfments are done.
    """
    if m is None:
        m = polygon_gonality(ball.graph)
    for sq in (p_square, q_square):
        if not 0 <= sq < ball.num_squares:
            raise DiskError(f"square {sq} is not in the ball")
    gallery = shortest_gallery(ball, p_square, q_square)
    if gallery is None:
        raise ApartmentError(f"square {q_square} is unreachable from {p_square}",
                             CombinatorialDisk(ball, {p_square}, m), {"reason": "no gallery"})
    try:
        d = make_convex(CombinatorialDisk(ball, set(gallery), m))
    except DiskError as exc:
        raise ApartmentError(f"gallery seed could not be convexified: {exc}",
                             CombinatorialDisk(ball, {p_square}, m),
                             {"gallery": gallery, "reason": str(exc)}) from exc
    engulfed: list[int] = []
    truncated: list[int] = []
    tried: set[int] = set()
    while len(engulfed) < effort:
        cand = [v for v in d.boundary_cycle if v not in tried]
        if not cand:
            break
        v = cand[0]
        tried.add(v)
        try:
            d = engulf_vertex(d, v)
        except TruncationError:
            truncated.append(v)
            continue
        except DiskError:
            truncated.append(v)
            continue
        engulfed.append(v)
    return ApartmentFragment(d, p_square, q_square, tuple(gallery), tuple(engulfed), tuple(truncated))
