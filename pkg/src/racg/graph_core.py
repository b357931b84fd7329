"""Defining graphs of right-angled Coxeter groups.

A :class:`SimplicialGraph` is an immutable finite simple graph whose vertex
order is meaningful: it fixes the generator order used by normal forms and
by the cube coordinates of the compact complex.  This module also holds the
graph-JSON reader/writer, DOT export, join decomposition, metric invariants
and an isomorphism search based on colour refinement with backtracking.
"""

from __future__ import annotations

import json
import math
from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from types import MappingProxyType
from typing import Iterable, Mapping, Sequence

RED = "red"
BLUE = "blue"
COLORS = (RED, BLUE)


class GraphError(ValueError):
    """Invalid graph data; ``location`` names the offending JSON path."""

    def __init__(self, message: str, location: str | None = None):
        self.location = location
        super().__init__(f"{location}: {message}" if location else message)


@dataclass(frozen=True)
class SimplicialGraph:
    vertices: tuple[str, ...]
    edges: frozenset[frozenset[str]]
    colors: Mapping[str, str] | None = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        verts = tuple(self.vertices)
        object.__setattr__(self, "vertices", verts)
        if len(set(verts)) != len(verts):
            raise GraphError("duplicate vertex name")
        vset = set(verts)
        edges = frozenset(frozenset(e) for e in self.edges)
        for e in edges:
            if len(e) != 2:
                raise GraphError(f"loop edge {sorted(e)}")
            if not e <= vset:
                raise GraphError(f"edge {sorted(e)} has an unknown endpoint")
        object.__setattr__(self, "edges", edges)
        if self.colors is not None:
            cols = dict(self.colors)
            if set(cols) != vset:
                raise GraphError("colour map must cover every vertex")
            for v, c in cols.items():
                if c not in COLORS:
                    raise GraphError(f"vertex {v!r} has colour {c!r}")
            object.__setattr__(self, "colors", MappingProxyType(cols))

    @classmethod
    def from_edges(cls, vertices: Iterable[str], edges: Iterable[Sequence[str]],
                   colors: Mapping[str, str] | None = None) -> "SimplicialGraph":
        edges = list(edges)
        for e in edges:
            if len(e) == 2 and e[0] == e[1]:
                raise GraphError(f"loop edge {list(e)}")
        return cls(tuple(vertices), frozenset(frozenset(e) for e in edges), colors)

    # -- lookups -------------------------------------------------------------

    @property
    def n(self) -> int:
        return len(self.vertices)

    @cached_property
    def index(self) -> dict[str, int]:
        return {v: i for i, v in enumerate(self.vertices)}

    @cached_property
    def adjacency(self) -> dict[str, frozenset[str]]:
        adj: dict[str, set[str]] = {v: set() for v in self.vertices}
        for e in self.edges:
            a, b = tuple(e)
            adj[a].add(b)
            adj[b].add(a)
        return {v: frozenset(s) for v, s in adj.items()}

    @cached_property
    def adj_index(self) -> tuple[tuple[int, ...], ...]:
        """Neighbour lists by vertex index, each sorted."""
        idx = self.index
        return tuple(tuple(sorted(idx[w] for w in self.adjacency[v])) for v in self.vertices)

    @cached_property
    def adj_mask(self) -> tuple[int, ...]:
        """Neighbourhoods as integer bitmasks over vertex indices."""
        return tuple(sum(1 << j for j in nbrs) for nbrs in self.adj_index)

    def neighbors(self, v: str) -> frozenset[str]:
        return self.adjacency[v]

    def has_edge(self, u: str, v: str) -> bool:
        return frozenset((u, v)) in self.edges

    def degree(self, v: str) -> int:
        return len(self.adjacency[v])

    def edge_list(self) -> list[tuple[str, str]]:
        """Edges as pairs ordered by vertex index, sorted."""
        idx = self.index
        pairs = [tuple(sorted(e, key=idx.__getitem__)) for e in self.edges]
        return sorted(pairs, key=lambda p: (idx[p[0]], idx[p[1]]))

    def induced(self, vertices: Iterable[str]) -> "SimplicialGraph":
        keep = set(vertices)
        verts = tuple(v for v in self.vertices if v in keep)
        edges = frozenset(e for e in self.edges if e <= keep)
        cols = None if self.colors is None else {v: self.colors[v] for v in verts}
        return SimplicialGraph(verts, edges, cols)

    def complement(self) -> "SimplicialGraph":
        vs = self.vertices
        edges = frozenset(frozenset((vs[i], vs[j])) for i in range(len(vs))
                          for j in range(i + 1, len(vs)) if not self.has_edge(vs[i], vs[j]))
        return SimplicialGraph(vs, edges)

    def relabel(self, mapping: Mapping[str, str], order: Sequence[str] | None = None) -> "SimplicialGraph":
        verts = tuple(order) if order is not None else tuple(mapping[v] for v in self.vertices)
        edges = frozenset(frozenset(mapping[x] for x in e) for e in self.edges)
        cols = None if self.colors is None else {mapping[v]: c for v, c in self.colors.items()}
        return SimplicialGraph(verts, edges, cols)

    def components(self) -> list[list[str]]:
        seen: set[str] = set()
        comps = []
        for s in self.vertices:
            if s in seen:
                continue
            comp, queue = [], deque([s])
            seen.add(s)
            while queue:
                x = queue.popleft()
                comp.append(x)
                for y in self.adjacency[x]:
                    if y not in seen:
                        seen.add(y)
                        queue.append(y)
            comps.append(sorted(comp, key=self.index.__getitem__))
        return comps

    def is_connected(self) -> bool:
        return self.n > 0 and len(self.components()) == 1

    def is_clique(self, vertices: Iterable[str]) -> bool:
        vs = list(vertices)
        return all(self.has_edge(vs[i], vs[j]) for i in range(len(vs)) for j in range(i + 1, len(vs)))

    def bfs_distances(self, source: str) -> dict[str, int]:
        dist = {source: 0}
        queue = deque([source])
        while queue:
            x = queue.popleft()
            for y in self.adjacency[x]:
                if y not in dist:
                    dist[y] = dist[x] + 1
                    queue.append(y)
        return dist


def join_graphs(factors: Sequence[SimplicialGraph]) -> SimplicialGraph:
    """The graph join: disjoint union plus every edge between distinct factors."""
    verts: list[str] = []
    edges: set[frozenset[str]] = set()
    for f in factors:
        if set(f.vertices) & set(verts):
            raise GraphError("join factors must have disjoint vertex names")
        for v in verts:
            for w in f.vertices:
                edges.add(frozenset((v, w)))
        verts.extend(f.vertices)
        edges |= f.edges
    return SimplicialGraph(tuple(verts), frozenset(edges))


# -- graph-JSON and DOT ------------------------------------------------------

def parse_graph(text: str | bytes) -> SimplicialGraph:
    """Parse a graph-JSON document into a validated graph."""
    if isinstance(text, bytes):
        text = text.decode("utf-8")
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise GraphError(f"malformed JSON ({exc.msg})", f"line {exc.lineno} col {exc.colno}") from None
    return graph_from_dict(doc)


def graph_from_dict(doc: object) -> SimplicialGraph:
    if not isinstance(doc, dict):
        raise GraphError("document must be a JSON object", "$")
    unknown = set(doc) - {"vertices", "edges"}
    if unknown:
        raise GraphError(f"unknown keys {sorted(unknown)}", "$")
    for key in ("vertices", "edges"):
        if key not in doc:
            raise GraphError(f"missing key {key!r}", "$")
        if not isinstance(doc[key], list):
            raise GraphError("must be a list", f"$.{key}")

    names: list[str] = []
    colors: dict[str, str] = {}
    for i, item in enumerate(doc["vertices"]):
        loc = f"$.vertices[{i}]"
        if isinstance(item, str):
            name = item
        elif isinstance(item, dict):
            extra = set(item) - {"name", "color"}
            if extra:
                raise GraphError(f"unknown keys {sorted(extra)}", loc)
            name = item.get("name")
            if not isinstance(name, str):
                raise GraphError("vertex object needs a string 'name'", loc)
            if "color" in item:
                if item["color"] not in COLORS:
                    raise GraphError(f"colour must be 'red' or 'blue', got {item['color']!r}", loc)
                colors[name] = item["color"]
        else:
            raise GraphError("vertex must be a string or an object", loc)
        if name in names:
            raise GraphError(f"duplicate vertex {name!r}", loc)
        names.append(name)
    if colors and len(colors) != len(names):
        raise GraphError("either every vertex or no vertex carries a colour", "$.vertices")

    known = set(names)
    seen: set[frozenset[str]] = set()
    for i, e in enumerate(doc["edges"]):
        loc = f"$.edges[{i}]"
        if not (isinstance(e, list) and len(e) == 2 and all(isinstance(x, str) for x in e)):
            raise GraphError("edge must be a 2-element list of strings", loc)
        if e[0] == e[1]:
            raise GraphError(f"loop edge {e}", loc)
        for x in e:
            if x not in known:
                raise GraphError(f"unknown endpoint {x!r}", loc)
        key = frozenset(e)
        if key in seen:
            raise GraphError(f"duplicate edge {e}", loc)
        seen.add(key)
    return SimplicialGraph(tuple(names), frozenset(seen), colors or None)


def graph_to_dict(g: SimplicialGraph, colors: Mapping[str, str] | None = None) -> dict:
    colors = colors if colors is not None else g.colors
    if colors:
        verts: list = [{"name": v, "color": colors[v]} for v in g.vertices]
    else:
        verts = list(g.vertices)
    return {"vertices": verts, "edges": [list(e) for e in g.edge_list()]}


def _dot_id(s: str) -> str:
    return '"' + s.replace("\\", "\\\\").replace('"', '\\"') + '"'


def serialize_graph(g: SimplicialGraph, format: str = "json",
                    bipartition: "Bipartition | None" = None) -> str:
    """Render ``g`` as graph-JSON or as an undirected DOT graph."""
    colors = bipartition.color if bipartition is not None else g.colors
    if format == "json":
        return json.dumps(graph_to_dict(g, colors), indent=2) + "\n"
    if format != "dot":
        raise ValueError(f"unknown format {format!r}")
    lines = ["graph G {"]
    for v in g.vertices:
        attr = f" [color={colors[v]}]" if colors else ""
        lines.append(f"  {_dot_id(v)}{attr};")
    for a, b in g.edge_list():
        lines.append(f"  {_dot_id(a)} -- {_dot_id(b)};")
    lines.append("}")
    return "\n".join(lines) + "\n"


# -- bipartitions and metrics ------------------------------------------------

@dataclass(frozen=True)
class Bipartition:
    color: Mapping[str, str]

    def is_proper(self, g: SimplicialGraph) -> bool:
        if set(self.color) != set(g.vertices):
            return False
        return all(len({self.color[x] for x in e}) == 2 for e in g.edges)

    def of_color(self, c: str) -> list[str]:
        return [v for v, col in self.color.items() if col == c]


def bipartition(g: SimplicialGraph) -> Bipartition | None:
    """A proper red/blue colouring, or None when ``g`` has an odd cycle.

    Declared colours are kept when they are proper; otherwise each component
    is 2-coloured by BFS with its first vertex red.
    """
    if g.colors is not None:
        declared = Bipartition(dict(g.colors))
        if declared.is_proper(g):
            return declared
    color: dict[str, str] = {}
    for s in g.vertices:
        if s in color:
            continue
        color[s] = RED
        queue = deque([s])
        while queue:
            x = queue.popleft()
            other = BLUE if color[x] == RED else RED
            for y in g.adjacency[x]:
                if y not in color:
                    color[y] = other
                    queue.append(y)
                elif color[y] != other:
                    return None
    return Bipartition({v: color[v] for v in g.vertices})


def girth(g: SimplicialGraph) -> float:
    """Length of a shortest cycle; ``math.inf`` for forests."""
    best = math.inf
    adj = g.adj_index
    for s in range(g.n):
        dist = [-1] * g.n
        parent = [-1] * g.n
        dist[s] = 0
        queue = deque([s])
        while queue:
            x = queue.popleft()
            if 2 * dist[x] + 1 >= best:
                break
            for y in adj[x]:
                if dist[y] < 0:
                    dist[y] = dist[x] + 1
                    parent[y] = x
                    queue.append(y)
                elif parent[x] != y:
                    best = min(best, dist[x] + dist[y] + 1)
    return best


def diameter(g: SimplicialGraph) -> float:
    if g.n == 0:
        return 0
    best = 0
    for v in g.vertices:
        dist = g.bfs_distances(v)
        if len(dist) < g.n:
            return math.inf
        best = max(best, max(dist.values()))
    return best


def has_induced_4cycle(g: SimplicialGraph) -> bool:
    vs, adj = g.vertices, g.adjacency
    for i, a in enumerate(vs):
        for c in vs[i + 1:]:
            if c in adj[a]:
                continue
            common = sorted(adj[a] & adj[c])
            for j, b in enumerate(common):
                for d in common[j + 1:]:
                    if d not in adj[b]:
                        return True
    return False


def is_triangle_free(g: SimplicialGraph) -> bool:
    adj = g.adjacency
    return not any(adj[a] & adj[b] for a, b in (tuple(e) for e in g.edges))


@dataclass(frozen=True)
class GraphMetrics:
    girth: float
    diameter: float
    degrees: tuple[int, ...]
    bipartition: Bipartition | None
    has_induced_4cycle: bool
    triangle_free: bool
    connected: bool
    component_diameters: tuple[float, ...]

    def to_dict(self) -> dict:
        def num(x):
            return None if x == math.inf else int(x)
        return {
            "girth": num(self.girth),
            "diameter": num(self.diameter),
            "degrees": list(self.degrees),
            "bipartite": self.bipartition is not None,
            "bipartition": dict(self.bipartition.color) if self.bipartition else None,
            "has_induced_4cycle": self.has_induced_4cycle,
            "triangle_free": self.triangle_free,
            "connected": self.connected,
            "component_diameters": [num(d) for d in self.component_diameters],
        }


def graph_metrics(g: SimplicialGraph) -> GraphMetrics:
    """Girth, diameter, degree multiset, bipartition and Moussong flags.

    Infinite girth or diameter are reported as ``math.inf`` (``null`` in JSON);
    a disconnected graph gets an infinite diameter plus per-component values.
    """
    comps = g.components()
    comp_diams = tuple(diameter(g.induced(c)) for c in comps)
    return GraphMetrics(
        girth=girth(g),
        diameter=diameter(g),
        degrees=tuple(sorted(g.degree(v) for v in g.vertices)),
        bipartition=bipartition(g),
        has_induced_4cycle=has_induced_4cycle(g),
        triangle_free=is_triangle_free(g),
        connected=len(comps) == 1,
        component_diameters=comp_diams,
    )


# -- colour refinement and isomorphism ---------------------------------------

def _refine(adj: Sequence[Sequence[int]], colors: list[int], history: list | None = None) -> list[int]:
    """Iterate neighbourhood-multiset refinement to a stable colouring.

    New colours are ranks of sorted signatures, so the result depends only on
    the isomorphism type of the coloured graph.
    """
    ncols = len(set(colors))
    while True:
        sigs = [(colors[v], tuple(sorted(colors[w] for w in adj[v]))) for v in range(len(adj))]
        palette = {s: i for i, s in enumerate(sorted(set(sigs)))}
        new = [palette[s] for s in sigs]
        if history is not None:
            hist: dict[int, int] = {}
            for c in new:
                hist[c] = hist.get(c, 0) + 1
            history.append(tuple(sorted(hist.items())))
        if len(palette) == ncols:
            return new
        colors, ncols = new, len(palette)


def refinement_signature(g: SimplicialGraph) -> tuple:
    """Isomorphism-invariant summary: colour histograms of each refinement round."""
    history: list = []
    _refine(g.adj_index, [0] * g.n, history)
    return (g.n, len(g.edges), tuple(history))


@dataclass(frozen=True)
class GraphIsomorphism:
    mapping: Mapping[str, str]

    def inverse(self) -> "GraphIsomorphism":
        return GraphIsomorphism({b: a for a, b in self.mapping.items()})

    def is_valid(self, a: SimplicialGraph, b: SimplicialGraph) -> bool:
        m = self.mapping
        if set(m) != set(a.vertices) or sorted(m.values()) != sorted(b.vertices):
            return False
        if len(a.edges) != len(b.edges):
            return False
        return all(frozenset(m[x] for x in e) in b.edges for e in a.edges)


def _initial_colors(g: SimplicialGraph, color_respecting: bool) -> list[int]:
    if not color_respecting:
        return [0] * g.n
    bp = bipartition(g)
    if bp is None:
        raise GraphError("colour-respecting isomorphism needs a bipartite graph")
    return [0 if bp.color[v] == RED else 1 for v in g.vertices]


def graph_isomorphism(a: SimplicialGraph, b: SimplicialGraph,
                      color_respecting: bool = False) -> GraphIsomorphism | None:
    """Find an isomorphism ``a -> b`` or return None.

    Both graphs are refined together as a disjoint union so that colours are
    comparable; then one vertex of the smallest ambiguous class is
    individualised against each candidate in turn.  With
    ``color_respecting`` red must map to red and blue to blue.
    """
    if a.n != b.n or len(a.edges) != len(b.edges):
        return None
    if sorted(map(a.degree, a.vertices)) != sorted(map(b.degree, b.vertices)):
        return None
    n = a.n
    if n == 0:
        return GraphIsomorphism({})
    adj = [list(x) for x in a.adj_index] + [[n + j for j in x] for x in b.adj_index]
    colors = _initial_colors(a, color_respecting) + _initial_colors(b, color_respecting)

    def search(cols: list[int]) -> list[int] | None:
        cols = _refine(adj, cols)
        classes: dict[int, tuple[list[int], list[int]]] = {}
        for v, c in enumerate(cols):
            classes.setdefault(c, ([], []))[v >= n].append(v)
        for left, right in classes.values():
            if len(left) != len(right):
                return None
        if all(len(left) == 1 for left, _ in classes.values()):
            perm = [0] * n
            for left, right in classes.values():
                perm[left[0]] = right[0] - n
            return perm if _is_iso(a, b, perm) else None
        target = min((c for c, (left, _) in classes.items() if len(left) > 1),
                     key=lambda c: (len(classes[c][0]), c))
        left, right = classes[target]
        v = left[0]
        fresh = max(cols) + 1
        for w in right:
            trial = list(cols)
            trial[v] = trial[w] = fresh
            perm = search(trial)
            if perm is not None:
                return perm
        return None

    perm = search(colors)
    if perm is None:
        return None
    return GraphIsomorphism({a.vertices[i]: b.vertices[perm[i]] for i in range(n)})


def _is_iso(a: SimplicialGraph, b: SimplicialGraph, perm: Sequence[int]) -> bool:
    bmask = b.adj_mask
    for i, nbrs in enumerate(a.adj_index):
        if sum(1 << perm[j] for j in nbrs) != bmask[perm[i]]:
            return False
    return True


# -- join decomposition ------------------------------------------------------

def join_decompose(g: SimplicialGraph) -> list[SimplicialGraph]:
    """Maximal join factors of ``g``: induced subgraphs on complement components.

    Factors are ordered by refinement signature, then by vertex names, which
    makes the output independent of the input vertex order up to names.
    """
    if g.n == 0:
        raise GraphError("join decomposition of the empty graph")
    comps = g.complement().components()
    factors = [g.induced(c) for c in comps]
    return sorted(factors, key=lambda f: (refinement_signature(f), sorted(f.vertices)))
