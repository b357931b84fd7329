from __future__ import annotations

import networkx as nx
import pytest

from racg.graph_core import SimplicialGraph, join_graphs
from racg.polygon import catalog_build

ACCEPTANCE_LINES: list[str] = []


def cycle_graph(n: int, prefix: str = "v") -> SimplicialGraph:
    names = [f"{prefix}{i}" for i in range(1, n + 1)]
    return SimplicialGraph.from_edges(names, [(names[i], names[(i + 1) % n]) for i in range(n)])


def prefixed(g: SimplicialGraph, prefix: str) -> SimplicialGraph:
    return g.relabel({v: prefix + v for v in g.vertices})


def to_nx(g: SimplicialGraph) -> nx.Graph:
    h = nx.Graph()
    h.add_nodes_from(g.vertices)
    h.add_edges_from(g.edge_list())
    return h


def from_nx(h: nx.Graph) -> SimplicialGraph:
    names = [str(v) for v in h.nodes]
    return SimplicialGraph.from_edges(names, [(str(a), str(b)) for a, b in h.edges])


@pytest.fixture(scope="session")
def c5() -> SimplicialGraph:
    return cycle_graph(5)


@pytest.fixture(scope="session")
def heawood() -> SimplicialGraph:
    return catalog_build("projective_plane", q=2)


@pytest.fixture(scope="session")
def tutte_coxeter() -> SimplicialGraph:
    return catalog_build("symplectic_quadrangle", q=2)


@pytest.fixture(scope="session")
def k34() -> SimplicialGraph:
    return catalog_build("complete_bipartite", sizes=(3, 4))


@pytest.fixture(scope="session")
def heawood_join_tc(heawood, tutte_coxeter) -> SimplicialGraph:
    return join_graphs([prefixed(heawood, "A"), prefixed(tutte_coxeter, "B")])


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def random_connected_bipartite(rng, max_n: int = 16) -> SimplicialGraph:
    """Seeded random connected bipartite graph on at most ``max_n`` vertices:
    a random spanning tree of K_{a,b} plus random extra cross edges."""
    n = rng.randint(2, max_n)
    a = rng.randint(1, n - 1)
    left = [f"p{i}" for i in range(a)]
    right = [f"l{i}" for i in range(n - a)]
    pairs = [(u, v) for u in left for v in right]
    rng.shuffle(pairs)
    root = {v: v for v in left + right}

    def find(x):
        while root[x] != x:
            root[x] = root[root[x]]
            x = root[x]
        return x

    density = rng.random()
    edges = []
    for u, v in pairs:
        ru, rv = find(u), find(v)
        if ru != rv:
            root[ru] = rv
            edges.append((u, v))
        elif rng.random() < density:
            edges.append((u, v))
    return SimplicialGraph.from_edges(left + right, edges)


def square_pairs(ball, count: int, seed: int, max_distance: int = 3):
    """Seeded square pairs: p near the identity, q a short gallery walk away."""
    import random

    from racg.building_disks import square_neighbors

    def depth(sq):
        return max(int(ball.depth[v]) for v in ball.square(sq).vertices)

    rng = random.Random(seed)
    near = [s for s in range(ball.num_squares) if depth(s) <= 2]
    pairs = []
    for _ in range(count):
        p = q = rng.choice(near)
        for _ in range(rng.randint(0, max_distance)):
            q = rng.choice([x for x in square_neighbors(ball, q) if depth(x) <= 3])
        pairs.append((p, q))
    return pairs
