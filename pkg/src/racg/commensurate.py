"""The finite-index subgroup ker(phi) and the graph Gamma' with W_Gamma' = ker(phi).

For a clique K = {v1..vk} of the defining graph, phi kills every generator
outside K.  Its kernel is generated by the conjugates g(eps) v g(eps) with
v outside K, where g(eps) = v1^e1 ... vk^ek.  Setting to zero every
coordinate of eps whose clique vertex is adjacent to v gives the unique
reduced representative; those representatives are the vertices of Gamma'.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field

from .coxeter_words import (CliqueSelection, GroupElement, append_letter, g_of_epsilon, normal_form,
                            retraction_phi)
from .davis import build_davis_ball
from .graph_core import GraphError, SimplicialGraph, graph_to_dict


class CommensurationError(ValueError):
    pass


def _prefix_free(names) -> bool:
    names = sorted(names)
    return all(not b.startswith(a) for a, b in zip(names, names[1:]))


def join_names(graph: SimplicialGraph, names) -> str:
    """Separator-free when no generator name is a prefix of another, else dot-separated."""
    if not names:
        return "e"
    sep = "" if _prefix_free(graph.vertices) else "."
    return sep.join(names)


@dataclass(frozen=True)
class ConjugateGenerator:
    base: str
    eps: tuple[int, ...]
    clique: tuple[str, ...]
    name: str = field(compare=False, default="")

    @property
    def letters(self) -> list[str]:
        g = [v for v, x in zip(self.clique, self.eps) if x]
        return g + [self.base] + g


def _check_outside(k: CliqueSelection, v: str) -> None:
    if v not in k.graph.index:
        raise GraphError(f"unknown vertex {v!r}")
    if v in k.member_set:
        raise CommensurationError(f"{v} lies in the clique")


def canonical_eps(k: CliqueSelection, v: str, eps) -> tuple[int, ...]:
    nb = k.graph.neighbors(v)
    return tuple(0 if c in nb else int(x) for c, x in zip(k.members, eps))


def canonical_conjugate(gamma: SimplicialGraph, k: CliqueSelection, v: str, eps) -> ConjugateGenerator:
    """Reduced representative of g(eps) v g(eps); equality is checked in W_Gamma."""
    if k.graph != gamma:
        raise CommensurationError("clique is not over this graph")
    _check_outside(k, v)
    eps = tuple(int(x) for x in eps)
    if len(eps) != k.k or any(x not in (0, 1) for x in eps):
        raise CommensurationError(f"epsilon vector must be {k.k} bits")
    delta = canonical_eps(k, v, eps)
    cg = ConjugateGenerator(v, delta, k.members)
    cg = ConjugateGenerator(v, delta, k.members, join_names(gamma, cg.letters))
    raw = [c for c, x in zip(k.members, eps) if x]
    before = normal_form(gamma, raw + [v] + raw)
    after = normal_form(gamma, cg.letters)
    if before != after or len(after) != len(cg.letters):
        raise CommensurationError(f"canonicalization of {v}{eps} failed the word check")
    return cg


def _eps_space(k: int):
    return itertools.product((0, 1), repeat=k)


@dataclass(frozen=True, eq=False)
class GammaPrime:
    graph: SimplicialGraph
    generators: dict
    provenance: dict
    source: tuple[SimplicialGraph, CliqueSelection]

    def to_dict(self) -> dict:
        gamma, k = self.source
        doc = graph_to_dict(self.graph)
        doc["provenance"] = [{"name": n, "base": g.base, "eps": list(g.eps),
                              "word": str(self.provenance[n])}
                             for n, g in self.generators.items()]
        doc["source"] = {"graph": graph_to_dict(gamma), "clique": list(k.members)}
        return doc


def expected_vertex_count(gamma: SimplicialGraph, k: CliqueSelection) -> int:
    total = 0
    for v in gamma.vertices:
        if v not in k.member_set:
            c = sum(1 for u in k.members if gamma.has_edge(u, v))
            total += 2 ** (k.k - c)
    return total


def _closed_form_edge(k: CliqueSelection, u: ConjugateGenerator, v: ConjugateGenerator) -> bool:
    nu, nv = k.graph.neighbors(u.base), k.graph.neighbors(v.base)
    return all(a == b for c, a, b in zip(k.members, u.eps, v.eps) if c not in nu and c not in nv)


def _existential_edge(k: CliqueSelection, u: ConjugateGenerator, v: ConjugateGenerator) -> bool:
    return any(canonical_eps(k, u.base, e) == u.eps and canonical_eps(k, v.base, e) == v.eps
               for e in _eps_space(k.k))


def build_gamma_prime(gamma: SimplicialGraph, k: CliqueSelection, debug: bool = False) -> GammaPrime:
    """Vertices are canonical conjugates; u(e1)--v(e2) when u,v are adjacent
    and some eps canonicalizes to e1 at u and to e2 at v.

    The edge test uses the equivalent closed form (e1, e2 agree off the
    neighbourhoods of u and v); ``debug`` re-derives every pair from the
    existential definition and raises on any disagreement.
    """
    if k.graph != gamma:
        raise CommensurationError("clique is not over this graph")
    gens: dict[str, ConjugateGenerator] = {}
    for v in gamma.vertices:
        if v in k.member_set:
            continue
        seen = set()
        for eps in _eps_space(k.k):
            delta = canonical_eps(k, v, eps)
            if delta in seen:
                continue
            seen.add(delta)
            cg = canonical_conjugate(gamma, k, v, delta)
            gens[cg.name] = cg
    names = list(gens)
    if len(set(names)) != len(gens):
        raise CommensurationError("display names collide")
    edges = []
    for a, b in itertools.combinations(names, 2):
        u, v = gens[a], gens[b]
        if not gamma.has_edge(u.base, v.base):
            continue
        closed = _closed_form_edge(k, u, v)
        if debug and closed != _existential_edge(k, u, v):
            raise CommensurationError(f"edge rule mismatch on {a} -- {b}")
        if closed:
            edges.append((a, b))
    graph = SimplicialGraph.from_edges(names, edges)
    prov = {n: normal_form(gamma, g.letters) for n, g in gens.items()}
    return GammaPrime(graph, gens, prov, (gamma, k))


def h_map(gp: GammaPrime, word) -> GroupElement:
    """H: W_Gamma' -> W_Gamma on a word of Gamma' generator names."""
    gamma = gp.source[0]
    if isinstance(word, str):
        word = word.split()
    comm = gamma.adj_mask
    out: tuple[int, ...] = ()
    for name in word:
        if name not in gp.provenance:
            raise CommensurationError(f"unknown generator {name!r}")
        for s in gp.provenance[name].letters:
            out = append_letter(out, s, comm)
    return GroupElement(gamma, out)


def _h_letters(gp: GammaPrime, letters, table) -> tuple[int, ...]:
    comm = gp.source[0].adj_mask
    out: tuple[int, ...] = ()
    for i in letters:
        for s in table[i]:
            out = append_letter(out, s, comm)
    return out


def in_kernel(k: CliqueSelection, letters) -> bool:
    members = {k.graph.index[v] for v in k.members}
    parity = 0
    for s in letters:
        if s in members:
            parity ^= 1 << s
    return parity == 0


# -- constructive rewriting of kernel elements --------------------------------

def _cancel_pairs(word: list[str]) -> list[str]:
    out: list[str] = []
    for x in word:
        if out and out[-1] == x:
            out.pop()
        else:
            out.append(x)
    return out


def factor_kernel_element(gamma: SimplicialGraph, k: CliqueSelection, word) -> list[ConjugateGenerator]:
    """Write a kernel element as a product of canonical conjugates.

    A leading letter outside K is its own factor.  Otherwise, with the
    clique prefix p = u1..ui followed by non-clique letters up to the next
    clique letter u_j, each u_{i+t} becomes the factor p u_{i+t} p, and the
    rest p u_j ... u_n is shorter and is rewritten the same way.
    """
    if isinstance(word, GroupElement):
        word = list(word.word)
    elif isinstance(word, str):
        word = [] if word.split() == ["e"] else word.split()
    word = list(word)
    if not in_kernel(k, [gamma.index[x] for x in word]):
        raise CommensurationError("word is not in the kernel of the retraction")
    factors: list[ConjugateGenerator] = []
    cur = _cancel_pairs(word)
    while cur:
        if cur[0] not in k.member_set:
            factors.append(canonical_conjugate(gamma, k, cur[0], (0,) * k.k))
            cur = _cancel_pairs(cur[1:])
            continue
        i = 0
        while i < len(cur) and cur[i] in k.member_set:
            i += 1
        if i == len(cur):
            # a clique word with trivial image is trivial; the clique is abelian
            break
        prefix = cur[:i]
        eps = tuple(prefix.count(c) % 2 for c in k.members)
        j = i
        while j < len(cur) and cur[j] not in k.member_set:
            factors.append(canonical_conjugate(gamma, k, cur[j], eps))
            j += 1
        cur = _cancel_pairs(prefix + cur[j:])
    return factors


def factors_product(gamma: SimplicialGraph, factors) -> GroupElement:
    return normal_form(gamma, [x for f in factors for x in f.letters])


# -- verification --------------------------------------------------------------

@dataclass
class CommensurationReport:
    radius_inj: int
    radius_gen: int
    gamma_prime_vertices: int
    expected_vertices: int
    injectivity_ok: bool = True
    kernel_ok: bool = True
    generation_ok: bool = True
    index_ok: bool = True
    elements_tested: int = 0
    kernel_targets: int = 0
    closure_size: int = 0
    counterexamples: dict = field(default_factory=dict)
    coset_representatives: list = field(default_factory=list)
    sample_factorizations: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return (self.injectivity_ok and self.kernel_ok and self.generation_ok and self.index_ok
                and self.gamma_prime_vertices == self.expected_vertices)

    def to_dict(self) -> dict:
        return {"schema_version": 1, "ok": self.ok, "radius_inj": self.radius_inj,
                "radius_gen": self.radius_gen, "gamma_prime_vertices": self.gamma_prime_vertices,
                "expected_vertices": self.expected_vertices,
                "injectivity_ok": self.injectivity_ok, "kernel_ok": self.kernel_ok,
                "generation_ok": self.generation_ok, "index_ok": self.index_ok,
                "index": len(self.coset_representatives),
                "elements_tested": self.elements_tested, "kernel_targets": self.kernel_targets,
                "closure_size": self.closure_size, "counterexamples": self.counterexamples,
                "coset_representatives": self.coset_representatives,
                "sample_factorizations": self.sample_factorizations}

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


def verify_commensuration(gamma: SimplicialGraph, k: CliqueSelection, radius_inj: int = 4,
                          radius_gen: int = 8, budget: int = 2_000_000,
                          gp: GammaPrime | None = None) -> CommensurationReport:
    """Ball-scale checks that H is injective into ker(phi) and that R generates it."""
    if gp is None:
        gp = build_gamma_prime(gamma, k)
    rep = CommensurationReport(radius_inj, radius_gen, gp.graph.n, expected_vertex_count(gamma, k))
    names = list(gp.graph.vertices)
    table = [gp.provenance[n].letters for n in names]

    # (a) injectivity and (b) kernel membership on the Gamma' ball
    ball = build_davis_ball(gp.graph, radius_inj, budget=budget)
    images: dict[tuple[int, ...], tuple[int, ...]] = {}
    for key in ball.keys:
        img = _h_letters(gp, key, table)
        if img in images and "injectivity" not in rep.counterexamples:
            rep.injectivity_ok = False
            rep.counterexamples["injectivity"] = [[names[i] for i in images[img]], [names[i] for i in key]]
        images.setdefault(img, key)
        if not in_kernel(k, img) and "kernel" not in rep.counterexamples:
            rep.kernel_ok = False
            rep.counterexamples["kernel"] = [names[i] for i in key]
    rep.elements_tested = len(ball.keys)

    # (c) every kernel element of length <= radius_gen is an R-product
    comm = gamma.adj_mask
    targets = [w for w in build_davis_ball(gamma, radius_gen, budget=budget).keys if in_kernel(k, w)]
    rep.kernel_targets = len(targets)
    cap = radius_gen + max((len(t) for t in table), default=0)
    reached = {(): None}
    frontier = [()]
    while frontier:
        nxt = []
        for w in frontier:
            for r in table:
                x = w
                for s in r:
                    x = append_letter(x, s, comm)
                if len(x) <= cap and x not in reached:
                    reached[x] = None
                    nxt.append(x)
        frontier = nxt
        if len(reached) > budget:
            raise CommensurationError(f"generation closure exceeded budget {budget}")
    rep.closure_size = len(reached)
    missing = [w for w in targets if w not in reached]
    if missing:
        rep.generation_ok = False
        rep.counterexamples["generation"] = str(GroupElement(gamma, missing[0]))
    by_len: dict[int, tuple[int, ...]] = {}
    for w in targets:
        by_len.setdefault(len(w), w)
    for length in sorted(by_len):
        el = GroupElement(gamma, by_len[length])
        fs = factor_kernel_element(gamma, k, el)
        ok = factors_product(gamma, fs) == el
        if not ok:
            rep.generation_ok = False
            rep.counterexamples.setdefault("factorization", str(el))
        rep.sample_factorizations.append({"element": str(el), "factors": [f.name for f in fs], "verified": ok})

    # index: the coset representatives g(eps) map bijectively onto W_K
    images_k = set()
    for eps in _eps_space(k.k):
        g = g_of_epsilon(k, eps)
        phi = retraction_phi(k, g)
        images_k.add(phi.letters)
        rep.coset_representatives.append(str(g))
    rep.index_ok = len(images_k) == 2 ** k.k
    return rep


def identity_holds(gamma: SimplicialGraph, left: str, right: str) -> bool:
    """Equality of two words in W_Gamma."""
    return normal_form(gamma, left) == normal_form(gamma, right)


__all__ = ["CommensurationError", "ConjugateGenerator", "GammaPrime", "CommensurationReport",
           "canonical_conjugate", "canonical_eps", "build_gamma_prime", "h_map", "in_kernel",
           "factor_kernel_element", "factors_product", "verify_commensuration",
           "expected_vertex_count", "join_names"]
