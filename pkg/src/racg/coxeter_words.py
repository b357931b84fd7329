"""The word problem in a right-angled Coxeter group.

Elements are stored as canonical words: reduced, and lexicographically least
(in the graph's vertex order) among all reduced words for the element.
Letters are vertex indices internally; names appear only at the edges.

Two routes compute the canonical word.  :func:`normal_form` first cancels
letters (deleting ``uu`` after commuting swaps) and then extracts the least
available letter greedily.  :func:`append_letter` updates a canonical word
by one generator in linear time and is what multiplication uses.  An
independent check is provided by the integral Tits representation in
:func:`reflection_matrix`.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

from .graph_core import GraphError, SimplicialGraph

DEFAULT_MAX_WORD_LENGTH = 64


class WordError(ValueError):
    pass


def _commute_masks(graph: SimplicialGraph) -> tuple[int, ...]:
    return graph.adj_mask


def parse_word(graph: SimplicialGraph, word: str | Iterable[str]) -> tuple[int, ...]:
    """Letters as vertex indices; a string is split on whitespace, "e" is empty."""
    if isinstance(word, str):
        tokens = word.split()
        if tokens == ["e"] and "e" not in graph.index:
            tokens = []
    else:
        tokens = list(word)
    out = []
    for t in tokens:
        if t not in graph.index:
            raise WordError(f"unknown generator {t!r}")
        out.append(graph.index[t])
    return tuple(out)


def _reduce(word: Sequence[int], comm: Sequence[int]) -> list[int]:
    """A reduced word for the same element (not yet canonical).

    Each incoming letter cancels against the last occurrence of itself that
    can be commuted to the end, if any; otherwise it is appended.
    """
    out: list[int] = []
    for s in word:
        cs = comm[s]
        t = len(out) - 1
        while t >= 0 and out[t] != s and (cs >> out[t]) & 1:
            t -= 1
        if t >= 0 and out[t] == s:
            del out[t]
        else:
            out.append(s)
    return out


def _lex_least(word: Sequence[int], comm: Sequence[int]) -> tuple[int, ...]:
    """Least linear extension of the commutation order of a reduced word."""
    rest = list(word)
    out = []
    while rest:
        best = None
        blocked = 0
        for pos, s in enumerate(rest):
            # s can reach the front iff it commutes with everything before it
            if not (blocked & ~comm[s]) and not (blocked >> s) & 1:
                if best is None or s < rest[best]:
                    best = pos
            blocked |= 1 << s
        out.append(rest.pop(best))
    return tuple(out)


def canonical_word(graph: SimplicialGraph, letters: Sequence[int]) -> tuple[int, ...]:
    comm = _commute_masks(graph)
    return _lex_least(_reduce(letters, comm), comm)


def append_letter(word: tuple[int, ...], s: int, comm: Sequence[int]) -> tuple[int, ...]:
    """Canonical word of ``word * s`` for a canonical ``word``.

    If some occurrence of ``s`` commutes past every later letter it is
    deleted; otherwise ``s`` slides left over commuting letters and stops
    before the first larger letter it reaches from the left.
    """
    cs = comm[s]
    t = len(word) - 1
    while t >= 0 and word[t] != s and (cs >> word[t]) & 1:
        t -= 1
    if t >= 0 and word[t] == s:
        return word[:t] + word[t + 1:]
    q = t + 1
    while q < len(word) and word[q] < s:
        q += 1
    return word[:q] + (s,) + word[q:]


def right_descents(word: Sequence[int], comm: Sequence[int]) -> list[int]:
    """Letters ``s`` with ``len(word * s) < len(word)``."""
    out = []
    blocked = 0
    for s in reversed(word):
        if not (blocked & ~comm[s]) and not (blocked >> s) & 1:
            out.append(s)
        blocked |= 1 << s
    return out


@dataclass(frozen=True)
class GroupElement:
    graph: SimplicialGraph
    letters: tuple[int, ...]

    @property
    def word(self) -> tuple[str, ...]:
        return tuple(self.graph.vertices[i] for i in self.letters)

    def __len__(self) -> int:
        return len(self.letters)

    def __mul__(self, other: "GroupElement") -> "GroupElement":
        return multiply(self, other)

    def inverse(self) -> "GroupElement":
        return normal_form(self.graph, [self.graph.vertices[i] for i in reversed(self.letters)])

    def is_identity(self) -> bool:
        return not self.letters

    def __str__(self) -> str:
        return " ".join(self.word) if self.letters else "e"

    def compact(self) -> str:
        """Word without separators, as in ``v1v4v1``; "e" for the identity."""
        return "".join(self.word) if self.letters else "e"


def identity(graph: SimplicialGraph) -> GroupElement:
    return GroupElement(graph, ())


def normal_form(graph: SimplicialGraph, word: str | Iterable[str]) -> GroupElement:
    """Canonical reduced representative of a word in the generators."""
    return GroupElement(graph, canonical_word(graph, parse_word(graph, word)))


def element_from_letters(graph: SimplicialGraph, letters: Iterable[int]) -> GroupElement:
    return GroupElement(graph, canonical_word(graph, tuple(letters)))


def _same_graph(a: GroupElement, b: GroupElement) -> None:
    if a.graph is not b.graph and a.graph != b.graph:
        raise WordError("elements belong to different groups")


def multiply(a: GroupElement, b: GroupElement) -> GroupElement:
    _same_graph(a, b)
    comm = _commute_masks(a.graph)
    w = a.letters
    for s in b.letters:
        w = append_letter(w, s, comm)
    return GroupElement(a.graph, w)


def elements_equal(a: GroupElement, b: GroupElement) -> bool:
    _same_graph(a, b)
    return a.letters == b.letters


# -- integral Tits representation ---------------------------------------------

class _Reflections:
    """Bilinear form B with B(s,s)=1, 0 on edges, -1 on non-edges.

    The reflection of s sends x to x - 2 B(e_s, x) e_s; in the basis e_t it is
    the identity except for row s, so products are computed by row updates.
    """

    def __init__(self, graph: SimplicialGraph):
        n = graph.n
        b = -np.ones((n, n), dtype=np.int64)
        for i in range(n):
            b[i, i] = 1
            for j in graph.adj_index[i]:
                b[i, j] = 0
        self.form = b
        self.n = n

    def generator(self, s: int) -> np.ndarray:
        m = np.eye(self.n, dtype=np.int64)
        m[s] -= 2 * self.form[s]
        return m

    def word(self, letters: Sequence[int]) -> np.ndarray:
        # M = S_{w1} ... S_{wk}; left-multiplying by S_s rewrites row s only
        m = np.eye(self.n, dtype=np.int64)
        limit = 1 << 58
        for s in reversed(letters):
            m[s] = m[s] - 2 * (self.form[s] @ m)
            if np.abs(m[s]).max() > limit:
                raise OverflowError("reflection matrix entries exceed int64 headroom")
        return m


_REFLECTIONS: dict[SimplicialGraph, _Reflections] = {}


def _reflections(graph: SimplicialGraph) -> _Reflections:
    r = _REFLECTIONS.get(graph)
    if r is None:
        r = _REFLECTIONS[graph] = _Reflections(graph)
    return r


def reflection_matrix(graph: SimplicialGraph, e: GroupElement | Sequence[str]) -> np.ndarray:
    """Integer matrix of an element (or raw word) in the Tits representation."""
    if isinstance(e, GroupElement):
        letters = e.letters
    else:
        letters = parse_word(graph, e)
    return _reflections(graph).word(letters)


def generator_matrix(graph: SimplicialGraph, v: str) -> np.ndarray:
    return _reflections(graph).generator(graph.index[v])


# -- cliques, retraction and epsilon vectors ---------------------------------

@dataclass(frozen=True)
class CliqueSelection:
    graph: SimplicialGraph
    members: tuple[str, ...]

    def __post_init__(self):
        members = tuple(self.members)
        object.__setattr__(self, "members", members)
        if not members:
            raise GraphError("clique selection must be non-empty")
        for v in members:
            if v not in self.graph.index:
                raise GraphError(f"unknown clique vertex {v!r}")
        if len(set(members)) != len(members):
            raise GraphError("clique vertices repeat")
        if not self.graph.is_clique(members):
            raise GraphError(f"{list(members)} is not a clique")
        if len(members) >= self.graph.n:
            raise GraphError("clique must be a proper subset of the vertices")

    @property
    def k(self) -> int:
        return len(self.members)

    @cached_property
    def subgraph(self) -> SimplicialGraph:
        return self.graph.induced(self.members).relabel(
            {v: v for v in self.members}, order=self.members)

    @cached_property
    def member_set(self) -> frozenset[str]:
        return frozenset(self.members)


def retraction_phi(k: CliqueSelection, e: GroupElement) -> GroupElement:
    """Image under the retraction killing every generator outside the clique.

    The target is an elementary abelian 2-group, so the image is the product
    of the clique letters that occur an odd number of times.
    """
    if e.graph != k.graph:
        raise WordError("element is not over the clique's graph")
    parity = {v: 0 for v in k.members}
    for v in e.word:
        if v in parity:
            parity[v] ^= 1
    return normal_form(k.subgraph, [v for v in k.members if parity[v]])


def g_of_epsilon(k: CliqueSelection, eps: Sequence[int]) -> GroupElement:
    """The clique element ``v1^e1 ... vk^ek`` in the ambient group."""
    if len(eps) != k.k or any(x not in (0, 1) for x in eps):
        raise WordError(f"epsilon vector must be {k.k} bits")
    return normal_form(k.graph, [v for v, x in zip(k.members, eps) if x])


def format_word(e: GroupElement) -> str:
    return str(e)
