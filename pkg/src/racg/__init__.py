"""Right-angled Coxeter groups whose defining graphs are generalized polygons.

Subpackages follow the mathematics bottom up: graphs and polygons, the word
problem, square complexes, edge labelings, disks and apartments, the
commensurability construction, and the quasi-isometry decision.
"""

from .classify import QIDecision, class_membership, qi_decide
from .commensurate import build_gamma_prime, canonical_conjugate, h_map, verify_commensuration
from .coxeter_words import CliqueSelection, GroupElement, normal_form, reflection_matrix
from .davis import SquareComplex, build_davis_ball, build_PL, vertex_link
from .graph_core import SimplicialGraph, graph_isomorphism, join_decompose, parse_graph, serialize_graph
from .labeling import decompose_loop, degree_report, label_complex
from .polygon import catalog_build, verify_polygon

__version__ = "0.1.0"

__all__ = [
    "CliqueSelection", "GroupElement", "QIDecision", "SimplicialGraph", "SquareComplex",
    "build_PL", "build_davis_ball", "build_gamma_prime", "canonical_conjugate", "catalog_build",
    "class_membership", "decompose_loop", "degree_report", "graph_isomorphism", "h_map",
    "join_decompose", "label_complex", "normal_form", "parse_graph", "qi_decide",
    "reflection_matrix", "serialize_graph", "verify_commensuration", "verify_polygon", "vertex_link",
]
