"""Command-line interface: ``racg <subcommand> ...``.

Data goes to stdout as JSON (or DOT where it makes sense); errors go to
stderr as a JSON object.  Exit codes: 0 success or positive verdict,
1 failed invariant or validation, 2 bad input, 3 negative verdict,
4 outside the class where a verdict applies.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import building_disks as bd
from .classify import NOT_QI, OUT_OF_CLASS, QI, class_membership, qi_decide
from .commensurate import CommensurationError, build_gamma_prime, verify_commensuration
from .coxeter_words import CliqueSelection, WordError, normal_form
from .davis import BudgetExceeded, ComplexError, build_davis_ball, build_PL
from .graph_core import (GraphError, graph_metrics, graph_to_dict, join_decompose, parse_graph,
                         serialize_graph)
from .labeling import (LabelingError, decompose_loop, degree_report, label_complex, path_from_generators,
                       propagate_path)
from .polygon import CATALOG, PolygonError, catalog_build, verify_polygon

EXIT_OK, EXIT_FAIL, EXIT_INPUT, EXIT_NEGATIVE, EXIT_OUT = 0, 1, 2, 3, 4


class InputError(ValueError):
    pass


def _emit(doc) -> None:
    sys.stdout.write(json.dumps(doc, indent=2, sort_keys=False) + "\n")


def _read_graph(path: str | None):
    if path in (None, "-"):
        text = sys.stdin.read()
    else:
        try:
            text = Path(path).read_text(encoding="utf-8")
        except OSError as exc:
            raise InputError(f"cannot read {path}: {exc.strerror}") from None
    return parse_graph(text)


def _need_json(args) -> None:
    if args.format != "json":
        raise InputError(f"{args.command} only writes JSON")


def _complex(args, g):
    if args.radius is None:
        return build_PL(g)
    return build_davis_ball(g, args.radius, budget=args.budget)


# -- subcommands ------------------------------------------------------------------

def cmd_verify_polygon(args) -> int:
    _need_json(args)
    rep = verify_polygon(_read_graph(args.graph), max_direct_check=args.max_direct_check)
    _emit(rep.to_dict())
    if rep.verifier_error:
        return EXIT_FAIL
    return EXIT_OK if rep.is_generalized_polygon else EXIT_NEGATIVE


def cmd_catalog(args) -> int:
    sizes = None
    if args.name == "complete_bipartite":
        if args.s is None or args.t is None:
            raise InputError("complete_bipartite needs --s and --t")
        sizes = (args.s, args.t)
    g = catalog_build(args.name, q=args.q, sizes=sizes)
    sys.stdout.write(serialize_graph(g, args.format))
    return EXIT_OK


def cmd_metrics(args) -> int:
    _need_json(args)
    doc = graph_metrics(_read_graph(args.graph)).to_dict()
    doc["schema_version"] = 1
    _emit(doc)
    return EXIT_OK


def cmd_decompose_join(args) -> int:
    _need_json(args)
    factors = join_decompose(_read_graph(args.graph))
    _emit({"schema_version": 1, "factors": [graph_to_dict(f) for f in factors]})
    return EXIT_OK


def cmd_reduce(args) -> int:
    g = _read_graph(args.graph)
    e = normal_form(g, args.word)
    if args.format == "text":
        sys.stdout.write(str(e) + "\n")
    else:
        _emit({"schema_version": 1, "input": args.word, "normal_form": str(e), "length": len(e)})
    return EXIT_OK


def _write_complex(args, cx) -> None:
    if args.format == "dot":
        sys.stdout.write(cx.to_dot())
    elif args.summary:
        _emit(cx.summary())
    else:
        _emit(cx.to_dict())


def cmd_pl_build(args) -> int:
    _write_complex(args, build_PL(_read_graph(args.graph)))
    return EXIT_OK


def cmd_ball_build(args) -> int:
    _write_complex(args, build_davis_ball(_read_graph(args.graph), args.radius, budget=args.budget))
    return EXIT_OK


def cmd_label(args) -> int:
    g = _read_graph(args.graph)
    cx = _complex(args, g)
    base = cx.find_vertex(args.base) if args.base is not None else 0
    lab = label_complex(cx, base, args.start, improper=args.improper)
    if args.format == "dot":
        sys.stdout.write(lab.to_dot())
        return EXIT_OK
    doc = lab.to_dict()
    if args.summary:
        doc.pop("labels")
    doc["degrees"] = degree_report(cx, lab)
    _emit(doc)
    ok = lab.certificate["all_squares_cyclic"] and doc["degrees"]["ok"]
    return EXIT_OK if ok else EXIT_FAIL


def _parse_signs(text: str, n: int) -> list[int]:
    signs = [1 if c == "+" else -1 if c == "-" else None for c in text.strip()]
    if len(signs) != n or None in signs:
        raise InputError(f"start vertex must be {n} characters of + and -")
    return signs


def cmd_decompose_loop(args) -> int:
    _need_json(args)
    g = _read_graph(args.graph)
    cx = build_PL(g)
    start = cx.find_vertex(_parse_signs(args.start, g.n)) if args.start else 0
    gens = []
    for tok in args.generators.split():
        if tok not in g.index:
            raise InputError(f"unknown generator {tok!r}")
        gens.append(g.index[tok])
    path = path_from_generators(start, gens)
    d = decompose_loop(cx, path)
    doc = d.to_dict(cx)
    improper = cx.generator_colors is None
    r0 = (1, 2)
    doc["propagation_returns"] = propagate_path(cx, *r0, path, improper) == r0
    doc["factor_propagation_returns"] = all(propagate_path(cx, *r0, f.core, improper) == r0 for f in d.factors)
    _emit(doc)
    ok = doc["reconstructs"] and doc["propagation_returns"] and doc["factor_propagation_returns"]
    return EXIT_OK if ok else EXIT_FAIL


def _parse_ints(text: str | None, what: str) -> list[int]:
    if not text:
        raise InputError(f"{what} required")
    try:
        return [int(x) for x in text.replace(",", " ").split()]
    except ValueError:
        raise InputError(f"{what} must be integers") from None


def cmd_disk(args) -> int:
    _need_json(args)
    g = _read_graph(args.graph)
    ball = build_davis_ball(g, args.radius, budget=args.budget)
    m = bd.polygon_gonality(g)
    if args.action == "apartment":
        if args.from_square is None or args.to_square is None:
            raise InputError("apartment needs --from-square and --to-square")
        frag = bd.grow_apartment(ball, args.from_square, args.to_square, effort=args.effort, m=m)
        _emit(frag.to_dict())
        return EXIT_OK if frag.contains_both() and frag.tessellation_ok() else EXIT_FAIL
    disk = bd.CombinatorialDisk(ball, _parse_ints(args.squares, "--squares"), m)
    if args.action == "classify":
        doc = disk.to_dict()
        doc["geodesic_lint"] = bd.validate_geodesic_disk(disk)
        _emit(doc)
        return EXIT_OK
    if args.action == "convexify":
        out = bd.make_convex(disk)
    else:
        if args.vertex is None:
            raise InputError(f"{args.action} needs --vertex")
        v = ball.find_vertex(args.vertex)
        out = bd.extend_at_concave(disk, v) if args.action == "extend" else bd.engulf_vertex(disk, v)
    _emit(out.to_dict())
    return EXIT_OK


def _parse_verify(text: str) -> tuple[int, int]:
    vals = {"inj": 4, "gen": 8}
    for part in text.split(","):
        key, _, val = part.partition("=")
        if key.strip() not in vals or not val.strip().isdigit():
            raise InputError(f"bad --verify item {part!r}; expected inj=N,gen=N")
        vals[key.strip()] = int(val)
    return vals["inj"], vals["gen"]


def cmd_commensurate(args) -> int:
    g = _read_graph(args.graph)
    members = tuple(x.strip() for x in args.clique.split(",") if x.strip())
    k = CliqueSelection(g, members)
    gp = build_gamma_prime(g, k, debug=args.debug)
    if args.format == "dot":
        sys.stdout.write(serialize_graph(gp.graph, "dot"))
        return EXIT_OK
    doc = gp.to_dict()
    code = EXIT_OK
    if args.verify:
        inj, gen = _parse_verify(args.verify)
        rep = verify_commensuration(g, k, inj, gen, gp=gp)
        doc["report"] = rep.to_dict()
        code = EXIT_OK if rep.ok else EXIT_FAIL
    _emit(doc)
    return code


def cmd_qi_compare(args) -> int:
    _need_json(args)
    dec = qi_decide(_read_graph(args.first), _read_graph(args.second))
    _emit(dec.to_dict())
    return {QI: EXIT_OK, NOT_QI: EXIT_NEGATIVE, OUT_OF_CLASS: EXIT_OUT}[dec.verdict]


def cmd_class(args) -> int:
    _need_json(args)
    cert = class_membership(_read_graph(args.graph))
    _emit(cert.to_dict())
    return EXIT_OK if cert.in_class else EXIT_OUT


# -- parser ---------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="racg", description="Right-angled Coxeter groups of generalized polygons")
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, func, help_text, fmt=("json",)):
        sp = sub.add_parser(name, help=help_text)
        sp.set_defaults(func=func)
        sp.add_argument("--format", choices=fmt, default=fmt[0])
        return sp

    def graph_opt(sp, required=True):
        sp.add_argument("--graph", required=required, help="graph-JSON file, or - for stdin")

    def ball_opts(sp, radius_required=False):
        sp.add_argument("--radius", type=int, required=radius_required)
        sp.add_argument("--budget", type=int, default=2_000_000)

    sp = add("verify-polygon", cmd_verify_polygon, "check the generalized polygon axioms")
    sp.add_argument("graph", nargs="?", default="-", help="graph-JSON file (default stdin)")
    sp.add_argument("--max-direct-check", type=int, default=64)

    sp = add("catalog", cmd_catalog, "emit a catalog polygon", ("json", "dot"))
    sp.add_argument("name", choices=CATALOG)
    sp.add_argument("--q", type=int)
    sp.add_argument("--s", type=int)
    sp.add_argument("--t", type=int)

    sp = add("metrics", cmd_metrics, "girth, diameter, bipartition")
    sp.add_argument("graph", nargs="?", default="-")

    sp = add("decompose-join", cmd_decompose_join, "split a graph into join factors")
    sp.add_argument("graph", nargs="?", default="-")

    sp = add("class", cmd_class, "check membership in the classified family")
    sp.add_argument("graph", nargs="?", default="-")

    sp = add("reduce", cmd_reduce, "canonical normal form of a word", ("json", "text"))
    graph_opt(sp)
    sp.add_argument("--word", required=True)

    sp = add("pl-build", cmd_pl_build, "build the compact complex P_L", ("json", "dot"))
    graph_opt(sp)
    sp.add_argument("--summary", action="store_true")

    sp = add("ball-build", cmd_ball_build, "build a ball of the Davis complex", ("json", "dot"))
    graph_opt(sp)
    ball_opts(sp, radius_required=True)
    sp.add_argument("--summary", action="store_true")

    sp = add("label", cmd_label, "label the edges of P_L or a Davis ball", ("json", "dot"))
    graph_opt(sp)
    ball_opts(sp)
    sp.add_argument("--base", type=int)
    sp.add_argument("--start", type=int, default=1, choices=(1, 2, 3, 4))
    sp.add_argument("--improper", action="store_true", help="colour a non-bipartite graph breadth first")
    sp.add_argument("--summary", action="store_true")

    sp = add("decompose-loop", cmd_decompose_loop, "split a closed path in P_L into conjugated 4-cycles")
    graph_opt(sp)
    sp.add_argument("--generators", required=True, help="space-separated generator names of the loop")
    sp.add_argument("--start", help="start vertex as a string of + and - (default all +)")

    sp = add("disk", cmd_disk, "disk operations in a Davis ball")
    sp.add_argument("action", choices=("classify", "extend", "convexify", "engulf", "apartment"))
    graph_opt(sp)
    ball_opts(sp, radius_required=True)
    sp.add_argument("--squares", help="comma-separated square ids")
    sp.add_argument("--vertex", help="vertex id or word")
    sp.add_argument("--effort", type=int, default=6)
    sp.add_argument("--from-square", type=int)
    sp.add_argument("--to-square", type=int)

    sp = add("commensurate", cmd_commensurate, "build Gamma' for a clique", ("json", "dot"))
    graph_opt(sp)
    sp.add_argument("--clique", required=True, help="comma-separated clique vertices")
    sp.add_argument("--verify", help="radii as inj=N,gen=N")
    sp.add_argument("--debug", action="store_true", help="brute-force check of the edge rule")

    sp = add("qi-compare", cmd_qi_compare, "decide quasi-isometry within the class")
    sp.add_argument("first")
    sp.add_argument("second")
    return p


_INPUT_ERRORS = (InputError, GraphError, WordError, PolygonError, CommensurationError, ComplexError,
                 LabelingError, bd.DiskError)


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "vertex", None) is not None and args.vertex.lstrip("-").isdigit():
        args.vertex = int(args.vertex)
    try:
        return args.func(args)
    except BudgetExceeded as exc:
        err = {"error": "BudgetExceeded", "message": str(exc), "radius_reached": exc.radius_reached}
        code = EXIT_INPUT
    except bd.TruncationError as exc:
        err = {"error": "TruncationError", "message": str(exc), "missing": exc.missing}
        code = EXIT_FAIL
    except _INPUT_ERRORS as exc:
        err = {"error": type(exc).__name__, "message": str(exc)}
        loc = getattr(exc, "location", None)
        if loc:
            err["location"] = loc
        code = EXIT_INPUT
    sys.stderr.write(json.dumps(err) + "\n")
    return code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
