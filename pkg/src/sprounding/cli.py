"""Command-line entry point.

Exit codes: 0 = yes / passed, 1 = no / failed, 2 = usage or input error.
Every JSON output writes rationals as ``"p/q"`` strings.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from pathlib import Path
from typing import Optional, Sequence

from . import oracle, reduction
from .generators import quarter_tree, random_path_weights, random_tree
from .graph import (
    LEVELS,
    MODES,
    GraphFormatError,
    RootedTree,
    check_rounding,
    edge_key,
    format_weight,
    parse_graph,
    parse_weight,
    rounding_from_json,
    rounding_to_json,
    serialize_graph,
    verify_rounding,
)
from .paths import parse_path, path_subpath_errors, round_path
from .tree import decide, error_range_set, extract_rounding, minimize_epsilon

_LEVEL_ALIASES = {"oblivious": "path_oblivious", **{lvl: lvl for lvl in LEVELS}}


class UsageError(Exception):
    pass


def _epsilon(text: str) -> Fraction:
    try:
        return parse_weight(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _level(text: str) -> str:
    try:
        return _LEVEL_ALIASES[text]
    except KeyError:
        raise argparse.ArgumentTypeError(f"unknown level {text!r}") from None


def _pin(text: str):
    try:
        edge, value = text.split("=")
        u, v = (int(x) for x in edge.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"pin must look like 'u,v=up', got {text!r}") from None
    if value not in ("up", "down"):
        try:
            value = int(value)
        except ValueError:
            raise argparse.ArgumentTypeError(f"pin value must be up, down or an integer, got {value!r}") from None
    return edge_key(u, v), value


def _read(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None


def _write(path: Optional[str], text: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


def _emit(obj) -> None:
    sys.stdout.write(json.dumps(obj) + "\n")


def _load_graph(path: str):
    return parse_graph(_read(path))


def _load_tree(path: str, root: int = 0) -> RootedTree:
    graph = _load_graph(path)
    if root >= max(graph.vertex_count, 1):
        raise UsageError(f"root {root} is not a vertex")
    return RootedTree.from_graph(graph, root)


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def cmd_decide(args) -> int:
    tree = _load_tree(args.tree, args.root)
    ok = decide(tree, args.epsilon, args.mode)
    print("yes" if ok else "no")
    if args.show_ranges:
        if args.epsilon >= 2:
            print("# eps >= 2: answered by the 2-rounding, no range set computed")
        else:
            for lo, hi in error_range_set(tree, args.epsilon, args.mode).bounds():
                print(f"[{lo}, {hi}]")
    return 0 if ok else 1


def cmd_round(args) -> int:
    tree = _load_tree(args.tree, args.root)
    rounding = extract_rounding(tree, args.epsilon, args.mode)
    _emit({
        "epsilon": format_weight(args.epsilon),
        "mode": args.mode,
        "rounding": None if rounding is None else rounding_to_json(rounding),
    })
    return 0 if rounding is not None else 1


def cmd_minimize(args) -> int:
    tree = _load_tree(args.tree, args.root)
    eps, rounding = minimize_epsilon(tree)
    _emit({"epsilon": format_weight(eps), "mode": "closed", "rounding": rounding_to_json(rounding)})
    return 0


def cmd_verify(args) -> int:
    graph = _load_graph(args.graph)
    try:
        rounding = rounding_from_json(json.loads(_read(args.rounding)))
        check_rounding(graph, rounding)
    except (ValueError, KeyError, TypeError) as exc:
        raise UsageError(f"bad rounding: {exc}") from None
    report = verify_rounding(graph, rounding, args.epsilon, args.level, args.mode)
    if args.format == "json":
        print(report.to_json())
    else:
        print(f"level: {report.level_checked}")
        print(f"passed: {'yes' if report.passed else 'no'}")
        print(f"worst_error: {report.worst_error}")
        if report.witness:
            u, v, why = report.witness
            print(f"witness: {u} {v} {why}")
    return 0 if report.passed else 1


def cmd_path(args) -> int:
    weights = parse_path(_read(args.weights))
    rounded = round_path(weights, args.offset)
    lo, hi = path_subpath_errors(weights, rounded)
    _emit({"rounded": rounded, "min_error": format_weight(lo), "max_error": format_weight(hi)})
    return 0


def cmd_oracle(args) -> int:
    graph = _load_graph(args.graph)
    pins = dict(args.pin or [])
    if args.action == "min-eps":
        eps = oracle.brute_force_min_epsilon(graph, args.budget)
        _emit({"epsilon": format_weight(eps)})
        return 0
    if args.epsilon is None:
        raise UsageError(f"oracle {args.action} needs --epsilon")
    if args.action == "decide":
        ok, witness = oracle.brute_force_decide(
            graph, args.epsilon, args.level, args.mode, args.budget, pins
        )
    else:
        witness = oracle.backtracking_solve(graph, args.epsilon, args.level, args.mode, pins, args.budget)
        ok = witness is not None
    _emit({
        "admits": ok,
        "epsilon": format_weight(args.epsilon),
        "level": args.level,
        "mode": args.mode,
        "rounding": None if witness is None else rounding_to_json(witness),
    })
    return 0 if ok else 1


def _parse_assignment(text: str, n: int) -> dict[int, int]:
    bits = [b for b in text.replace(",", " ").split()]
    if len(bits) == 1 and len(bits[0]) == n and set(bits[0]) <= {"0", "1"}:
        bits = list(bits[0])
    if len(bits) != n or not set(bits) <= {"0", "1"}:
        raise UsageError(f"assignment needs {n} values of 0/1")
    return {i + 1: int(b) for i, b in enumerate(bits)}


def cmd_reduce(args) -> int:
    if args.assignment is not None and not args.rounding and args.output in (None, "-"):
        raise UsageError("--assignment with the graph on stdout needs --rounding FILE")
    try:
        original = reduction.parse_dimacs(_read(args.cnf))
        formula = original if args.no_normalize else reduction.normalize_cnf(original)
        g = reduction.build_reduction(formula)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    psi = None
    if args.assignment is not None:
        psi = _parse_assignment(args.assignment, original.variable_count)
        # fresh variables from normalisation are satisfied by all-false
        for i in range(original.variable_count + 1, formula.variable_count + 1):
            psi[i] = 0
    _write(args.output, serialize_graph(g.graph))
    if args.sidecar:
        Path(args.sidecar).write_text(reduction.sidecar_json(g) + "\n")
    if psi is not None:
        rounding = reduction.rounding_from_assignment(g, psi)
        text = json.dumps({"rounding": rounding_to_json(rounding)}) + "\n"
        if args.rounding:
            Path(args.rounding).write_text(text)
        else:
            sys.stdout.write(text)
    return 0


def cmd_decode(args) -> int:
    graph = _load_graph(args.graph)
    data = json.loads(_read(args.sidecar))
    g = reduction.GadgetGraph.from_json(graph, data)
    try:
        rounding = rounding_from_json(json.loads(_read(args.rounding)))
        psi = reduction.assignment_from_rounding(g, rounding)
    except (ValueError, KeyError) as exc:
        raise UsageError(f"bad rounding: {exc}") from None
    _emit({"assignment": {str(i): x for i, x in sorted(psi.items())}})
    return 0


def cmd_gen(args) -> int:
    if args.n < 1:
        raise UsageError("-n must be at least 1")
    if args.kind == "path":
        weights = random_path_weights(args.n, args.seed, args.max_den, args.max_value)
        sys.stdout.write(" ".join(format_weight(w) for w in weights) + "\n")
        return 0
    if args.kind == "quarter":
        graph = quarter_tree(args.n, args.seed)
    else:
        graph = random_tree(args.n, args.seed, args.max_den, args.max_value)
    sys.stdout.write(f"# random tree seed={args.seed} n={args.n}\n" + serialize_graph(graph))
    return 0


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sprounding",
        description="Shortest-path preserving integer roundings of rational edge weights.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def tree_cmd(name, help_, needs_eps=True):
        p = sub.add_parser(name, help=help_)
        if needs_eps:
            p.add_argument("--epsilon", type=_epsilon, required=True, help="error threshold, e.g. 1, 7/8, 0.75")
            p.add_argument("--mode", choices=MODES, default="strict")
        p.add_argument("--root", type=int, default=0)
        p.add_argument("tree", help="edge-list file of a tree, '-' for stdin")
        return p

    p = tree_cmd("decide", "does the tree admit an eps-rounding (exit 0/1)")
    p.add_argument("--show-ranges", action="store_true", help="print the root error range set")
    p.set_defaults(func=cmd_decide)
    tree_cmd("round", "emit an eps-rounding of a tree as JSON").set_defaults(func=cmd_round)
    tree_cmd("minimize", "smallest achievable max path error and a witness", needs_eps=False).set_defaults(
        func=cmd_minimize
    )

    p = sub.add_parser("verify", help="check a rounding of any graph")
    p.add_argument("--epsilon", type=_epsilon, required=True)
    p.add_argument("--mode", choices=MODES, default="strict")
    p.add_argument("--level", type=_level, default="strong", help="oblivious, weak or strong")
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.add_argument("graph")
    p.add_argument("rounding", help="JSON list of [u, v, value] or {\"rounding\": [...]}")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("path", help="1-round a path given as whitespace-separated weights")
    p.add_argument("--offset", type=_epsilon, default=Fraction(1, 2))
    p.add_argument("weights", help="file of weights, '-' for stdin")
    p.set_defaults(func=cmd_path)

    p = sub.add_parser("oracle", help="exhaustive and backtracking reference solvers")
    p.add_argument("action", choices=("decide", "min-eps", "solve"))
    p.add_argument("graph")
    p.add_argument("--epsilon", type=_epsilon)
    p.add_argument("--mode", choices=MODES, default="strict")
    p.add_argument("--level", type=_level, default="strong")
    p.add_argument("--pin", type=_pin, action="append", metavar="U,V=up|down")
    p.add_argument("--budget", type=int, default=None)
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("reduce", help="build the gadget graph of a DIMACS 3-CNF formula")
    p.add_argument("cnf")
    p.add_argument("--output", "-o", help="graph file (default stdout)")
    p.add_argument("--sidecar", help="write gadget roles and anchors as JSON")
    p.add_argument("--assignment", help="0/1 values for x1..xn; emits the encoding rounding")
    p.add_argument("--rounding", help="file for the rounding produced by --assignment")
    p.add_argument("--no-normalize", action="store_true")
    p.set_defaults(func=cmd_reduce)

    p = sub.add_parser("decode", help="read a truth assignment off a rounding of a gadget graph")
    p.add_argument("graph")
    p.add_argument("sidecar")
    p.add_argument("rounding")
    p.set_defaults(func=cmd_decode)

    p = sub.add_parser("gen", help="seeded random tree or path")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("-n", type=int, default=10, help="vertices (tree) or edges (path)")
    p.add_argument("--max-den", type=int, default=100)
    p.add_argument("--max-value", type=int, default=10)
    p.add_argument("--kind", choices=("tree", "quarter", "path"), default="tree")
    p.set_defaults(func=cmd_gen)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "budget", 0) is None:
        args.budget = oracle.DEFAULT_BUDGET if args.action != "solve" else oracle.DEFAULT_NODE_BUDGET
    try:
        return args.func(args)
    except (UsageError, GraphFormatError, oracle.BudgetExceeded) as exc:
        print(f"sprounding {args.command}: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        # not a tree, bad epsilon for the mode, and similar input problems
        print(f"sprounding {args.command}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
