"""Brute-force and backtracking ground truth for small instances.

Nothing here uses the tree DP.  Exhaustive searches walk the Cartesian
product of per-edge candidate integers; on forests the product is screened
in numpy blocks (paths are unique there, so a rounding passes iff every
pair's path error is in bounds), and any reported witness is re-checked
with the general verifier.
"""

from __future__ import annotations

import itertools
import math
from fractions import Fraction
from typing import Iterator, Mapping, Optional, Union

import numpy as np

from .graph import (
    LEVELS,
    Edge,
    Rounding,
    RoundingChecker,
    WeightedGraph,
    _common_denominator,
    _dijkstra,
    _scaled,
    _ShortestPathDag,
    check_epsilon,
    edge_key,
    within,
)
from .paths import floor_fraction

DEFAULT_BUDGET = 2 ** 24
DEFAULT_NODE_BUDGET = 10 ** 7
_BLOCK = 1 << 15

Pin = Union[int, str]


class BudgetExceeded(RuntimeError):
    def __init__(self, size: int, budget: int, what: str = "candidate product"):
        super().__init__(f"{what} {size} exceeds budget {budget}")
        self.size = size
        self.budget = budget


def candidate_domain(weight, eps, comparison: str = "strict") -> list[int]:
    """Non-negative integers within eps of ``weight`` (open or closed interval)."""
    eps = check_epsilon(eps, comparison)
    w = Fraction(weight)
    lo, hi = w - eps, w + eps
    if comparison == "strict":
        first = floor_fraction(lo) + 1
        last = -floor_fraction(-hi) - 1
    else:
        first = -floor_fraction(-lo)
        last = floor_fraction(hi)
    return list(range(max(first, 0), last + 1))


def resolve_pin(weight: Fraction, pin: Pin) -> int:
    if pin == "up":
        return -floor_fraction(-Fraction(weight))
    if pin == "down":
        return floor_fraction(Fraction(weight))
    if isinstance(pin, int) and not isinstance(pin, bool):
        return pin
    raise ValueError(f"pin must be 'up', 'down' or an integer, got {pin!r}")


def candidate_domains(
    graph: WeightedGraph, eps, comparison: str = "strict", pins: Optional[Mapping[Edge, Pin]] = None
) -> dict[Edge, list[int]]:
    domains = {e: candidate_domain(w, eps, comparison) for e, w in graph.edges.items()}
    for (u, v), pin in (pins or {}).items():
        e = edge_key(u, v)
        if e not in domains:
            raise ValueError(f"pinned edge {e} not in graph")
        value = resolve_pin(graph.edges[e], pin)
        domains[e] = [value] if value in domains[e] else []
    return domains


def _product_size(domains: Mapping[Edge, list[int]]) -> int:
    return math.prod(len(d) for d in domains.values())


def enumerate_roundings(
    graph: WeightedGraph,
    eps,
    comparison: str = "strict",
    budget: int = DEFAULT_BUDGET,
    pins: Optional[Mapping[Edge, Pin]] = None,
) -> Iterator[Rounding]:
    """Every assignment from the candidate domains, lexicographically (first edge slowest)."""
    domains = candidate_domains(graph, eps, comparison, pins)
    size = _product_size(domains)
    if size > budget:
        raise BudgetExceeded(size, budget)
    edges = list(domains)
    for values in itertools.product(*(domains[e] for e in edges)):
        yield dict(zip(edges, values))


def passing_roundings(
    graph: WeightedGraph,
    eps,
    level: str = "strong",
    comparison: str = "strict",
    budget: int = DEFAULT_BUDGET,
    pins: Optional[Mapping[Edge, Pin]] = None,
) -> Iterator[Rounding]:
    checker = RoundingChecker(graph)
    for rounding in enumerate_roundings(graph, eps, comparison, budget, pins):
        if checker.passes(rounding, eps, level, comparison):
            yield rounding


# ---------------------------------------------------------------------------
# vectorised screening on forests
# ---------------------------------------------------------------------------


def _forest_pair_incidence(graph: WeightedGraph) -> np.ndarray:
    """0/1 matrix: one row per connected vertex pair, one column per edge on its path."""
    n = graph.vertex_count
    rows = []
    for s in range(n):
        via: dict[int, Optional[int]] = {s: None}
        prev: dict[int, int] = {}
        queue = [s]
        for x in queue:
            for y, i in graph.adjacency[x]:
                if y not in via:
                    via[y] = i
                    prev[y] = x
                    queue.append(y)
        for t in sorted(via):
            if t <= s:
                continue
            row = np.zeros(len(graph.edges), dtype=np.int64)
            x = t
            while x != s:
                row[via[x]] = 1
                x = prev[x]
            rows.append(row)
    if not rows:
        return np.zeros((0, len(graph.edges)), dtype=np.int64)
    return np.vstack(rows)


def _forest_blocks(graph: WeightedGraph, domains: Mapping[Edge, list[int]], scale: int):
    """Yield ``(start, values, errors)``: rounded values per row and scaled pair errors."""
    edges = graph.edge_list
    inc = _forest_pair_incidence(graph)
    w = np.array(_scaled([graph.edges[e] for e in edges], scale), dtype=object)
    lengths = inc.astype(object) @ w if len(edges) else np.zeros(inc.shape[0], dtype=object)
    sizes = [len(domains[e]) for e in edges]
    total = math.prod(sizes)
    biggest = max([abs(x) for d in domains.values() for x in d] + [0]) + 1
    span = (biggest * scale + max([abs(int(x)) for x in lengths] + [0])) * max(len(edges), 1)
    dtype = np.int64 if span < 2 ** 62 else object
    inc_t = inc.T.astype(dtype)
    lengths = np.array(lengths, dtype=dtype)
    doms = [np.array(domains[e], dtype=np.int64) for e in edges]
    for start in range(0, total, _BLOCK):
        idx = np.arange(start, min(total, start + _BLOCK), dtype=np.int64)
        cols = []
        for d in reversed(doms):
            cols.append(d[idx % len(d)])
            idx = idx // len(d)
        values = np.stack(cols[::-1], axis=1) if cols else np.zeros((len(idx), 0), dtype=np.int64)
        scaled_vals = values.astype(dtype) * scale
        errors = scaled_vals @ inc_t - lengths
        yield start, values, errors


def _forest_search(graph, eps, comparison, domains):
    """First passing rounding on a forest, or None."""
    eps = Fraction(eps)
    scale = math.lcm(_common_denominator(graph.edges.values()), eps.denominator)
    bound = eps.numerator * (scale // eps.denominator)
    for _, values, errors in _forest_blocks(graph, domains, scale):
        if errors.shape[1] == 0:
            ok = np.ones(errors.shape[0], dtype=bool)
        elif comparison == "strict":
            ok = np.all((errors > -bound) & (errors < bound), axis=1)
        else:
            ok = np.all((errors >= -bound) & (errors <= bound), axis=1)
        hits = np.flatnonzero(ok)
        if hits.size:
            row = values[hits[0]]
            return {e: int(x) for e, x in zip(graph.edge_list, row)}
    return None


def brute_force_decide(
    graph: WeightedGraph,
    eps,
    level: str = "strong",
    comparison: str = "strict",
    budget: int = DEFAULT_BUDGET,
    pins: Optional[Mapping[Edge, Pin]] = None,
) -> tuple[bool, Optional[Rounding]]:
    """Whether any candidate rounding passes verification; returns a witness too."""
    if level not in LEVELS:
        raise ValueError(f"level must be one of {LEVELS}, got {level!r}")
    eps = check_epsilon(eps, comparison)
    domains = candidate_domains(graph, eps, comparison, pins)
    size = _product_size(domains)
    if size > budget:
        raise BudgetExceeded(size, budget)
    if size == 0:
        return False, None
    if graph.is_forest():
        found = _forest_search(graph, eps, comparison, domains)
        if found is not None:
            report = RoundingChecker(graph, forest_fast_path=False).check(found, eps, level, comparison)
            assert report.passed, report
        return found is not None, found
    for rounding in passing_roundings(graph, eps, level, comparison, budget, pins):
        return True, rounding
    return False, None


def count_passing(
    graph: WeightedGraph,
    eps,
    level: str = "strong",
    comparison: str = "strict",
    budget: int = DEFAULT_BUDGET,
    pins: Optional[Mapping[Edge, Pin]] = None,
) -> int:
    return sum(1 for _ in passing_roundings(graph, eps, level, comparison, budget, pins))


def brute_force_min_epsilon(graph: WeightedGraph, budget: int = DEFAULT_BUDGET) -> Fraction:
    """Least achievable maximum |path error| on a tree, by exhaustive search.

    Candidates per edge are the integers strictly within 2 of its weight; a
    2-rounding always exists, so the optimum lies inside that product.
    """
    if not graph.is_forest():
        raise ValueError("brute_force_min_epsilon expects a tree")
    domains = candidate_domains(graph, 2, "strict")
    size = _product_size(domains)
    if size > budget:
        raise BudgetExceeded(size, budget)
    scale = _common_denominator(graph.edges.values())
    best = None
    for _, _, errors in _forest_blocks(graph, domains, scale):
        if errors.shape[1] == 0:
            return Fraction(0)
        row_worst = np.max(np.abs(errors), axis=1)
        m = int(row_worst.min())
        if best is None or m < best:
            best = m
    return Fraction(best if best is not None else 0, scale)


# ---------------------------------------------------------------------------
# backtracking
# ---------------------------------------------------------------------------


class _PairCheck:
    """Condition-1 check for one vertex pair, runnable once its edges are fixed."""

    __slots__ = ("u", "v", "dist", "edges", "routes")

    def __init__(self, u, v, dist, edges, routes):
        self.u, self.v, self.dist = u, v, dist
        self.edges = edges      # tight DAG edges (x, y, idx) in topological order, or None
        self.routes = routes    # explicit edge-index routes when zero weights make cycles

    def extrema(self, r):
        if self.routes is not None:
            sums = [sum(r[i] for i in route) for route in self.routes]
            return min(sums), max(sums)
        lo = {self.u: 0}
        hi = {self.u: 0}
        for x, y, i in self.edges:
            a, b = lo[x] + r[i], hi[x] + r[i]
            if y not in lo or a < lo[y]:
                lo[y] = a
            if y not in hi or b > hi[y]:
                hi[y] = b
        return lo[self.v], hi[self.v]


def _pair_checks(graph: WeightedGraph, scale: int):
    n = graph.vertex_count
    adj = graph.adjacency
    w = _scaled([graph.edges[e] for e in graph.edge_list], scale)
    dists = [_dijkstra(adj, w, s, n)[0] for s in range(n)]
    checks = []
    through = [0] * len(w)
    for u in range(n):
        dag = _ShortestPathDag(adj, w, u, n)
        for v in range(u + 1, n):
            if dag.dist[v] is None:
                continue
            total = dag.dist[v]
            dv = dists[v]
            if dag.paths is not None:
                routes = dag.paths[v]
                used = sorted({i for route in routes for i in route})
                checks.append((used, _PairCheck(u, v, total, None, routes)))
                for route in routes:
                    for i in route:
                        through[i] += 1
                continue
            # tight edges lying on some shortest u-v path, in settle order
            on = []
            for y in dag.order:
                if dv[y] is None or dag.dist[y] + dv[y] != total:
                    continue
                for x, i in dag.tight_in[y]:
                    if dv[x] is not None and dag.dist[x] + dv[x] == total:
                        on.append((x, y, i))
            checks.append((sorted({i for _, _, i in on}), _PairCheck(u, v, total, on, None)))
            # shortest-path counts through each edge
            count_from = {u: 1}
            for x, y, i in on:
                count_from[y] = count_from.get(y, 0) + count_from[x]
            count_to = {v: 1}
            for x, y, i in reversed(on):
                count_to[x] = count_to.get(x, 0) + count_to[y]
            for x, y, i in on:
                through[i] += count_from[x] * count_to[y]
    return checks, through


def backtracking_solutions(
    graph: WeightedGraph,
    eps,
    level: str = "strong",
    comparison: str = "strict",
    pins: Optional[Mapping[Edge, Pin]] = None,
    budget: int = DEFAULT_NODE_BUDGET,
) -> Iterator[Rounding]:
    """Depth-first search over edge values, pruning on fully assigned vertex pairs.

    Edges are assigned in descending order of how many shortest paths use
    them.  A pair is checked as soon as every edge on its shortest paths is
    fixed; complete assignments are then checked at the requested level.
    """
    if level not in LEVELS:
        raise ValueError(f"level must be one of {LEVELS}, got {level!r}")
    eps = check_epsilon(eps, comparison)
    domains = candidate_domains(graph, eps, comparison, pins)
    edges = graph.edge_list
    if any(not d for d in domains.values()):
        return
    scale = math.lcm(_common_denominator(graph.edges.values()), eps.denominator)
    bound = eps.numerator * (scale // eps.denominator)
    checks, through = _pair_checks(graph, scale)
    order = sorted(range(len(edges)), key=lambda i: (-through[i], i))
    position = {i: p for p, i in enumerate(order)}
    ready: list[list[_PairCheck]] = [[] for _ in order]
    for used, check in checks:
        ready[max(position[i] for i in used)].append(check)
    verifier = RoundingChecker(graph) if level != "path_oblivious" else None

    r = [0] * len(edges)
    value_lists = [[x * scale for x in domains[edges[i]]] for i in order]
    nodes = 0
    depth = 0
    cursors = [0] * (len(order) + 1)
    if not order:
        yield {}
        return
    while depth >= 0:
        if depth == len(order):
            rounding = {edges[i]: r[i] // scale for i in range(len(edges))}
            if verifier is None or verifier.passes(rounding, eps, level, comparison):
                yield rounding
            depth -= 1
            continue
        c = cursors[depth]
        if c == len(value_lists[depth]):
            cursors[depth] = 0
            depth -= 1
            continue
        cursors[depth] = c + 1
        nodes += 1
        if nodes > budget:
            raise BudgetExceeded(nodes, budget, "search nodes")
        r[order[depth]] = value_lists[depth][c]
        ok = True
        for check in ready[depth]:
            lo, hi = check.extrema(r)
            if not (within(lo - check.dist, bound, comparison) and within(hi - check.dist, bound, comparison)):
                ok = False
                break
        if ok:
            depth += 1


def backtracking_solve(
    graph: WeightedGraph,
    eps,
    level: str = "strong",
    comparison: str = "strict",
    pins: Optional[Mapping[Edge, Pin]] = None,
    budget: int = DEFAULT_NODE_BUDGET,
) -> Optional[Rounding]:
    """First rounding found by :func:`backtracking_solutions`, or None."""
    return next(backtracking_solutions(graph, eps, level, comparison, pins, budget), None)
