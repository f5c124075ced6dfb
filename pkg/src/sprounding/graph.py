"""Exact-weight graphs, shortest paths, and the rounding verifier.

Weights are :class:`fractions.Fraction` values.  Every decision made here
(distances, tight edges, error bounds) is taken on integers obtained by
scaling all weights with one common denominator, so results are exact.
"""

from __future__ import annotations

import heapq
import io
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Mapping, Optional, Sequence, Union

Edge = tuple[int, int]
Rounding = dict[Edge, int]

LEVELS = ("path_oblivious", "weak", "strong")
MODES = ("strict", "closed")

_VERTEX_HINT = "# vertices:"


class GraphFormatError(ValueError):
    """Malformed edge-list input; carries the offending line number."""

    def __init__(self, lineno: int, message: str):
        super().__init__(f"line {lineno}: {message}")
        self.lineno = lineno


def edge_key(u: int, v: int) -> Edge:
    return (u, v) if u < v else (v, u)


def parse_weight(text: str) -> Fraction:
    """Parse ``"2.5"``, ``"3.6"`` or ``"1/3"`` into an exact non-negative Fraction."""
    try:
        w = Fraction(text.strip())
    except (ValueError, ZeroDivisionError) as exc:
        raise ValueError(f"invalid weight {text!r}") from exc
    if w < 0:
        raise ValueError(f"negative weight {text!r}")
    return w


def format_weight(w: Fraction) -> str:
    return str(Fraction(w))


def check_mode(comparison: str) -> None:
    if comparison not in MODES:
        raise ValueError(f"comparison must be one of {MODES}, got {comparison!r}")


def check_epsilon(eps: Fraction, comparison: str) -> Fraction:
    """Normalise ``eps``; strict mode needs ``eps > 0``, closed mode ``eps >= 0``."""
    check_mode(comparison)
    eps = Fraction(eps)
    if eps < 0 or (eps == 0 and comparison == "strict"):
        raise ValueError(f"epsilon must be positive, got {eps}")
    return eps


def within(err, bound, comparison: str) -> bool:
    """True iff ``-bound < err < bound`` (strict) or ``-bound <= err <= bound`` (closed)."""
    if comparison == "strict":
        return -bound < err < bound
    return -bound <= err <= bound


@dataclass(frozen=True)
class WeightedGraph:
    """Undirected simple graph on vertices ``0 .. vertex_count-1``.

    ``edges`` maps canonical keys ``(u, v)`` with ``u < v`` to weights.
    ``labels`` optionally tags edges with a gadget role.
    """

    vertex_count: int
    edges: Mapping[Edge, Fraction]
    labels: Mapping[Edge, str] = field(default_factory=dict)

    @classmethod
    def from_edges(
        cls,
        triples: Iterable[tuple[int, int, object]],
        vertex_count: Optional[int] = None,
        labels: Optional[Mapping[Edge, str]] = None,
    ) -> "WeightedGraph":
        edges: dict[Edge, Fraction] = {}
        top = -1
        for u, v, w in triples:
            if u == v:
                raise ValueError(f"self-loop at vertex {u}")
            if u < 0 or v < 0:
                raise ValueError(f"negative vertex id in edge ({u}, {v})")
            key = edge_key(u, v)
            if key in edges:
                raise ValueError(f"duplicate edge {key}")
            w = w if isinstance(w, Fraction) else parse_weight(str(w))
            if w < 0:
                raise ValueError(f"negative weight on edge {key}")
            edges[key] = w
            top = max(top, key[1])
        n = top + 1 if vertex_count is None else vertex_count
        if top >= n:
            raise ValueError(f"vertex id {top} outside [0, {n})")
        labels = dict(labels or {})
        for key in labels:
            if key not in edges:
                raise ValueError(f"label on missing edge {key}")
        return cls(n, dict(sorted(edges.items())), labels)

    @cached_property
    def edge_list(self) -> list[Edge]:
        return list(self.edges)

    @cached_property
    def edge_index(self) -> dict[Edge, int]:
        return {e: i for i, e in enumerate(self.edge_list)}

    @cached_property
    def adjacency(self) -> list[list[tuple[int, int]]]:
        """``adjacency[x]`` lists ``(neighbour, edge index)`` pairs."""
        adj: list[list[tuple[int, int]]] = [[] for _ in range(self.vertex_count)]
        for i, (u, v) in enumerate(self.edge_list):
            adj[u].append((v, i))
            adj[v].append((u, i))
        return adj

    @cached_property
    def components(self) -> list[int]:
        comp = [-1] * self.vertex_count
        c = 0
        for s in range(self.vertex_count):
            if comp[s] >= 0:
                continue
            comp[s] = c
            stack = [s]
            while stack:
                x = stack.pop()
                for y, _ in self.adjacency[x]:
                    if comp[y] < 0:
                        comp[y] = c
                        stack.append(y)
            c += 1
        return comp

    def is_forest(self) -> bool:
        ncomp = len(set(self.components))
        return len(self.edges) == self.vertex_count - ncomp

    def is_tree(self) -> bool:
        return self.vertex_count >= 1 and self.is_forest() and len(set(self.components)) == 1

    def weight(self, u: int, v: int) -> Fraction:
        return self.edges[edge_key(u, v)]

    def induced_subgraph(self, vertices: Iterable[int]) -> tuple["WeightedGraph", list[int]]:
        """Subgraph on ``vertices`` relabelled to ``0..k-1``; also returns the old ids."""
        old = sorted(set(vertices))
        new = {v: i for i, v in enumerate(old)}
        triples = [
            (new[u], new[v], w) for (u, v), w in self.edges.items() if u in new and v in new
        ]
        labels = {
            edge_key(new[u], new[v]): tag
            for (u, v), tag in self.labels.items()
            if u in new and v in new
        }
        return WeightedGraph.from_edges(triples, len(old), labels), old


def parse_graph(text: Union[str, bytes], vertex_count: Optional[int] = None) -> WeightedGraph:
    """Parse the edge-list format: ``u v w`` per line, ``#`` comments.

    A comment of the form ``# vertices: N`` fixes the vertex count (written by
    :func:`serialize_graph` so that isolated trailing vertices survive).
    """
    if isinstance(text, bytes):
        text = text.decode("utf-8")
    edges: dict[Edge, Fraction] = {}
    hint = None
    top = -1
    for lineno, raw in enumerate(io.StringIO(text), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            if line.startswith(_VERTEX_HINT):
                try:
                    hint = int(line[len(_VERTEX_HINT):])
                except ValueError:
                    raise GraphFormatError(lineno, "bad vertex count") from None
            continue
        parts = line.split()
        if len(parts) != 3:
            raise GraphFormatError(lineno, f"expected 'u v w', got {line!r}")
        try:
            u, v = int(parts[0]), int(parts[1])
        except ValueError:
            raise GraphFormatError(lineno, f"bad vertex id in {line!r}") from None
        if u < 0 or v < 0:
            raise GraphFormatError(lineno, "vertex ids must be non-negative")
        if u == v:
            raise GraphFormatError(lineno, f"self-loop at vertex {u}")
        try:
            w = parse_weight(parts[2])
        except ValueError as exc:
            raise GraphFormatError(lineno, str(exc)) from None
        key = edge_key(u, v)
        if key in edges:
            raise GraphFormatError(lineno, f"duplicate edge {key}")
        edges[key] = w
        top = max(top, key[1])
    n = vertex_count if vertex_count is not None else hint
    if n is None:
        n = top + 1
    if top >= n:
        raise GraphFormatError(0, f"vertex id {top} outside declared count {n}")
    return WeightedGraph(n, dict(sorted(edges.items())))


def serialize_graph(graph: WeightedGraph) -> str:
    lines = [f"{_VERTEX_HINT} {graph.vertex_count}"]
    lines += [f"{u} {v} {format_weight(w)}" for (u, v), w in graph.edges.items()]
    return "\n".join(lines) + "\n"


def check_rounding(graph: WeightedGraph, rounding: Mapping[Edge, int]) -> None:
    if set(rounding) != set(graph.edges):
        missing = set(graph.edges) - set(rounding)
        extra = set(rounding) - set(graph.edges)
        raise ValueError(f"rounding domain mismatch (missing {sorted(missing)}, extra {sorted(extra)})")
    for e, x in rounding.items():
        if isinstance(x, bool) or not isinstance(x, int) or x < 0:
            raise ValueError(f"rounded weight of {e} must be a non-negative integer, got {x!r}")


def rounding_to_json(rounding: Mapping[Edge, int]) -> list[list[int]]:
    return [[u, v, int(x)] for (u, v), x in sorted(rounding.items())]


def rounding_from_json(data) -> Rounding:
    if isinstance(data, dict):
        data = data["rounding"]
    return {edge_key(int(u), int(v)): int(x) for u, v, x in data}


# ---------------------------------------------------------------------------
# shortest paths on scaled integer weights
# ---------------------------------------------------------------------------


def _common_denominator(values: Iterable[Fraction]) -> int:
    lcm = 1
    for w in values:
        lcm = math.lcm(lcm, Fraction(w).denominator)
    return lcm


def _scaled(weights: Sequence[Fraction], scale: int) -> list[int]:
    return [w.numerator * (scale // w.denominator) for w in weights]


def _dijkstra(adj, weights: Sequence[int], source: int, n: int):
    """Returns ``(dist, order)``; ``order`` lists settled vertices by distance."""
    dist: list[Optional[int]] = [None] * n
    dist[source] = 0
    done = [False] * n
    order = []
    heap = [(0, source)]
    while heap:
        d, x = heapq.heappop(heap)
        if done[x]:
            continue
        done[x] = True
        order.append(x)
        for y, i in adj[x]:
            nd = d + weights[i]
            dy = dist[y]
            if dy is None or nd < dy:
                dist[y] = nd
                heapq.heappush(heap, (nd, y))
    return dist, order


class _ShortestPathDag:
    """Shortest-path structure from one source under a primary weighting.

    ``extrema(secondary)`` returns per-vertex min and max of the secondary
    weight over all primary-shortest simple paths.  With positive primary
    weights the tight edges form a DAG and a DP over the settle order does
    it.  Zero-weight tight edges make the tight graph cyclic; then simple
    paths are enumerated explicitly instead.
    """

    __slots__ = ("source", "dist", "order", "tight_in", "paths")

    def __init__(self, adj, primary: Sequence[int], source: int, n: int):
        self.source = source
        self.dist, self.order = _dijkstra(adj, primary, source, n)
        dist = self.dist
        tight_in: list[list[tuple[int, int]]] = [[] for _ in range(n)]
        cyclic = False
        for y in self.order:
            dy = dist[y]
            for x, i in adj[y]:
                if dist[x] is not None and dist[x] + primary[i] == dy:
                    tight_in[y].append((x, i))
                    if primary[i] == 0:
                        cyclic = True
        self.tight_in = tight_in
        self.paths = self._enumerate(adj, primary) if cyclic else None

    def _enumerate(self, adj, primary):
        # simple paths along tight edges; only reached with zero-weight edges
        dist = self.dist
        paths: dict[int, list[list[int]]] = {self.source: [[]]}
        on_path = {self.source}
        stack = [(self.source, iter(adj[self.source]), [])]
        while stack:
            x, it, edges = stack[-1]
            advanced = False
            for y, i in it:
                if y in on_path or dist[x] + primary[i] != dist[y]:
                    continue
                route = edges + [i]
                paths.setdefault(y, []).append(route)
                on_path.add(y)
                stack.append((y, iter(adj[y]), route))
                advanced = True
                break
            if not advanced:
                stack.pop()
                on_path.discard(x)
        return paths

    def extrema(self, secondary: Sequence[int]):
        n = len(self.dist)
        lo: list[Optional[int]] = [None] * n
        hi: list[Optional[int]] = [None] * n
        if self.paths is not None:
            for y, routes in self.paths.items():
                sums = [sum(secondary[i] for i in r) for r in routes]
                lo[y], hi[y] = min(sums), max(sums)
            return lo, hi
        lo[self.source] = hi[self.source] = 0
        tight_in = self.tight_in
        for y in self.order[1:]:
            best_lo = best_hi = None
            for x, i in tight_in[y]:
                s = secondary[i]
                a, b = lo[x] + s, hi[x] + s
                if best_lo is None or a < best_lo:
                    best_lo = a
                if best_hi is None or b > best_hi:
                    best_hi = b
            lo[y], hi[y] = best_lo, best_hi
        return lo, hi


def all_pairs_shortest(
    graph: WeightedGraph, weights: Optional[Mapping[Edge, int]] = None
) -> list[list[Optional[Fraction]]]:
    """Exact distance matrix; ``None`` marks unreachable pairs.

    ``weights`` defaults to the graph's own weights; pass a rounding to get
    distances under the rounded weights.
    """
    if weights is None:
        raw = [graph.edges[e] for e in graph.edge_list]
    else:
        raw = [Fraction(weights[e]) for e in graph.edge_list]
    scale = _common_denominator(raw)
    w = _scaled(raw, scale)
    out = []
    for s in range(graph.vertex_count):
        dist, _ = _dijkstra(graph.adjacency, w, s, graph.vertex_count)
        out.append([None if d is None else Fraction(d, scale) for d in dist])
    return out


def shortest_path_error_extrema(
    graph: WeightedGraph, rounding: Mapping[Edge, int], u: int, v: int
) -> tuple[Fraction, Fraction]:
    """Min and max of ``rounded(pi) - weight(pi)`` over all shortest u-v paths."""
    raw = [graph.edges[e] for e in graph.edge_list]
    scale = _common_denominator(raw)
    w = _scaled(raw, scale)
    r = [rounding[e] * scale for e in graph.edge_list]
    dag = _ShortestPathDag(graph.adjacency, w, u, graph.vertex_count)
    if dag.dist[v] is None:
        raise ValueError(f"vertices {u} and {v} are not connected")
    lo, hi = dag.extrema(r)
    d = dag.dist[v]
    return Fraction(lo[v] - d, scale), Fraction(hi[v] - d, scale)


# ---------------------------------------------------------------------------
# verification
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class VerificationReport:
    level_checked: str
    passed: bool
    worst_error: Fraction
    witness: Optional[tuple[int, int, str]] = None

    def to_dict(self) -> dict:
        return {
            "level": self.level_checked,
            "passed": self.passed,
            "worst_error": str(self.worst_error),
            "witness": None if self.witness is None else {
                "u": self.witness[0], "v": self.witness[1], "description": self.witness[2],
            },
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    @classmethod
    def from_dict(cls, data: dict) -> "VerificationReport":
        wit = data.get("witness")
        return cls(
            data["level"],
            bool(data["passed"]),
            Fraction(data["worst_error"]),
            None if wit is None else (wit["u"], wit["v"], wit["description"]),
        )


class RoundingChecker:
    """Verifier that precomputes everything depending only on the original weights.

    Build one per graph and call :meth:`check` for many candidate roundings;
    the oracle's exhaustive searches rely on this.
    """

    def __init__(self, graph: WeightedGraph, forest_fast_path: bool = True):
        self.graph = graph
        self.n = graph.vertex_count
        self.raw = [graph.edges[e] for e in graph.edge_list]
        self.forest = forest_fast_path and graph.is_forest()
        self._dags: dict[tuple[int, int], _ShortestPathDag] = {}
        self._scale_base = _common_denominator(self.raw)

    def _scale_for(self, eps: Fraction) -> int:
        return math.lcm(self._scale_base, eps.denominator)

    def _weights(self, scale: int) -> list[int]:
        return _scaled(self.raw, scale)

    def _dag(self, scale: int, source: int) -> _ShortestPathDag:
        key = (scale, source)
        dag = self._dags.get(key)
        if dag is None:
            dag = _ShortestPathDag(self.graph.adjacency, self._weights(scale), source, self.n)
            self._dags[key] = dag
        return dag

    def check(
        self,
        rounding: Mapping[Edge, int],
        eps,
        level: str = "strong",
        comparison: str = "strict",
        stop_early: bool = False,
        validate: bool = True,
    ) -> VerificationReport:
        if level not in LEVELS:
            raise ValueError(f"level must be one of {LEVELS}, got {level!r}")
        eps = check_epsilon(eps, comparison)
        if validate:
            check_rounding(self.graph, rounding)
        scale = self._scale_for(eps)
        bound = eps.numerator * (scale // eps.denominator)
        r = [rounding[e] * scale for e in self.graph.edge_list]
        if self.forest:
            return self._check_forest(r, scale, bound, level, comparison)
        return self._check_general(r, scale, bound, level, comparison, stop_early)

    def passes(self, rounding, eps, level="strong", comparison="strict") -> bool:
        return self.check(rounding, eps, level, comparison, stop_early=True, validate=False).passed

    def _check_general(self, r, scale, bound, level, comparison, stop_early):
        n = self.n
        adj = self.graph.adjacency
        comp = self.graph.components
        want_weak = level in ("weak", "strong")
        want_strong = level == "strong"
        w = self._weights(scale) if want_strong else None
        worst = 0
        worst_pair = None
        first_other = None
        for u in range(n - 1):
            dag = self._dag(scale, u)
            lo, hi = dag.extrema(r)
            dist = dag.dist
            if want_weak:
                rdag = _ShortestPathDag(adj, r, u, n)
                rdist = rdag.dist
            if want_strong:
                _, whi = rdag.extrema(w)
            for v in range(u + 1, n):
                if comp[v] != comp[u]:
                    continue
                d = dist[v]
                for err in (lo[v] - d, hi[v] - d):
                    if abs(err) > abs(worst):
                        worst = err
                        worst_pair = (u, v)
                if worst_pair is not None and stop_early and not within(worst, bound, comparison):
                    return self._report(level, scale, bound, comparison, worst, worst_pair, None)
                if first_other is None:
                    if want_weak and hi[v] != rdist[v]:
                        first_other = (u, v, "an original shortest path is not shortest after rounding")
                    elif want_strong and whi[v] != d:
                        first_other = (u, v, "a shortest path after rounding was not originally shortest")
                    if first_other is not None and stop_early:
                        return self._report(level, scale, bound, comparison, worst, worst_pair, first_other)
        return self._report(level, scale, bound, comparison, worst, worst_pair, first_other)

    def _check_forest(self, r, scale, bound, level, comparison):
        # unique simple paths: the three levels coincide; only path errors matter
        w = self._weights(scale)
        err = [a - b for a, b in zip(r, w)]
        (mx, mx_pair), (mn, mn_pair) = _forest_path_extremes(self.n, self.graph.adjacency, err)
        if mx >= -mn:
            worst, pair = mx, mx_pair
        else:
            worst, pair = mn, mn_pair
        return self._report(level, scale, bound, comparison, worst, pair, None)

    def _report(self, level, scale, bound, comparison, worst, worst_pair, other):
        worst_f = Fraction(worst, scale)
        if not within(worst, bound, comparison):
            u, v = worst_pair
            limit = Fraction(bound, scale)
            rel = "(-{0}, {0})" if comparison == "strict" else "[-{0}, {0}]"
            wit = (u, v, f"path error {worst_f} outside {rel.format(limit)}")
            return VerificationReport(level, False, worst_f, wit)
        if other is not None:
            return VerificationReport(level, False, worst_f, other)
        return VerificationReport(level, True, worst_f, None)


def _forest_path_extremes(n, adj, err):
    """Max and min signed path sums over all vertex pairs of a forest, with endpoints."""
    seen = [False] * n
    best_max, best_min = (0, None), (0, None)
    down_max = [0] * n
    down_max_end = list(range(n))
    down_min = [0] * n
    down_min_end = list(range(n))
    for root in range(n):
        if seen[root]:
            continue
        seen[root] = True
        order = [root]
        kids: dict[int, list[tuple[int, int]]] = {}
        i = 0
        while i < len(order):
            x = order[i]
            i += 1
            for y, e in adj[x]:
                if not seen[y]:
                    seen[y] = True
                    kids.setdefault(x, []).append((y, e))
                    order.append(y)
        for x in reversed(order):
            m1 = m2 = (0, x)
            n1 = n2 = (0, x)
            for y, e in kids.get(x, ()):
                up = (err[e] + down_max[y], down_max_end[y])
                if up[0] > m1[0]:
                    m1, m2 = up, m1
                elif up[0] > m2[0]:
                    m2 = up
                dn = (err[e] + down_min[y], down_min_end[y])
                if dn[0] < n1[0]:
                    n1, n2 = dn, n1
                elif dn[0] < n2[0]:
                    n2 = dn
            down_max[x], down_max_end[x] = m1
            down_min[x], down_min_end[x] = n1
            if m1[0] + m2[0] > best_max[0]:
                best_max = (m1[0] + m2[0], tuple(sorted((m1[1], m2[1]))))
            if n1[0] + n2[0] < best_min[0]:
                best_min = (n1[0] + n2[0], tuple(sorted((n1[1], n2[1]))))
    return best_max, best_min


def verify_rounding(
    graph: WeightedGraph,
    rounding: Mapping[Edge, int],
    eps,
    level: str = "strong",
    comparison: str = "strict",
) -> VerificationReport:
    """Check a rounding against the path-oblivious, weak or strong conditions.

    All shortest paths count, ties included.  Pairs in different connected
    components are skipped.
    """
    return RoundingChecker(graph).check(rounding, eps, level, comparison)


@dataclass(frozen=True)
class RootedTree:
    """A tree with a chosen root; ``parent`` and ``edge_weight`` are keyed by non-root vertex."""

    root: int
    parent: Mapping[int, int]
    edge_weight: Mapping[int, Fraction]
    vertex_count: int

    @classmethod
    def from_graph(cls, graph: WeightedGraph, root: int = 0) -> "RootedTree":
        n = graph.vertex_count
        if n == 0:
            n = 1  # an empty edge list stands for the one-vertex tree
        elif not graph.is_tree():
            raise ValueError("graph is not a tree")
        if not 0 <= root < n:
            raise ValueError(f"root {root} outside [0, {n})")
        parent: dict[int, int] = {}
        weight: dict[int, Fraction] = {}
        if graph.vertex_count:
            seen = {root}
            queue = [root]
            for x in queue:
                for y, i in graph.adjacency[x]:
                    if y not in seen:
                        seen.add(y)
                        parent[y] = x
                        weight[y] = graph.edges[graph.edge_list[i]]
                        queue.append(y)
        return cls(root, parent, weight, n)

    @cached_property
    def children(self) -> dict[int, list[int]]:
        kids: dict[int, list[int]] = {v: [] for v in range(self.vertex_count)}
        for v, p in sorted(self.parent.items()):
            kids[p].append(v)
        return kids

    @cached_property
    def order(self) -> list[int]:
        """Vertices top-down (breadth-first from the root)."""
        out = [self.root]
        for x in out:
            out.extend(self.children[x])
        return out

    def edge(self, v: int) -> Edge:
        return edge_key(self.parent[v], v)

    def to_graph(self) -> WeightedGraph:
        return WeightedGraph.from_edges(
            ((p, v, self.edge_weight[v]) for v, p in self.parent.items()), self.vertex_count
        )
