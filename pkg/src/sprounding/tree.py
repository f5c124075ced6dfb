"""Rounding trees: the linear 2-rounding and the error-range-set dynamic program.

For a subtree rooted at ``u`` and a rounding, the *root error range* is the
smallest interval holding the signed errors of all root-to-vertex paths.
The DP keeps, per subtree, the antichain of root error ranges realisable by
locally optimal roundings.  Moving up an edge and joining two subtrees at a
shared root are linear in the set sizes, which gives quadratic time overall.

Every range remembers where it came from so a witness rounding can be read
back from any range of the root set.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, NamedTuple, Optional, Sequence

from .graph import Edge, Rounding, RootedTree, check_epsilon, edge_key
from .paths import floor_fraction

OFFSETS = (-1, 0, 1, 2)


class ErrorRange(NamedTuple):
    lo: Fraction
    hi: Fraction
    # lift: (source index, k); merge: (left index, right index); leaf: ()
    provenance: tuple = ()

    @property
    def bounds(self) -> tuple[Fraction, Fraction]:
        return (self.lo, self.hi)


@dataclass(frozen=True, eq=False)
class ErrorRangeSet:
    """Ranges sorted ascending by both bounds, plus how they were produced."""

    ranges: tuple[ErrorRange, ...]
    kind: str = "leaf"
    sources: tuple["ErrorRangeSet", ...] = ()
    edge: Optional[Edge] = None
    base: int = 0
    vertices: int = 1

    def __len__(self) -> int:
        return len(self.ranges)

    def __iter__(self):
        return iter(self.ranges)

    def __bool__(self) -> bool:
        return bool(self.ranges)

    def bounds(self) -> list[tuple[Fraction, Fraction]]:
        return [r.bounds for r in self.ranges]

    def is_antichain(self) -> bool:
        rs = self.ranges
        return all(a.lo < b.lo and a.hi < b.hi for a, b in zip(rs, rs[1:]))

    def walk(self):
        """Yield this set and every intermediate set it was built from."""
        stack, seen = [self], set()
        while stack:
            s = stack.pop()
            if id(s) in seen:
                continue
            seen.add(id(s))
            yield s
            stack.extend(s.sources)


LEAF = ErrorRangeSet((ErrorRange(Fraction(0), Fraction(0)),))


def _as_range(item) -> ErrorRange:
    if isinstance(item, ErrorRange):
        return item
    lo, hi = item
    return ErrorRange(Fraction(lo), Fraction(hi))


def _filter(ranges: Iterable[ErrorRange]) -> list[ErrorRange]:
    # stack scan; the sentinel [-inf, -inf] is replaced by an emptiness check
    out: list[ErrorRange] = []
    for r in ranges:
        if out and out[-1].lo == r.lo and out[-1].hi == r.hi:
            continue  # exact duplicate: keep the first provenance
        while out and out[-1].hi >= r.hi:
            out.pop()
        if not out or out[-1].lo != r.lo:
            out.append(r)
    return out


def filter_ranges(candidates: Sequence) -> ErrorRangeSet:
    """Maximal antichain of a lexicographically sorted list of intervals.

    Accepts :class:`ErrorRange` items or plain ``(lo, hi)`` pairs.
    """
    rs = [_as_range(c) for c in candidates]
    if __debug__:
        for a, b in zip(rs, rs[1:]):
            if (a.lo, a.hi) > (b.lo, b.hi):
                raise ValueError(f"input not sorted: {a.bounds} before {b.bounds}")
    return ErrorRangeSet(tuple(_filter(rs)), kind="filtered")


def _inside(x: Fraction, eps: Fraction, closed: bool) -> bool:
    return -eps <= x <= eps if closed else -eps < x < eps


def lift(
    child: ErrorRangeSet,
    edge_weight,
    eps,
    comparison: str = "strict",
    edge: Optional[Edge] = None,
) -> ErrorRangeSet:
    """Error range set after hanging ``child``'s subtree below a new root edge.

    The new edge is rounded to ``floor(w) + k`` for ``k`` in -1..2; offsets
    that would make the rounded weight negative are skipped.
    """
    eps = check_epsilon(eps, comparison)
    closed = comparison == "closed"
    w = Fraction(edge_weight)
    base = floor_fraction(w)
    frac = w - base
    zero = Fraction(0)
    streams = []
    for k in OFFSETS:
        if base + k < 0:
            continue
        shift = k - frac
        stream = []
        for i, r in enumerate(child.ranges):
            lo, hi = r.lo + shift, r.hi + shift
            if _inside(lo, eps, closed) and _inside(hi, eps, closed):
                stream.append(ErrorRange(min(lo, zero), max(hi, zero), (i, k)))
        streams.append(stream)
    merged = heapq.merge(*streams, key=lambda r: (r.lo, r.hi))
    return ErrorRangeSet(
        tuple(_filter(merged)), "lift", (child,), edge, base, child.vertices + 1
    )


def _pair_scan(outer, inner, eps, closed, tie_inner_first, outer_is_left):
    """Join each range of ``outer`` with its best partner in ``inner``.

    Partners must start strictly right of the outer range (or at the same
    point when ``tie_inner_first``), keep the low-end pair sum above ``-eps``
    and the high-end pair sum below ``eps``.  Three monotone pointers.
    """
    n = len(inner)
    out = []
    p1 = 0          # first partner with the required lower-bound order
    p2 = n          # first partner with lo > -eps - outer.lo
    p3 = n - 1      # last partner with hi < eps - outer.hi
    for i, r in enumerate(outer):
        if tie_inner_first:
            while p1 < n and not inner[p1].lo >= r.lo:
                p1 += 1
        else:
            while p1 < n and not inner[p1].lo > r.lo:
                p1 += 1
        low_limit = -eps - r.lo
        if closed:
            while p2 > 0 and inner[p2 - 1].lo >= low_limit:
                p2 -= 1
        else:
            while p2 > 0 and inner[p2 - 1].lo > low_limit:
                p2 -= 1
        high_limit = eps - r.hi
        if closed:
            while p3 >= 0 and not inner[p3].hi <= high_limit:
                p3 -= 1
        else:
            while p3 >= 0 and not inner[p3].hi < high_limit:
                p3 -= 1
        j = max(p1, p2)
        if j < n and j <= p3:
            prov = (i, j) if outer_is_left else (j, i)
            out.append(ErrorRange(r.lo, max(r.hi, inner[j].hi), prov))
    return out


def merge(left: ErrorRangeSet, right: ErrorRangeSet, eps, comparison: str = "strict") -> ErrorRangeSet:
    """Error range set of two subtrees sharing only their root."""
    eps = check_epsilon(eps, comparison)
    closed = comparison == "closed"
    lrs, rrs = left.ranges, right.ranges
    # type 1: left range has the smaller lower bound; type 2: right.lo <= left.lo
    s1 = _pair_scan(lrs, rrs, eps, closed, tie_inner_first=False, outer_is_left=True)
    s2 = _pair_scan(rrs, lrs, eps, closed, tie_inner_first=True, outer_is_left=False)
    merged = heapq.merge(s1, s2, key=lambda r: (r.lo, r.hi))
    return ErrorRangeSet(
        tuple(_filter(merged)), "merge", (left, right), None, 0,
        left.vertices + right.vertices - 1,
    )


def _merge_all(sets: list[ErrorRangeSet], eps, comparison) -> ErrorRangeSet:
    # balanced, left-leaning merge tree over the children in input order
    if len(sets) == 1:
        return sets[0]
    mid = (len(sets) + 1) // 2
    return merge(_merge_all(sets[:mid], eps, comparison), _merge_all(sets[mid:], eps, comparison), eps, comparison)


def error_range_set(tree: RootedTree, eps, comparison: str = "strict") -> ErrorRangeSet:
    """Error range set of the whole tree at its root.  Needs ``eps < 2``."""
    eps = check_epsilon(eps, comparison)
    if eps >= 2:
        raise ValueError("error range sets need eps < 2; use decide() for larger thresholds")
    sets: dict[int, ErrorRangeSet] = {}
    for u in reversed(tree.order):
        kids = tree.children[u]
        if not kids:
            sets[u] = LEAF
            continue
        lifted = [lift(sets.pop(c), tree.edge_weight[c], eps, comparison, tree.edge(c)) for c in kids]
        sets[u] = _merge_all(lifted, eps, comparison)
    return sets[tree.root]


def two_rounding(tree: RootedTree) -> Rounding:
    """Round each edge to the difference of floored root distances (errors below 2)."""
    dist = {tree.root: Fraction(0)}
    out: Rounding = {}
    for v in tree.order[1:]:
        p = tree.parent[v]
        dist[v] = dist[p] + tree.edge_weight[v]
        out[tree.edge(v)] = floor_fraction(dist[v]) - floor_fraction(dist[p])
    return out


def decide(tree: RootedTree, eps, comparison: str = "strict") -> bool:
    """Whether the tree admits an eps-rounding."""
    eps = check_epsilon(eps, comparison)
    if eps >= 2:
        return True
    return bool(error_range_set(tree, eps, comparison))


def witness_from(root_set: ErrorRangeSet, index: int = 0) -> Rounding:
    """Read a rounding back from range ``index`` of a set via provenance links."""
    out: Rounding = {}
    stack = [(root_set, index)]
    while stack:
        s, i = stack.pop()
        r = s.ranges[i]
        if s.kind == "lift":
            src, k = r.provenance
            out[s.edge] = s.base + k
            stack.append((s.sources[0], src))
        elif s.kind == "merge":
            li, ri = r.provenance
            stack.append((s.sources[0], li))
            stack.append((s.sources[1], ri))
    return out


def extract_rounding(tree: RootedTree, eps, comparison: str = "strict") -> Optional[Rounding]:
    """An eps-rounding of the tree, or ``None`` when none exists."""
    eps = check_epsilon(eps, comparison)
    if eps >= 2:
        return two_rounding(tree)
    root_set = error_range_set(tree, eps, comparison)
    if not root_set:
        return None
    return witness_from(root_set)


def all_path_lengths(tree: RootedTree) -> list[Fraction]:
    """Lengths of the paths between all unordered vertex pairs, sorted."""
    down: dict[int, list[Fraction]] = {}
    lengths: list[Fraction] = []
    for u in reversed(tree.order):
        acc: list[Fraction] = []
        for c in tree.children[u]:
            w = tree.edge_weight[c]
            ext = [w] + [w + x for x in down.pop(c)]
            lengths.extend(ext)
            lengths.extend(a + b for a in acc for b in ext)
            acc.extend(ext)
        down[u] = acc
    return sorted(lengths)


def epsilon_candidates(tree: RootedTree) -> list[Fraction]:
    """Every value the optimal maximum path error can take, sorted."""
    cands = set()
    for length in all_path_lengths(tree):
        frac = length - floor_fraction(length)
        cands.update(abs(k - frac) for k in OFFSETS)
    return sorted(cands)


def minimize_epsilon(tree: RootedTree) -> tuple[Fraction, Rounding]:
    """Least ``eps*`` such that the tree has a rounding with all path errors ``<= eps*``.

    The tree then admits an eps'-rounding (strict sense) for every eps' > eps*.
    """
    cands = epsilon_candidates(tree)
    if not cands:
        return Fraction(0), {}
    lo, hi = 0, len(cands) - 1
    while lo < hi:
        mid = (lo + hi) // 2
        if decide(tree, cands[mid], "closed"):
            hi = mid
        else:
            lo = mid + 1
    best = cands[lo]
    return best, extract_rounding(tree, best, "closed")


def reroot(tree: RootedTree, root: int) -> RootedTree:
    return RootedTree.from_graph(tree.to_graph(), root)


def tree_path_edges(tree: RootedTree, u: int, v: int) -> list[Edge]:
    """Edges on the tree path between ``u`` and ``v``."""
    depth = {tree.root: 0}
    for x in tree.order[1:]:
        depth[x] = depth[tree.parent[x]] + 1
    left, right = [], []
    while u != v:
        if depth[u] >= depth[v]:
            left.append(edge_key(u, tree.parent[u]))
            u = tree.parent[u]
        else:
            right.append(edge_key(v, tree.parent[v]))
            v = tree.parent[v]
    return left + right[::-1]
