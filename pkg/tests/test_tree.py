import itertools
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import HALF, path_graph, star
from sprounding.generators import quarter_tree, random_tree
from sprounding.graph import RootedTree, WeightedGraph, verify_rounding
from sprounding.oracle import brute_force_decide, brute_force_min_epsilon, candidate_domains
from sprounding.tree import (
    LEAF,
    ErrorRangeSet,
    all_path_lengths,
    decide,
    epsilon_candidates,
    error_range_set,
    extract_rounding,
    filter_ranges,
    lift,
    merge,
    minimize_epsilon,
    reroot,
    tree_path_edges,
    two_rounding,
)

F = Fraction
EPS_GRID = [F(1, 4), F(1, 2), F(3, 4), F(7, 8), F(1), F(5, 4), F(3, 2), F(7, 4)]


def rooted(graph, root=0):
    return RootedTree.from_graph(graph, root)


# -- two_rounding --------------------------------------------------------------


def test_two_rounding_star():
    t = rooted(star())
    r = two_rounding(t)
    assert set(r.values()) == {0}
    assert verify_rounding(star(), r, 2).worst_error == -1


def test_two_rounding_single_edge():
    assert two_rounding(rooted(WeightedGraph.from_edges([(0, 1, F(5, 2))]))) == {(0, 1): 2}


def test_two_rounding_integers_identity():
    g = path_graph([1, 4, 0, 2])
    assert two_rounding(rooted(g)) == {e: int(w) for e, w in g.edges.items()}


@pytest.mark.parametrize("seed", range(30))
def test_two_rounding_always_passes(seed):
    g = random_tree(random.Random(seed).randint(1, 40), seed)
    assert verify_rounding(g, two_rounding(rooted(g)), 2, "strong").passed


# -- filter --------------------------------------------------------------------


def test_filter_equal_lower_bounds_keeps_smaller():
    assert filter_ranges([(-1, 0), (-1, 1)]).bounds() == [(-1, 0)]


def test_filter_pops_container():
    assert filter_ranges([(-1, 1), (0, HALF)]).bounds() == [(0, HALF)]


def test_filter_antichain_unchanged():
    assert filter_ranges([(-1, -HALF), (0, 0)]).bounds() == [(-1, -HALF), (0, 0)]


def test_filter_rejects_unsorted():
    with pytest.raises(ValueError):
        filter_ranges([(0, 1), (-1, 0)])


intervals = st.lists(
    st.tuples(st.fractions(-2, 0, max_denominator=4), st.fractions(0, 2, max_denominator=4)), max_size=20
)


@given(intervals)
def test_filter_is_minimal_antichain(raw):
    cands = sorted(set(raw))
    out = filter_ranges(cands)
    assert out.is_antichain()
    assert filter_ranges(out.bounds()).bounds() == out.bounds()
    # exactly the ranges containing no other candidate
    minimal = [
        a for a in cands
        if not any(b != a and a[0] <= b[0] and b[1] <= a[1] for b in cands)
    ]
    assert out.bounds() == minimal


# -- lift / merge ----------------------------------------------------------------


def test_lift_half_edge():
    assert lift(LEAF, HALF, 1).bounds() == [(-HALF, 0), (0, HALF)]


def test_lift_integer_edge():
    assert lift(LEAF, 3, 1).bounds() == [(0, 0)]


def test_lift_clamps_negative_offsets():
    # floor(1/2) = 0, so k = -1 would give -1; the output matches the unclamped trace
    out = lift(LEAF, HALF, F(3, 2))
    assert all(k >= 0 for _, k in (r.provenance for r in out))
    assert out.bounds() == [(-HALF, 0), (0, HALF)]


def test_lift_closed_includes_boundary():
    assert lift(LEAF, HALF, HALF, "closed").bounds() == [(-HALF, 0), (0, HALF)]
    assert lift(LEAF, HALF, HALF, "strict").bounds() == []


def test_merge_two_lifted_halves():
    half = lift(LEAF, HALF, 1)
    assert merge(half, half, 1).bounds() == [(-HALF, HALF)]


def test_merge_star_is_empty():
    half = lift(LEAF, HALF, 1)
    assert merge(merge(half, half, 1), half, 1).bounds() == []


def test_merge_with_bare_root_is_identity():
    half = lift(LEAF, HALF, 1)
    assert merge(half, LEAF, 1).bounds() == half.bounds()
    assert merge(LEAF, half, F(1, 3) + HALF).bounds() == half.bounds()


def _naive_merge(left, right, eps, closed):
    ok = (lambda x: -eps <= x <= eps) if closed else (lambda x: -eps < x < eps)
    cands = sorted({
        (min(a.lo, b.lo), max(a.hi, b.hi))
        for a in left for b in right
        if ok(a.lo + b.lo) and ok(a.hi + b.hi)
    })
    return filter_ranges(cands).bounds()


def _random_set(rng, eps):
    pts = sorted({F(rng.randint(-8, 0), 8) for _ in range(4)})
    his = sorted({F(rng.randint(0, 8), 8) for _ in range(4)})
    k = min(len(pts), len(his))
    cands = sorted(zip(pts[:k], his[-k:]))
    return ErrorRangeSet(filter_ranges([c for c in cands if -eps < c[0] and c[1] < eps]).ranges)


@pytest.mark.parametrize("closed", [False, True])
def test_merge_matches_pairwise_definition(closed):
    rng = random.Random(1 + closed)
    mode = "closed" if closed else "strict"
    for _ in range(2000):
        eps = rng.choice(EPS_GRID)
        a, b = _random_set(rng, eps), _random_set(rng, eps)
        assert merge(a, b, eps, mode).bounds() == _naive_merge(a, b, eps, closed)


# -- error range sets ----------------------------------------------------------


def test_single_vertex_set():
    t = rooted(WeightedGraph.from_edges([], vertex_count=1))
    assert error_range_set(t, 1).bounds() == [(0, 0)]
    assert extract_rounding(t, 1) == {}


def test_star_set_empty():
    assert error_range_set(rooted(star()), 1).bounds() == []


def test_two_half_path_from_middle():
    assert error_range_set(rooted(path_graph([HALF, HALF]), 1), 1).bounds() == [(-HALF, HALF)]


def test_eps_two_requires_fast_path():
    with pytest.raises(ValueError):
        error_range_set(rooted(star()), 2)
    assert decide(rooted(star()), 2)


def test_closed_mode_allows_zero_epsilon():
    assert decide(rooted(path_graph([1, 2])), 0, "closed")
    assert not decide(rooted(path_graph([HALF])), 0, "closed")
    with pytest.raises(ValueError):
        decide(rooted(path_graph([1])), 0, "strict")


def _root_range(tree, rounding):
    err = {tree.root: F(0)}
    for v in tree.order[1:]:
        e = tree.edge(v)
        err[v] = err[tree.parent[v]] + rounding[e] - tree.edge_weight[v]
    return min(err.values()), max(err.values())


def _exhaustive_root_ranges(tree, eps, mode):
    g = tree.to_graph()
    domains = candidate_domains(g, eps, mode)
    edges = list(domains)
    ranges = set()
    for values in itertools.product(*(domains[e] for e in edges)):
        r = dict(zip(edges, values))
        if verify_rounding(g, r, eps, "path_oblivious", mode).passed:
            ranges.add(_root_range(tree, r))
    return sorted(
        a for a in ranges if not any(b != a and a[0] <= b[0] and b[1] <= a[1] for b in ranges)
    )


def test_set_semantics_match_exhaustive_enumeration():
    rng = random.Random(2024)
    checked = 0
    for i in range(90):
        g = quarter_tree(rng.randint(1, 6), rng, max_quarters=8)
        t = rooted(g, rng.randrange(g.vertex_count))
        eps = rng.choice(EPS_GRID)
        mode = rng.choice(["strict", "closed"])
        if eps >= 2:
            continue
        got = error_range_set(t, eps, mode)
        assert got.bounds() == _exhaustive_root_ranges(t, eps, mode), (g, t.root, eps, mode)
        checked += 1
    assert checked >= 80


def test_all_sets_are_small_antichains():
    rng = random.Random(8)
    for _ in range(100):
        g = quarter_tree(rng.randint(1, 14), rng)
        eps, mode = rng.choice(EPS_GRID), rng.choice(["strict", "closed"])
        root = error_range_set(rooted(g), eps, mode)
        for s in root.walk():
            assert s.is_antichain()
            assert len(s) <= 2 * s.vertices
            for r in s:
                assert r.lo <= 0 <= r.hi


# -- decide / extract ------------------------------------------------------------


def test_star_decisions():
    t = rooted(star())
    assert not decide(t, 1, "strict")
    assert decide(t, 1, "closed")
    assert extract_rounding(t, 1) is None


def test_extract_two_half_path():
    r = extract_rounding(rooted(path_graph([HALF, HALF])), 1)
    assert r in ({(0, 1): 1, (1, 2): 0}, {(0, 1): 0, (1, 2): 1})


def test_extract_integer_identity():
    g = path_graph([2, 0, 5])
    assert extract_rounding(rooted(g, 1), F(1, 3)) == {e: int(w) for e, w in g.edges.items()}


def test_decide_agrees_with_oracle_and_witnesses_verify():
    rng = random.Random(99)
    for _ in range(120):
        g = quarter_tree(rng.randint(1, 7), rng)
        t = rooted(g)
        for eps in EPS_GRID:
            for mode in ("strict", "closed"):
                ours = decide(t, eps, mode)
                assert ours == brute_force_decide(g, eps, "strong", mode)[0], (g, eps, mode)
                if ours:
                    r = extract_rounding(t, eps, mode)
                    assert verify_rounding(g, r, eps, "strong", mode).passed


def test_monotone_and_root_independent():
    rng = random.Random(4)
    for _ in range(60):
        g = quarter_tree(rng.randint(2, 10), rng)
        for mode in ("strict", "closed"):
            answers = [decide(rooted(g), eps, mode) for eps in EPS_GRID]
            assert answers == sorted(answers)  # False ... False True ... True
            for root in range(g.vertex_count):
                assert [decide(rooted(g, root), eps, mode) for eps in EPS_GRID] == answers


def test_reroot_and_tree_paths():
    g = path_graph([1, 2, 3])
    t = reroot(rooted(g), 3)
    assert t.root == 3
    assert tree_path_edges(t, 0, 2) == [(0, 1), (1, 2)]
    assert tree_path_edges(t, 2, 2) == []


# -- path lengths and minimum epsilon ------------------------------------------------


def test_path_lengths_path():
    assert all_path_lengths(rooted(path_graph([1, 2]))) == [1, 2, 3]


def test_path_lengths_star():
    assert all_path_lengths(rooted(star())) == [HALF] * 3 + [F(1)] * 3


def test_path_lengths_single_vertex():
    assert all_path_lengths(rooted(WeightedGraph.from_edges([], vertex_count=1))) == []


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 9), st.integers(0, 10**6))
def test_path_lengths_count_and_sum(n, seed):
    g = random_tree(n, seed, max_den=6, max_value=3)
    lengths = all_path_lengths(rooted(g))
    assert len(lengths) == n * (n - 1) // 2
    from sprounding.graph import all_pairs_shortest

    d = all_pairs_shortest(g)
    assert lengths == sorted(d[u][v] for u in range(n) for v in range(u + 1, n))


def test_min_eps_examples():
    assert minimize_epsilon(rooted(path_graph([2, 3])))[0] == 0
    assert minimize_epsilon(rooted(WeightedGraph.from_edges([(0, 1, HALF)])))[0] == HALF
    assert minimize_epsilon(rooted(star()))[0] == 1
    assert minimize_epsilon(rooted(path_graph([HALF, HALF])))[0] == HALF
    assert minimize_epsilon(rooted(WeightedGraph.from_edges([], vertex_count=1))) == (0, {})


def test_min_eps_is_infimum():
    rng = random.Random(17)
    for _ in range(40):
        g = random_tree(rng.randint(2, 7), rng, max_den=8, max_value=3)
        t = rooted(g)
        best, witness = minimize_epsilon(t)
        assert best in epsilon_candidates(t)
        assert verify_rounding(g, witness, best, "strong", "closed").passed
        assert decide(t, best + F(1, 1000), "strict")
        if best > 0:
            assert not decide(t, best, "strict")


def test_min_eps_matches_oracle():
    rng = random.Random(23)
    for _ in range(60):
        g = random_tree(rng.randint(1, 7), rng, max_den=10, max_value=3)
        assert minimize_epsilon(rooted(g))[0] == brute_force_min_epsilon(g)
