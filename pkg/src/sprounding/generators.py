"""Seeded random instances: trees, paths and 3-CNF formulas."""

from __future__ import annotations

import itertools
import random
from fractions import Fraction
from typing import Optional, Union

from .graph import WeightedGraph
from .reduction import CnfFormula

Seed = Union[int, random.Random, None]


def _rng(seed: Seed) -> random.Random:
    return seed if isinstance(seed, random.Random) else random.Random(seed)


def random_weight(rng: random.Random, max_den: int = 100, max_value: int = 10) -> Fraction:
    """Uniform over ``{p/q : q <= max_den, 0 <= p/q <= max_value}`` per chosen denominator."""
    q = rng.randint(1, max_den)
    return Fraction(rng.randint(0, max_value * q), q)


def random_tree(
    n: int,
    seed: Seed = None,
    max_den: int = 100,
    max_value: int = 10,
    weights: Optional[list] = None,
) -> WeightedGraph:
    """Tree on ``n`` vertices by uniform random attachment.

    Vertex ``v`` hangs below a uniformly chosen earlier vertex.  When
    ``weights`` is given, each edge weight is drawn from that list instead.
    """
    if n < 1:
        raise ValueError("a tree needs at least one vertex")
    rng = _rng(seed)
    edges = []
    for v in range(1, n):
        w = rng.choice(weights) if weights else random_weight(rng, max_den, max_value)
        edges.append((rng.randrange(v), v, Fraction(w)))
    return WeightedGraph.from_edges(edges, n)


def quarter_tree(n: int, seed: Seed = None, max_quarters: int = 12) -> WeightedGraph:
    """Random tree with weights in ``{k/4 : 0 <= k <= max_quarters}``."""
    return random_tree(n, seed, weights=[Fraction(k, 4) for k in range(max_quarters + 1)])


def random_path_weights(n: int, seed: Seed = None, max_den: int = 100, max_value: int = 10) -> list[Fraction]:
    rng = _rng(seed)
    return [random_weight(rng, max_den, max_value) for _ in range(n)]


def random_formula(n: int, m: int, seed: Seed = None) -> CnfFormula:
    """Normalised 3-CNF: each clause uses three distinct variables with random signs."""
    if n < 3 and m:
        raise ValueError("need at least three variables for a normalised clause")
    rng = _rng(seed)
    clauses = []
    for _ in range(m):
        vs = rng.sample(range(1, n + 1), 3)
        clauses.append(tuple(v if rng.random() < 0.5 else -v for v in vs))
    return CnfFormula(n, tuple(clauses))


def satisfying_assignments(formula: CnfFormula):
    n = formula.variable_count
    for bits in itertools.product((0, 1), repeat=n):
        assignment = dict(zip(range(1, n + 1), bits))
        if formula.satisfied_by(assignment):
            yield assignment


def random_satisfiable(n: int, m: int, seed: Seed = None) -> tuple[CnfFormula, dict[int, int]]:
    """A normalised formula with a planted satisfying assignment."""
    rng = _rng(seed)
    planted = {i: rng.randint(0, 1) for i in range(1, n + 1)}
    clauses = []
    while len(clauses) < m:
        vs = rng.sample(range(1, n + 1), 3)
        clause = tuple(v if rng.random() < 0.5 else -v for v in vs)
        if any((l > 0) == (planted[abs(l)] == 1) for l in clause):
            clauses.append(clause)
    return CnfFormula(n, tuple(clauses)), planted
