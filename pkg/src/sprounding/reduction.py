"""Gadget graphs encoding 3-CNF formulas as rounding instances.

A formula becomes a graph that has a strong 1-rounding when the formula is
satisfiable and no 1-rounding at all otherwise.  Variables are 1-based
(DIMACS convention); literals are signed integers; clauses and literal
positions are also numbered from 1.

Vertex layout inside a variable gadget for ``x_i`` with ``h`` occurrences::

    v0 - L1 = R1 - L2 = R2 ... Lh = Rh - v_{h+1}      (= : triangle edge)
          \\  /       \\  /         \\  /
           B1         B2 - inv      Bh                (inverter on negations)

Clause gadgets are a nonagon ``N0..N8`` with knobs on ``N0, N3, N6`` and a
centre joined to all nine cycle vertices.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Optional, Union

from .graph import Edge, Rounding, WeightedGraph, edge_key, format_weight

GADGET_WEIGHT = Fraction(5, 2)
NONAGON_WEIGHT = Fraction(18, 5)
CENTER_WEIGHT = Fraction(6)

ROLES = (
    "triangle", "non-triangle", "e(v0)", "inverter",
    "nonagon", "handle", "center", "clause-variable", "shortcut",
)
VARIABLE_ROLES = ("triangle", "non-triangle", "e(v0)", "inverter")

# clauses fixing b = c = false once duplicate literals are replaced by b and c
_PADDING = (
    (-1, -2, -3), (-1, -2, 3), (-1, 2, -3), (1, -2, -3), (1, -2, 3), (1, 2, -3),
)


@dataclass(frozen=True)
class CnfFormula:
    variable_count: int
    clauses: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        for clause in self.clauses:
            for lit in clause:
                if lit == 0 or abs(lit) > self.variable_count:
                    raise ValueError(f"literal {lit} out of range 1..{self.variable_count}")

    def is_normalized(self) -> bool:
        return all(
            len(c) == 3 and len({abs(l) for l in c}) == 3 for c in self.clauses
        )

    def satisfied_by(self, assignment: Mapping[int, int]) -> bool:
        return all(any(_literal_value(l, assignment) for l in c) for c in self.clauses)

    def occurrences(self) -> dict[int, list[tuple[int, int, int]]]:
        """Per variable: ``(clause j, position t, literal)`` in clause order."""
        occ: dict[int, list[tuple[int, int, int]]] = {}
        for j, clause in enumerate(self.clauses, start=1):
            for t, lit in enumerate(clause, start=1):
                occ.setdefault(abs(lit), []).append((j, t, lit))
        return occ


def _literal_value(lit: int, assignment: Mapping[int, int]) -> int:
    value = assignment[abs(lit)]
    return value if lit > 0 else 1 - value


def parse_dimacs(text: Union[str, bytes]) -> CnfFormula:
    if isinstance(text, bytes):
        text = text.decode("utf-8")
    n = m = None
    clauses: list[tuple[int, ...]] = []
    current: list[int] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("c"):
            continue
        if line.startswith("%"):
            break
        if line.startswith("p"):
            parts = line.split()
            if len(parts) != 4 or parts[1] != "cnf":
                raise ValueError(f"line {lineno}: bad problem line {line!r}")
            n, m = int(parts[2]), int(parts[3])
            continue
        if n is None:
            raise ValueError(f"line {lineno}: clause before 'p cnf' header")
        for tok in line.split():
            try:
                lit = int(tok)
            except ValueError:
                raise ValueError(f"line {lineno}: bad literal {tok!r}") from None
            if lit == 0:
                clauses.append(tuple(current))
                current = []
            else:
                current.append(lit)
    if current:
        clauses.append(tuple(current))
    if n is None:
        raise ValueError("missing 'p cnf' header")
    if m is not None and m != len(clauses):
        raise ValueError(f"header announces {m} clauses, found {len(clauses)}")
    return CnfFormula(n, tuple(clauses))


def format_dimacs(formula: CnfFormula) -> str:
    lines = [f"p cnf {formula.variable_count} {len(formula.clauses)}"]
    lines += [" ".join(str(l) for l in c) + " 0" for c in formula.clauses]
    return "\n".join(lines) + "\n"


def normalize_cnf(formula: CnfFormula) -> CnfFormula:
    """Equisatisfiable formula in which no clause repeats a variable.

    Tautological clauses are dropped.  A repeated literal's second copy
    becomes fresh ``b``, a third copy fresh ``c``, and six clauses over fresh
    ``a, b, c`` force ``b`` and ``c`` false.
    """
    for c in formula.clauses:
        if len(c) != 3:
            raise ValueError(f"clause {c} does not have exactly three literals")
    kept = [c for c in formula.clauses if not any(-l in c for l in c)]
    if all(len(set(c)) == 3 for c in kept):
        return CnfFormula(formula.variable_count, tuple(kept))
    n = formula.variable_count
    a, b, c = n + 1, n + 2, n + 3
    out = []
    for clause in kept:
        seen: dict[int, int] = {}
        new = []
        for lit in clause:
            copies = seen.get(lit, 0)
            new.append(lit if copies == 0 else (b if copies == 1 else c))
            seen[lit] = copies + 1
        out.append(tuple(new))
    fresh = {1: a, 2: b, 3: c}
    for pattern in _PADDING:
        out.append(tuple(fresh[abs(p)] * (1 if p > 0 else -1) for p in pattern))
    return CnfFormula(n + 3, tuple(out))


@dataclass
class GadgetGraph:
    """A reduction graph together with the anchors needed to read it."""

    graph: WeightedGraph
    roles: dict[Edge, str]
    vertex_gadget: dict[int, tuple[str, int]]
    anchors: dict[int, int] = field(default_factory=dict)                # i -> v_{i,0}
    e_v0: dict[int, Edge] = field(default_factory=dict)
    bases: dict[tuple[int, int], int] = field(default_factory=dict)      # (i, k) -> v_{i,k}
    inverters: dict[tuple[int, int], int] = field(default_factory=dict)  # (i, k) -> inverter
    knobs: dict[tuple[int, int], int] = field(default_factory=dict)      # (j, t) -> c_{j,t}
    handles: dict[tuple[int, int], Edge] = field(default_factory=dict)
    nonagon: dict[int, tuple[Edge, ...]] = field(default_factory=dict)   # clockwise from c_{j,1}
    clauses: dict[int, tuple[int, ...]] = field(default_factory=dict)
    variable_count: int = 0
    D: Optional[Fraction] = None

    def gadget_vertices(self, kind: str, index: int) -> list[int]:
        return sorted(v for v, g in self.vertex_gadget.items() if g == (kind, index))

    def edges_with_role(self, role: str) -> list[Edge]:
        return sorted(e for e, r in self.roles.items() if r == role)

    def to_json(self) -> dict:
        return {
            "D": None if self.D is None else format_weight(self.D),
            "variable_count": self.variable_count,
            "clauses": {str(j): list(c) for j, c in self.clauses.items()},
            "anchors": {str(i): v for i, v in self.anchors.items()},
            "e_v0": {str(i): list(e) for i, e in self.e_v0.items()},
            "bases": [[i, k, v] for (i, k), v in sorted(self.bases.items())],
            "inverters": [[i, k, v] for (i, k), v in sorted(self.inverters.items())],
            "knobs": [[j, t, v] for (j, t), v in sorted(self.knobs.items())],
            "handles": [[j, t, *e] for (j, t), e in sorted(self.handles.items())],
            "nonagon": {str(j): [list(e) for e in es] for j, es in self.nonagon.items()},
            "roles": [[u, v, r] for (u, v), r in sorted(self.roles.items())],
            "vertex_gadget": [[v, k, i] for v, (k, i) in sorted(self.vertex_gadget.items())],
        }

    @classmethod
    def from_json(cls, graph: WeightedGraph, data: Mapping) -> "GadgetGraph":
        return cls(
            graph=graph,
            roles={edge_key(u, v): r for u, v, r in data["roles"]},
            vertex_gadget={v: (k, i) for v, k, i in data["vertex_gadget"]},
            anchors={int(i): v for i, v in data["anchors"].items()},
            e_v0={int(i): tuple(e) for i, e in data["e_v0"].items()},
            bases={(i, k): v for i, k, v in data["bases"]},
            inverters={(i, k): v for i, k, v in data["inverters"]},
            knobs={(j, t): v for j, t, v in data["knobs"]},
            handles={(j, t): edge_key(u, v) for j, t, u, v in data["handles"]},
            nonagon={int(j): tuple(tuple(e) for e in es) for j, es in data["nonagon"].items()},
            clauses={int(j): tuple(c) for j, c in data["clauses"].items()},
            variable_count=data["variable_count"],
            D=None if data["D"] is None else Fraction(data["D"]),
        )


class _Builder:
    def __init__(self):
        self.n = 0
        self.edges: dict[Edge, Fraction] = {}
        self.roles: dict[Edge, str] = {}
        self.vertex_gadget: dict[int, tuple[str, int]] = {}
        self.g = GadgetGraph(None, self.roles, self.vertex_gadget)

    def vertex(self, owner: Optional[tuple[str, int]]) -> int:
        v = self.n
        self.n += 1
        if owner is not None:
            self.vertex_gadget[v] = owner
        return v

    def edge(self, u: int, v: int, w: Fraction, role: str) -> Edge:
        e = edge_key(u, v)
        if e in self.edges:
            raise AssertionError(f"duplicate gadget edge {e}")
        self.edges[e] = w
        self.roles[e] = role
        return e

    def add_variable(self, i: int, h: int, negated: Iterable[int]) -> None:
        if h < 1:
            raise ValueError("a variable gadget needs at least one occurrence")
        negated = set(negated)
        if not negated <= set(range(1, h + 1)):
            raise ValueError(f"negated positions {sorted(negated)} outside 1..{h}")
        owner = ("variable", i)
        w = GADGET_WEIGHT
        v0 = self.vertex(owner)
        self.g.anchors[i] = v0
        prev_right = None
        for k in range(1, h + 1):
            left, right, base = self.vertex(owner), self.vertex(owner), self.vertex(owner)
            self.g.bases[(i, k)] = base
            if prev_right is None:
                self.g.e_v0[i] = self.edge(v0, left, w, "e(v0)")
            else:
                self.edge(prev_right, left, w, "non-triangle")
            self.edge(left, right, w, "triangle")
            self.edge(left, base, w, "triangle")
            self.edge(right, base, w, "triangle")
            prev_right = right
        end = self.vertex(owner)
        self.edge(prev_right, end, w, "non-triangle")
        for k in sorted(negated):
            inv = self.vertex(owner)
            self.g.inverters[(i, k)] = inv
            self.edge(self.g.bases[(i, k)], inv, w, "inverter")

    def add_clause(self, j: int) -> None:
        owner = ("clause", j)
        ring = [self.vertex(owner) for _ in range(9)]
        self.g.nonagon[j] = tuple(
            self.edge(ring[s], ring[(s + 1) % 9], NONAGON_WEIGHT, "nonagon") for s in range(9)
        )
        for t in (1, 2, 3):
            knob = self.vertex(owner)
            self.g.knobs[(j, t)] = knob
            self.g.handles[(j, t)] = self.edge(ring[3 * (t - 1)], knob, GADGET_WEIGHT, "handle")
        center = self.vertex(owner)
        for s in range(9):
            self.edge(center, ring[s], CENTER_WEIGHT, "center")

    def finish(self) -> GadgetGraph:
        self.g.graph = WeightedGraph.from_edges(
            ((u, v, w) for (u, v), w in self.edges.items()), self.n, self.roles
        )
        return self.g


def build_variable_gadget(h: int, negated: Iterable[int] = (), variable: int = 1) -> GadgetGraph:
    """Stand-alone gadget: ``h`` chained triangles, inverters at ``negated`` positions."""
    b = _Builder()
    b.add_variable(variable, h, negated)
    b.g.variable_count = variable
    return b.finish()


def build_clause_gadget(j: int = 1) -> GadgetGraph:
    """Stand-alone clause gadget: 13 vertices, 21 edges."""
    b = _Builder()
    b.add_clause(j)
    return b.finish()


def build_linked_pair(negated: bool = False, t: int = 1, D=25) -> GadgetGraph:
    """A one-triangle variable gadget tied to a clause gadget by one clause-variable edge.

    The edge runs from the base vertex (or the inverter when ``negated``) to
    knob ``c_{1,t}``.
    """
    b = _Builder()
    b.add_variable(1, 1, [1] if negated else [])
    b.add_clause(1)
    src = b.g.inverters[(1, 1)] if negated else b.g.bases[(1, 1)]
    b.edge(src, b.g.knobs[(1, t)], Fraction(D), "clause-variable")
    b.g.D = Fraction(D)
    b.g.variable_count = 1
    return b.finish()


def build_reduction(formula: CnfFormula) -> GadgetGraph:
    """The full reduction graph for a normalised formula."""
    if not formula.is_normalized():
        raise ValueError("formula must be normalised (three distinct variables per clause)")
    m = len(formula.clauses)
    D = Fraction(5 * m + 20)
    b = _Builder()
    b.g.variable_count = formula.variable_count
    b.g.D = D
    occ = formula.occurrences()
    for i in sorted(occ):
        negated = [k for k, (_, _, lit) in enumerate(occ[i], start=1) if lit < 0]
        b.add_variable(i, len(occ[i]), negated)
    for j, clause in enumerate(formula.clauses, start=1):
        b.add_clause(j)
        b.g.clauses[j] = clause
    for i in sorted(occ):
        for k, (j, t, lit) in enumerate(occ[i], start=1):
            src = b.g.bases[(i, k)] if lit > 0 else b.g.inverters[(i, k)]
            b.edge(src, b.g.knobs[(j, t)], D, "clause-variable")
    linked = {(i, j) for i in occ for (j, _, _) in occ[i]}
    owners = sorted(b.vertex_gadget.items())
    for a, (ka, ia) in owners:
        for c, (kc, ic) in owners:
            if c <= a or (ka, ia) == (kc, ic):
                continue
            if ka == kc:
                needed = True  # different gadgets of the same kind
            else:
                var, cl = (ia, ic) if ka == "variable" else (ic, ia)
                needed = (var, cl) not in linked
            if needed:
                b.edge(a, c, 2 * D, "shortcut")
    return b.finish()


def _down_up(w: Fraction) -> tuple[int, int]:
    lo = w.numerator // w.denominator
    return lo, -((-w.numerator) // w.denominator)


def rounding_from_assignment(g: GadgetGraph, assignment: Mapping[int, int]) -> Rounding:
    """The rounding that encodes a truth assignment (strong 1-rounding when it satisfies)."""
    out: Rounding = {}
    weights = g.graph.edges
    for e, w in weights.items():
        if w.denominator == 1:
            out[e] = int(w)
    for e, role in g.roles.items():
        if role not in VARIABLE_ROLES:
            continue
        i = g.vertex_gadget[e[0]][1]
        down, up = _down_up(weights[e])
        tri_up = assignment[i] == 1
        if role == "triangle":
            out[e] = up if tri_up else down
        else:
            out[e] = down if tri_up else up
    for (j, t), e in g.handles.items():
        down, up = _down_up(weights[e])
        lit = g.clauses[j][t - 1] if j in g.clauses else None
        true = lit is not None and _literal_value(lit, assignment) == 1
        out[e] = down if true else up
    for j, ring in g.nonagon.items():
        for t in (1, 2, 3):
            nxt = t % 3 + 1
            both_up = (
                out[g.handles[(j, t)]] > weights[g.handles[(j, t)]]
                and out[g.handles[(j, nxt)]] > weights[g.handles[(j, nxt)]]
            )
            pattern = (3, 4, 3) if both_up else (4, 3, 4)
            for e, x in zip(ring[3 * (t - 1): 3 * t], pattern):
                out[e] = x
    return out


def assignment_from_rounding(g: GadgetGraph, rounding: Mapping[Edge, int]) -> dict[int, int]:
    """Variable ``i`` is true iff its edge ``e(v_{i,0})`` was rounded down.

    Variables without a gadget (no occurrences) are set false.
    """
    out = {i: 0 for i in range(1, g.variable_count + 1)}
    for i, e in g.e_v0.items():
        down, up = _down_up(g.graph.edges[e])
        value = rounding[e]
        if value not in (down, up):
            raise ValueError(f"e(v_{i},0) rounded to {value}, expected {down} or {up}")
        out[i] = 1 if value == down else 0
    return out


def clause_rounding_pattern(g: GadgetGraph, rounding: Mapping[Edge, int], j: int) -> tuple[int, ...]:
    """Rounded nonagon weights of clause ``j``, clockwise from the first knob."""
    return tuple(rounding[e] for e in g.nonagon[j])


def sidecar_json(g: GadgetGraph) -> str:
    return json.dumps(g.to_json(), indent=1, sort_keys=True)
