"""Satisfiability deciders: a backtracking oracle and the Schaefer-class solvers."""

from __future__ import annotations

import enum
import functools
import itertools
from dataclasses import dataclass, field
from typing import Iterator

import networkx as nx
import numpy as np

from . import gf2
from .algebra import CONST0, CONST1, MAJORITY, MAX, MIN, MINORITY, OperationTable, preserves
from .errors import BudgetExceeded, PreconditionError
from .structures import Assignment, Constraint, EqInstance, Instance, Relation, Structure

__all__ = [
    "SolveResult",
    "DEFAULT_NODE_BUDGET",
    "solve_bruteforce",
    "iter_solutions",
    "SchaeferClass",
    "solve_schaefer",
    "ground_equality",
    "solution_set",
]

DEFAULT_NODE_BUDGET = 10**7


@dataclass(frozen=True)
class SolveResult:
    satisfiable: bool
    witness: Assignment | None = None
    strategy: str = ""
    stats: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if self.satisfiable != (self.witness is not None):
            raise ValueError("a witness is present exactly when the instance is satisfiable")

    def __bool__(self) -> bool:
        return self.satisfiable

    def to_json(self) -> dict:
        if not self.satisfiable:
            return {"satisfiable": False}
        return {"satisfiable": True, "witness": dict(self.witness)}


# -- backtracking ---------------------------------------------------------


def _compile(inst: Instance):
    """Group constraints by the position of their last variable in declaration order."""
    index = {v: i for i, v in enumerate(inst.variables)}
    checks: list[list] = [[] for _ in inst.variables]
    for c in inst.constraints:
        scope = tuple(index[v] for v in c.args)
        checks[max(scope)].append((scope, inst.relation(c).tuples))
    return checks


def _search(n: int, d: int, checks, budget: int, stats: dict) -> Iterator[list[int]]:
    if n == 0:
        yield []
        return
    a = [-1] * n
    i = 0
    nodes = 0
    try:
        while i >= 0:
            a[i] += 1
            if a[i] == d:
                a[i] = -1
                i -= 1
                continue
            nodes += 1
            if nodes > budget:
                raise BudgetExceeded(f"backtracking exceeded {budget} nodes")
            ok = True
            for scope, tuples in checks[i]:
                if tuple([a[j] for j in scope]) not in tuples:
                    ok = False
                    break
            if not ok:
                continue
            if i == n - 1:
                yield list(a)
            else:
                i += 1
    finally:
        stats["nodes"] = stats.get("nodes", 0) + nodes


def iter_solutions(inst: Instance, budget: int = DEFAULT_NODE_BUDGET) -> Iterator[Assignment]:
    """All satisfying assignments, lexicographically in declaration order."""
    checks = _compile(inst)
    for values in _search(len(inst.variables), inst.domain_size, checks, budget, {}):
        yield dict(zip(inst.variables, values))


def solve_bruteforce(inst: Instance, budget: int = DEFAULT_NODE_BUDGET) -> SolveResult:
    """Exact backtracking; the witness is the lexicographically least solution."""
    stats: dict = {}
    checks = _compile(inst)
    gen = _search(len(inst.variables), inst.domain_size, checks, budget, stats)
    values = next(gen, None)
    gen.close()
    if values is None:
        return SolveResult(False, None, "bruteforce", stats)
    return SolveResult(True, dict(zip(inst.variables, values)), "bruteforce", stats)


# -- Schaefer classes -----------------------------------------------------


class SchaeferClass(enum.Enum):
    ZERO_VALID = "zero_valid"
    ONE_VALID = "one_valid"
    HORN = "horn"
    ANTI_HORN = "anti_horn"
    BIJUNCTIVE = "bijunctive"
    AFFINE = "affine"

    @property
    def operation(self) -> OperationTable:
        return _CLASS_OPS[self]


_CLASS_OPS = {
    SchaeferClass.ZERO_VALID: CONST0,
    SchaeferClass.ONE_VALID: CONST1,
    SchaeferClass.HORN: MIN,
    SchaeferClass.ANTI_HORN: MAX,
    SchaeferClass.BIJUNCTIVE: MAJORITY,
    SchaeferClass.AFFINE: MINORITY,
}


@functools.lru_cache(maxsize=None)
def horn_clauses(r: Relation) -> tuple[tuple[tuple[int, ...], int | None], ...]:
    """Clauses (premise positions, head position or None) whose models are r.

    r must be closed under min. For each falsifying tuple f the clause is the
    strongest Horn consequence of r that f violates: premises are the
    1-positions of f, the head is a 0-position of f that every tuple of r
    agreeing with f's premises sets to 1.
    """
    clauses = set()
    for f in itertools.product((0, 1), repeat=r.arity):
        if f in r.tuples:
            continue
        ones = tuple(i for i, v in enumerate(f) if v)
        above = [t for t in r.tuples if all(t[i] for i in ones)]
        if not above:
            clauses.add((ones, None))
            continue
        meet = [min(col) for col in zip(*above)]
        head = next(j for j, v in enumerate(f) if v == 0 and meet[j] == 1)
        clauses.add((ones, head))
    return tuple(sorted(clauses, key=lambda c: (c[0], -1 if c[1] is None else c[1])))


def _flip(r: Relation) -> Relation:
    return Relation(r.arity, {tuple(1 - v for v in t) for t in r.tuples})


def _horn_minimal_model(n: int, clauses: list[tuple[frozenset[int], int | None]]) -> list[int] | None:
    """Unit propagation from all-false; None if a negative clause fires."""
    value = [0] * n
    missing = [len(prem) for prem, _ in clauses]
    watch: list[list[int]] = [[] for _ in range(n)]
    for ci, (prem, _) in enumerate(clauses):
        for v in prem:
            watch[v].append(ci)
    queue = [ci for ci, m in enumerate(missing) if m == 0]
    while queue:
        ci = queue.pop()
        head = clauses[ci][1]
        if head is None:
            return None
        if value[head]:
            continue
        value[head] = 1
        for cj in watch[head]:
            missing[cj] -= 1
            if missing[cj] == 0:
                queue.append(cj)
    return value


def _solve_horn(inst: Instance, flipped: bool) -> list[int] | None:
    index = {v: i for i, v in enumerate(inst.variables)}
    clauses = []
    for c in inst.constraints:
        r = inst.relation(c)
        for prem, head in horn_clauses(_flip(r) if flipped else r):
            pv = frozenset(index[c.args[i]] for i in prem)
            hv = None if head is None else index[c.args[head]]
            if hv is not None and hv in pv:
                continue
            clauses.append((pv, hv))
    model = _horn_minimal_model(len(inst.variables), clauses)
    if model is None:
        return None
    return [1 - v for v in model] if flipped else model


@functools.lru_cache(maxsize=None)
def binary_clauses(r: Relation) -> tuple[tuple[int, int, int, int], ...]:
    """Forbidden patterns (i, a, j, b) meaning not (x_i = a and x_j = b).

    A relation closed under majority is the conjunction of its projections
    onto at most two coordinates, so these patterns define it exactly.
    """
    out = []
    for i in range(r.arity):
        seen = {t[i] for t in r.tuples}
        out += [(i, a, i, a) for a in (0, 1) if a not in seen]
    for i, j in itertools.combinations(range(r.arity), 2):
        seen = {(t[i], t[j]) for t in r.tuples}
        out += [(i, a, j, b) for a in (0, 1) for b in (0, 1) if (a, b) not in seen]
    return tuple(out)


def _solve_2sat(inst: Instance) -> list[int] | None:
    n = len(inst.variables)
    index = {v: i for i, v in enumerate(inst.variables)}
    g = nx.DiGraph()
    g.add_nodes_from((x, a) for x in range(n) for a in (0, 1))
    for c in inst.constraints:
        for i, a, j, b in binary_clauses(inst.relation(c)):
            x, y = index[c.args[i]], index[c.args[j]]
            # x = a forces y != b, and y = b forces x != a
            g.add_edge((x, a), (y, 1 - b))
            g.add_edge((y, b), (x, 1 - a))
    dag = nx.condensation(g)
    comp = dag.graph["mapping"]
    order = {c: i for i, c in enumerate(nx.topological_sort(dag))}
    out = []
    for x in range(n):
        if comp[(x, 0)] == comp[(x, 1)]:
            return None
        out.append(1 if order[comp[(x, 1)]] > order[comp[(x, 0)]] else 0)
    return out


@functools.lru_cache(maxsize=None)
def affine_equations(r: Relation) -> np.ndarray:
    """Rows (c | b) with c.x = b over GF(2), whose common solutions are r.

    Computed as the null space of the rows (t | 1) for t in r; an empty r
    yields the contradiction 0 = 1 among them.
    """
    rows = np.array([list(t) + [1] for t in sorted(r.tuples)], dtype=np.uint8).reshape(-1, r.arity + 1)
    return gf2.nullspace(rows, r.arity + 1)


def _solve_affine(inst: Instance) -> list[int] | None:
    n = len(inst.variables)
    index = {v: i for i, v in enumerate(inst.variables)}
    rows = []
    rhs = []
    for c in inst.constraints:
        for eq in affine_equations(inst.relation(c)):
            row = np.zeros(n, dtype=np.uint8)
            for pos, coef in enumerate(eq[:-1]):
                if coef:
                    row[index[c.args[pos]]] ^= 1
            rows.append(row)
            rhs.append(eq[-1])
    if not rows:
        return [0] * n
    x = gf2.solve(np.array(rows), np.array(rhs))
    return None if x is None else [int(v) for v in x]


def solve_schaefer(inst: Instance, cls: SchaeferClass | str, check: bool = True) -> SolveResult:
    """Polynomial-time solver for an instance whose relations are all closed
    under the operation of `cls`."""
    cls = SchaeferClass(cls)
    if inst.domain_size != 2:
        raise PreconditionError("Schaefer solvers need the Boolean domain")
    if check:
        op = cls.operation
        for c in inst.constraints:
            if not preserves(inst.relation(c), op):
                raise PreconditionError(f"relation {c.rel!r} is not closed under the {cls.value} operation")
    n = len(inst.variables)
    if cls in (SchaeferClass.ZERO_VALID, SchaeferClass.ONE_VALID):
        # empty relations are vacuously closed under constants but unsatisfiable
        if any(not inst.relation(c).tuples for c in inst.constraints):
            values = None
        else:
            values = [0 if cls is SchaeferClass.ZERO_VALID else 1] * n
    elif cls is SchaeferClass.HORN:
        values = _solve_horn(inst, flipped=False)
    elif cls is SchaeferClass.ANTI_HORN:
        values = _solve_horn(inst, flipped=True)
    elif cls is SchaeferClass.BIJUNCTIVE:
        values = _solve_2sat(inst)
    else:
        values = _solve_affine(inst)
    strategy = f"schaefer:{cls.value}"
    if values is None:
        return SolveResult(False, None, strategy)
    return SolveResult(True, dict(zip(inst.variables, values)), strategy)


# -- equality languages ---------------------------------------------------


def ground_equality(eq_inst: EqInstance, domain_size: int | None = None) -> Instance:
    """Finite instance over {0..d-1} using the d-slices of the equality relations.

    Equality relations are invariant under all permutations of the naturals,
    so an instance with n variables is satisfiable iff it is satisfiable over
    n values; pinned values must also fit, so d defaults to
    max(n, largest pin + 1, 1).
    """
    n = len(eq_inst.variables)
    d = max(n, max(eq_inst.pins.values(), default=-1) + 1, 1)
    if domain_size is not None:
        if domain_size < max(eq_inst.pins.values(), default=-1) + 1:
            raise PreconditionError("domain too small for the pinned values")
        d = domain_size
    used_base = {c.rel for c in eq_inst.constraints if not c.alien}
    used_alien = {c.rel for c in eq_inst.constraints if c.alien}
    base = {name: r.slice(d) for name, r in eq_inst.base.items() if name in used_base}
    alien = {name: r.slice(d) for name, r in eq_inst.alien.items() if name in used_alien}
    constraints = list(eq_inst.constraints)
    taken = set(eq_inst.base) | set(eq_inst.alien)
    for v, val in eq_inst.pins.items():
        name = f"pin_{val}"
        while name in taken:
            name = "_" + name
        base[name] = Relation(1, {(val,)})
        constraints.append(Constraint(name, (v,)))
    return Instance(eq_inst.variables, tuple(constraints), Structure(d, base), Structure(d, alien))


def solution_set(inst: Instance, budget: int = DEFAULT_NODE_BUDGET) -> frozenset[tuple[int, ...]]:
    """Sol(I) as value tuples in declaration order."""
    return frozenset(tuple(a[v] for v in inst.variables) for a in iter_solutions(inst, budget))
