"""Polymorphisms, endomorphisms, Schaefer flags, cores and pp-definability."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Callable, Iterator, Sequence

from .errors import BudgetExceeded, PreconditionError
from .structures import Constraint, Instance, Relation, Structure, complement

__all__ = [
    "OperationTable",
    "identity",
    "constant",
    "MIN",
    "MAX",
    "MAJORITY",
    "MINORITY",
    "FLIP",
    "CONST0",
    "CONST1",
    "preserves",
    "closed_under",
    "endomorphisms",
    "SchaeferFlags",
    "schaefer_flags",
    "compute_core",
    "polymorphisms",
    "PpCheck",
    "ppdef_check",
]

DEFAULT_ENUM_BUDGET = 10**6


@dataclass(frozen=True)
class OperationTable:
    """An operation D^m -> D stored densely; argument tuples are read as base-d
    numbers with the first argument most significant."""

    arity: int
    domain_size: int
    table: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "table", tuple(int(v) for v in self.table))
        if self.arity < 1:
            raise PreconditionError("operations need arity >= 1")
        if len(self.table) != self.domain_size**self.arity:
            raise PreconditionError(
                f"table has {len(self.table)} entries, expected {self.domain_size ** self.arity}"
            )
        if any(not 0 <= v < self.domain_size for v in self.table):
            raise PreconditionError("operation value outside the domain")

    @classmethod
    def from_function(cls, f: Callable[..., int], arity: int, domain_size: int) -> OperationTable:
        args = itertools.product(range(domain_size), repeat=arity)
        return cls(arity, domain_size, tuple(f(*a) for a in args))

    def index(self, args: Sequence[int]) -> int:
        i = 0
        for a in args:
            i = i * self.domain_size + a
        return i

    def __call__(self, *args: int) -> int:
        if len(args) != self.arity:
            raise TypeError(f"expected {self.arity} arguments, got {len(args)}")
        return self.table[self.index(args)]

    def apply_rows(self, rows: Sequence[Sequence[int]]) -> tuple[int, ...]:
        """Componentwise image of `arity` equally long tuples."""
        return tuple(self.table[self.index(col)] for col in zip(*rows))

    @property
    def range(self) -> frozenset[int]:
        return frozenset(self.table)

    def is_bijection(self) -> bool:
        return self.arity == 1 and len(self.range) == self.domain_size


def identity(d: int) -> OperationTable:
    return OperationTable(1, d, tuple(range(d)))


def constant(a: int, d: int, arity: int = 1) -> OperationTable:
    return OperationTable(arity, d, (a,) * d**arity)


MIN = OperationTable.from_function(min, 2, 2)
MAX = OperationTable.from_function(max, 2, 2)
MAJORITY = OperationTable.from_function(lambda x, y, z: (x & y) | (x & z) | (y & z), 3, 2)
MINORITY = OperationTable.from_function(lambda x, y, z: x ^ y ^ z, 3, 2)
FLIP = OperationTable(1, 2, (1, 0))
CONST0 = constant(0, 2)
CONST1 = constant(1, 2)


def preserves(r: Relation, f: OperationTable) -> bool:
    """True iff f maps every choice of `f.arity` rows of r into r."""
    if r.max_value() >= f.domain_size:
        raise PreconditionError("relation has values outside the operation's domain")
    rows = list(r.tuples)
    tuples = r.tuples
    if f.arity == 1:
        tab = f.table
        return all(tuple(tab[v] for v in t) in tuples for t in rows)
    for choice in itertools.product(rows, repeat=f.arity):
        if f.apply_rows(choice) not in tuples:
            return False
    return True


def closed_under(s: Structure, f: OperationTable) -> bool:
    return all(preserves(r, f) for r in s.relations.values())


def endomorphisms(s: Structure, budget: int = DEFAULT_ENUM_BUDGET) -> list[OperationTable]:
    """All unary polymorphisms, in lexicographic order of their tables."""
    d = s.domain_size
    if d**d > budget:
        raise BudgetExceeded(f"{d}^{d} unary maps exceed the enumeration budget {budget}")
    rels = list(s.relations.values())
    out = []
    for table in itertools.product(range(d), repeat=d):
        if all(tuple(table[v] for v in t) in r.tuples for r in rels for t in r.tuples):
            out.append(OperationTable(1, d, table))
    return out


@dataclass(frozen=True)
class SchaeferFlags:
    zero_valid: bool
    one_valid: bool
    horn: bool
    anti_horn: bool
    bijunctive: bool
    affine: bool

    @property
    def is_schaefer(self) -> bool:
        return self.horn or self.anti_horn or self.bijunctive or self.affine

    @property
    def tractable(self) -> bool:
        return self.is_schaefer or self.zero_valid or self.one_valid

    def as_dict(self) -> dict[str, bool]:
        return {
            "zero_valid": self.zero_valid,
            "one_valid": self.one_valid,
            "horn": self.horn,
            "anti_horn": self.anti_horn,
            "bijunctive": self.bijunctive,
            "affine": self.affine,
            "is_schaefer": self.is_schaefer,
        }


def schaefer_flags(s: Structure) -> SchaeferFlags:
    if s.domain_size != 2:
        raise PreconditionError("Schaefer flags are defined for the Boolean domain only")
    return SchaeferFlags(
        zero_valid=closed_under(s, CONST0),
        one_valid=closed_under(s, CONST1),
        horn=closed_under(s, MIN),
        anti_horn=closed_under(s, MAX),
        bijunctive=closed_under(s, MAJORITY),
        affine=closed_under(s, MINORITY),
    )


def compute_core(s: Structure, budget: int = DEFAULT_ENUM_BUDGET) -> tuple[Structure, OperationTable]:
    """Image of s under a minimal-range endomorphism, reindexed onto {0..|range|-1}.

    Among endomorphisms of minimal range the lexicographically least table wins.
    """
    ends = endomorphisms(s, budget)
    e = min(ends, key=lambda f: (len(f.range), f.table))
    values = sorted(e.range)
    reindex = {v: i for i, v in enumerate(values)}
    rels = {
        name: Relation(r.arity, {tuple(reindex[e.table[v]] for v in t) for t in r.tuples})
        for name, r in s.relations.items()
    }
    labels = tuple(s.labels[v] for v in values) if s.labels is not None else None
    return Structure(len(values), rels, labels), e


def _power_instance(s: Structure, m: int, budget: int) -> tuple[Instance, list[tuple[int, ...]]]:
    """CSP whose solutions are exactly the m-ary polymorphisms of s."""
    d = s.domain_size
    points = list(itertools.product(range(d), repeat=m))
    if len(points) > budget:
        raise BudgetExceeded(f"{d}^{m} argument tuples exceed the budget")
    name = {p: "p" + "_".join(map(str, p)) for p in points}
    cost = sum(len(r) ** m for r in s.relations.values())
    if cost > budget:
        raise BudgetExceeded(f"{cost} row combinations exceed the budget {budget}")
    constraints = {}
    for sym, r in s.relations.items():
        rows = sorted(r.tuples)
        for choice in itertools.product(rows, repeat=m):
            args = tuple(name[col] for col in zip(*choice))
            constraints[Constraint(sym, args)] = None
    inst = Instance(tuple(name[p] for p in points), tuple(constraints), s)
    return inst, points


def polymorphisms(s: Structure, m: int, budget: int = DEFAULT_ENUM_BUDGET) -> Iterator[OperationTable]:
    """Enumerate the m-ary polymorphisms of s in lexicographic table order."""
    from .solvers import iter_solutions

    inst, points = _power_instance(s, m, budget)
    for sol in iter_solutions(inst, budget=budget):
        yield OperationTable(m, s.domain_size, tuple(sol[v] for v in inst.variables))


@dataclass(frozen=True)
class PpCheck:
    """Outcome of a pp-definability test; falsy when not definable.

    ``certificate`` is a polymorphism of the language that does not preserve
    the target, which proves the target is not pp-definable.
    """

    definable: bool
    certificate: OperationTable | None = None

    def __bool__(self) -> bool:
        return self.definable


def ppdef_check(r: Relation, s: Structure, budget: int = DEFAULT_ENUM_BUDGET) -> PpCheck:
    """Decide whether r is pp-definable in s (with equality).

    r is pp-definable iff every t-ary polymorphism of s preserves r, where
    t = |r|. Rather than listing polymorphisms, this searches directly for a
    t-ary polymorphism sending the |r| rows of r outside r.
    """
    from .solvers import solve_bruteforce

    d = s.domain_size
    if r.max_value() >= d:
        raise PreconditionError("target relation has values outside the structure's domain")
    if not r.tuples or r.is_full(d):
        return PpCheck(True)
    rows = sorted(r.tuples)
    t = len(rows)
    inst, points = _power_instance(s, t, budget)
    target = "__target_complement__"
    while target in s:
        target += "_"
    alien = Structure(d, {target: complement(r, d)})
    names = {p: v for p, v in zip(points, inst.variables)}
    bad = Constraint(target, tuple(names[col] for col in zip(*rows)), True)
    inst = Instance(inst.variables, inst.constraints + (bad,), s, alien)
    res = solve_bruteforce(inst, budget=max(budget, 10**7))
    if not res.satisfiable:
        return PpCheck(True)
    f = OperationTable(t, d, tuple(res.witness[v] for v in inst.variables))
    return PpCheck(False, f)
