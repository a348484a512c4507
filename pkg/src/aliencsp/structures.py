"""Finite relational structures, CSP instances with alien constraints, and
equality-language relations encoded by kernel partitions."""

from __future__ import annotations

import functools
import itertools
from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Iterable, Iterator, Mapping, NamedTuple, Sequence

from .errors import (
    ArityMismatch,
    DomainBoundViolation,
    NameClash,
    PreconditionError,
    UnknownSymbol,
)

Tuple = tuple[int, ...]
Assignment = dict[str, int]

__all__ = [
    "Relation",
    "Structure",
    "Constraint",
    "Instance",
    "Assignment",
    "complement",
    "constants_structure",
    "evaluate",
    "set_partitions",
    "kernel",
    "blocks_of",
    "rgs_from_blocks",
    "EqRelation",
    "EqInstance",
    "EQ",
    "NEQ",
    "neq_relation",
]


@dataclass(frozen=True)
class Relation:
    """A finite relation given by its arity and an explicit tuple set.

    Domain bounds are not known to a bare relation; `Structure` checks them.
    """

    arity: int
    tuples: frozenset[Tuple] = frozenset()

    def __post_init__(self):
        if not isinstance(self.arity, int) or self.arity < 1:
            raise ArityMismatch(f"arity must be a positive integer, got {self.arity!r}")
        tuples = frozenset(tuple(int(v) for v in t) for t in self.tuples)
        for t in tuples:
            if len(t) != self.arity:
                raise ArityMismatch(f"tuple {t} does not have arity {self.arity}")
            if any(v < 0 for v in t):
                raise DomainBoundViolation(f"tuple {t} has a negative entry")
        object.__setattr__(self, "tuples", tuples)

    def __contains__(self, t) -> bool:
        return tuple(t) in self.tuples

    def __iter__(self) -> Iterator[Tuple]:
        return iter(sorted(self.tuples))

    def __len__(self) -> int:
        return len(self.tuples)

    def max_value(self) -> int:
        return max((max(t) for t in self.tuples), default=-1)

    def is_full(self, d: int) -> bool:
        return len(self.tuples) == d**self.arity

    def image(self, f: Sequence[int]) -> Relation:
        """Apply a unary map (given as a table) to every tuple."""
        return Relation(self.arity, {tuple(f[v] for v in t) for t in self.tuples})

    def __repr__(self) -> str:
        return f"Relation({self.arity}, {sorted(self.tuples)})"


def complement(r: Relation, d: int) -> Relation:
    """Return D^k minus r."""
    if r.max_value() >= d:
        raise DomainBoundViolation(f"relation has entries outside a domain of size {d}")
    everything = itertools.product(range(d), repeat=r.arity)
    return Relation(r.arity, {t for t in everything if t not in r.tuples})


@dataclass(frozen=True, eq=False)
class Structure:
    """Domain {0..d-1} plus an ordered signature of named relations.

    ``labels`` optionally records the names domain values had in the source
    document so that serialization can reproduce them.
    """

    domain_size: int
    relations: Mapping[str, Relation] = field(default_factory=dict)
    labels: tuple[str, ...] | None = None

    def __post_init__(self):
        if not isinstance(self.domain_size, int) or self.domain_size < 1:
            raise DomainBoundViolation(f"domain size must be positive, got {self.domain_size!r}")
        rels = dict(self.relations)
        for name, rel in rels.items():
            if not isinstance(rel, Relation):
                raise TypeError(f"relation {name!r} is not a Relation")
            if rel.max_value() >= self.domain_size:
                raise DomainBoundViolation(
                    f"relation {name!r} has an entry outside domain {{0..{self.domain_size - 1}}}"
                )
        if self.labels is not None:
            labels = tuple(self.labels)
            if len(labels) != self.domain_size or len(set(labels)) != len(labels):
                raise NameClash("domain labels must be distinct and match the domain size")
            object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "relations", MappingProxyType(rels))

    def __getitem__(self, name: str) -> Relation:
        try:
            return self.relations[name]
        except KeyError:
            raise UnknownSymbol(f"no relation named {name!r}") from None

    def __contains__(self, name: str) -> bool:
        return name in self.relations

    def __iter__(self) -> Iterator[str]:
        return iter(self.relations)

    def __len__(self) -> int:
        return len(self.relations)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Structure):
            return NotImplemented
        return (
            self.domain_size == other.domain_size
            and list(self.relations.items()) == list(other.relations.items())
            and self.labels == other.labels
        )

    def __hash__(self) -> int:
        return hash((self.domain_size, tuple(self.relations.items())))

    def __repr__(self) -> str:
        return f"Structure(d={self.domain_size}, {dict(self.relations)!r})"

    def union(self, other: Structure) -> Structure:
        if other.domain_size != self.domain_size:
            raise PreconditionError("structures have different domains")
        clash = set(self.relations) & set(other.relations)
        if clash:
            raise NameClash(f"signatures are not disjoint: {sorted(clash)}")
        return Structure(self.domain_size, {**self.relations, **other.relations}, self.labels)

    def with_relations(self, extra: Mapping[str, Relation]) -> Structure:
        """Union with extra relations given as a mapping."""
        return self.union(Structure(self.domain_size, extra))


def constants_structure(d: int) -> Structure:
    """The singleton unary relations c_0 .. c_{d-1}."""
    if d < 1:
        raise PreconditionError("domain size must be positive")
    return Structure(d, {f"c_{a}": Relation(1, {(a,)}) for a in range(d)})


class Constraint(NamedTuple):
    rel: str
    args: tuple[str, ...]
    alien: bool = False

    def __repr__(self) -> str:
        mark = "!" if self.alien else ""
        return f"{mark}{self.rel}({', '.join(self.args)})"


@dataclass(frozen=True)
class Instance:
    """A CSP instance over base ∪ alien; alien-flagged constraints are counted by `k`."""

    variables: tuple[str, ...]
    constraints: tuple[Constraint, ...]
    base: Structure
    alien: Structure = None  # type: ignore[assignment]

    def __post_init__(self):
        object.__setattr__(self, "variables", tuple(self.variables))
        object.__setattr__(
            self,
            "constraints",
            tuple(Constraint(c[0], tuple(c[1]), bool(c[2]) if len(c) > 2 else False) for c in self.constraints),
        )
        if self.alien is None:
            object.__setattr__(self, "alien", Structure(self.base.domain_size))
        if len(set(self.variables)) != len(self.variables):
            raise NameClash("duplicate variable name")
        if self.alien.domain_size != self.base.domain_size:
            raise PreconditionError("base and alien structures must share a domain")
        known = set(self.variables)
        for i, c in enumerate(self.constraints):
            struct = self.alien if c.alien else self.base
            if c.rel not in struct:
                side = "alien" if c.alien else "base"
                raise UnknownSymbol(f"constraint {i}: {c.rel!r} is not a {side} symbol")
            if len(c.args) != struct[c.rel].arity:
                raise ArityMismatch(
                    f"constraint {i}: {c.rel!r} has arity {struct[c.rel].arity}, got {len(c.args)} arguments"
                )
            for v in c.args:
                if v not in known:
                    raise UnknownSymbol(f"constraint {i}: unknown variable {v!r}")

    @property
    def domain_size(self) -> int:
        return self.base.domain_size

    @property
    def k(self) -> int:
        """Number of alien constraints (#ac)."""
        return sum(1 for c in self.constraints if c.alien)

    def relation(self, c: Constraint) -> Relation:
        return (self.alien if c.alien else self.base)[c.rel]

    def replace(self, **changes) -> Instance:
        fields = dict(
            variables=self.variables, constraints=self.constraints, base=self.base, alien=self.alien
        )
        fields.update(changes)
        return Instance(**fields)


def evaluate(inst: Instance, a: Mapping[str, int]) -> bool:
    """True iff the total assignment `a` satisfies every constraint of `inst`."""
    unknown = set(a) - set(inst.variables)
    if unknown:
        raise UnknownSymbol(f"assignment mentions unknown variables {sorted(unknown)}")
    missing = [v for v in inst.variables if v not in a]
    if missing:
        raise PreconditionError(f"assignment is not total, missing {missing}")
    for c in inst.constraints:
        if tuple(a[v] for v in c.args) not in inst.relation(c).tuples:
            return False
    return True


# -- partitions and kernels -------------------------------------------------
#
# A partition of {0..r-1} is stored as its restricted growth string: position i
# holds the index of its block, blocks numbered by first occurrence.


def set_partitions(n: int) -> Iterator[Tuple]:
    """All partitions of {0..n-1} as restricted growth strings, lexicographically."""
    if n == 0:
        yield ()
        return

    def grow(prefix: list[int], top: int):
        if len(prefix) == n:
            yield tuple(prefix)
            return
        for b in range(top + 2):
            prefix.append(b)
            yield from grow(prefix, max(top, b))
            prefix.pop()

    yield from grow([0], 0)


def kernel(t: Iterable) -> Tuple:
    """Equality pattern of a tuple as a restricted growth string."""
    seen: dict = {}
    out = []
    for v in t:
        if v not in seen:
            seen[v] = len(seen)
        out.append(seen[v])
    return tuple(out)


def blocks_of(rgs: Tuple) -> list[list[int]]:
    blocks: list[list[int]] = []
    for i, b in enumerate(rgs):
        if b == len(blocks):
            blocks.append([])
        blocks[b].append(i)
    return blocks


def rgs_from_blocks(blocks: Iterable[Iterable[int]], arity: int) -> Tuple:
    label = [-1] * arity
    for j, block in enumerate(blocks):
        for i in block:
            if not 0 <= i < arity:
                raise DomainBoundViolation(f"position {i} outside 0..{arity - 1}")
            if label[i] != -1:
                raise ArityMismatch(f"position {i} occurs in two blocks")
            label[i] = j
    if -1 in label:
        raise ArityMismatch("blocks do not cover every position")
    return kernel(label)


@dataclass(frozen=True)
class EqRelation:
    """A relation first-order definable over (N; =), stored as its set of kernels."""

    arity: int
    kernels: frozenset[Tuple] = frozenset()

    def __post_init__(self):
        if not isinstance(self.arity, int) or self.arity < 1:
            raise ArityMismatch(f"arity must be a positive integer, got {self.arity!r}")
        ks = frozenset(tuple(k) for k in self.kernels)
        for k in ks:
            if len(k) != self.arity or kernel(k) != k:
                raise ArityMismatch(f"{k} is not a partition of {self.arity} positions")
        object.__setattr__(self, "kernels", ks)

    def __contains__(self, t) -> bool:
        return kernel(t) in self.kernels

    def __len__(self) -> int:
        return len(self.kernels)

    def __repr__(self) -> str:
        return f"EqRelation({self.arity}, {sorted(self.kernels)})"

    @classmethod
    def from_tuples(cls, arity: int, tuples: Iterable[Iterable[int]]) -> EqRelation:
        """Smallest equality relation containing the given tuples."""
        return cls(arity, {kernel(t) for t in tuples})

    @classmethod
    def full(cls, arity: int) -> EqRelation:
        return cls(arity, set(set_partitions(arity)))

    @property
    def is_0valid(self) -> bool:
        return (0,) * self.arity in self.kernels

    def slice(self, c: int) -> Relation:
        """The finite relation R ∩ {0..c-1}^arity."""
        if c < 1:
            raise PreconditionError("slice size must be positive")
        return _slice(self, c)


@functools.lru_cache(maxsize=4096)
def _slice(r: EqRelation, c: int) -> Relation:
    tuples = set()
    for k in r.kernels:
        nblocks = max(k) + 1
        for values in itertools.permutations(range(c), nblocks):
            tuples.add(tuple(values[b] for b in k))
    return Relation(r.arity, tuples)


EQ = EqRelation(2, {(0, 0)})
NEQ = EqRelation(2, {(0, 1)})


def neq_relation(r: int) -> EqRelation:
    """NEQ_r: all r-tuples with pairwise distinct entries."""
    return EqRelation(r, {tuple(range(r))})


@dataclass(frozen=True)
class EqInstance:
    """An instance over equality languages; `pins` fix variables to values (unit assignments)."""

    variables: tuple[str, ...]
    constraints: tuple[Constraint, ...]
    base: Mapping[str, EqRelation]
    alien: Mapping[str, EqRelation] = field(default_factory=dict)
    pins: Mapping[str, int] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "variables", tuple(self.variables))
        object.__setattr__(
            self,
            "constraints",
            tuple(Constraint(c[0], tuple(c[1]), bool(c[2]) if len(c) > 2 else False) for c in self.constraints),
        )
        object.__setattr__(self, "base", MappingProxyType(dict(self.base)))
        object.__setattr__(self, "alien", MappingProxyType(dict(self.alien)))
        object.__setattr__(self, "pins", MappingProxyType(dict(self.pins)))
        if len(set(self.variables)) != len(self.variables):
            raise NameClash("duplicate variable name")
        clash = set(self.base) & set(self.alien)
        if clash:
            raise NameClash(f"signatures are not disjoint: {sorted(clash)}")
        known = set(self.variables)
        for i, c in enumerate(self.constraints):
            lang = self.alien if c.alien else self.base
            if c.rel not in lang:
                raise UnknownSymbol(f"constraint {i}: unknown symbol {c.rel!r}")
            if len(c.args) != lang[c.rel].arity:
                raise ArityMismatch(f"constraint {i}: wrong number of arguments for {c.rel!r}")
            if not set(c.args) <= known:
                raise UnknownSymbol(f"constraint {i}: unknown variable in {c.args}")
        for v, val in self.pins.items():
            if v not in known:
                raise UnknownSymbol(f"pin on unknown variable {v!r}")
            if val < 0:
                raise DomainBoundViolation(f"pin value {val} is negative")

    @property
    def k(self) -> int:
        return sum(1 for c in self.constraints if c.alien)

    def relation(self, c: Constraint) -> EqRelation:
        return (self.alien if c.alien else self.base)[c.rel]

    def satisfied_by(self, a: Mapping[str, int]) -> bool:
        if any(a[v] != val for v, val in self.pins.items()):
            return False
        return all(kernel(a[v] for v in c.args) in self.relation(c).kernels for c in self.constraints)

    def replace(self, **changes) -> EqInstance:
        fields = dict(
            variables=self.variables,
            constraints=self.constraints,
            base=self.base,
            alien=self.alien,
            pins=self.pins,
        )
        fields.update(changes)
        return EqInstance(**fields)
