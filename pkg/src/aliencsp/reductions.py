"""Instance transformers behind the hardness and tractability arguments.

Every function here is pure: it returns a new instance (or definition) or
raises a typed error, never a partially rewritten input.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterable, Mapping, Sequence

from .algebra import FLIP, OperationTable, closed_under, compute_core, endomorphisms
from .errors import NameClash, PreconditionError, UnknownSymbol
from .solvers import SolveResult, iter_solutions, solve_bruteforce
from .structures import (
    EQ,
    Constraint,
    EqInstance,
    EqRelation,
    Instance,
    Relation,
    Structure,
    complement,
)

__all__ = [
    "Atom",
    "PpDefinition",
    "EQ_SYMBOL",
    "alien_bound",
    "inline_ppdefs",
    "redundant_to_alien",
    "is_redundant",
    "impl_via_redundant",
    "equiv_via_impl",
    "redundant_via_equiv",
    "merge_constants",
    "define_c1_via_nonvalid",
    "neq_gadget_reduce",
    "endomorphism_relation",
    "constants_to_E_gadget",
    "neq_expansion_gadget",
    "core_reduce",
    "core_lift",
]

EQ_SYMBOL = "="
SOURCES = ("base", "alien", "eq")


@dataclass(frozen=True)
class Atom:
    """One conjunct of a pp-formula. Arguments index the head variables
    0..arity-1 followed by the existential ones."""

    rel: str
    args: tuple[int, ...]
    source: str = "base"

    def __post_init__(self):
        object.__setattr__(self, "args", tuple(int(a) for a in self.args))
        if self.source not in SOURCES:
            raise PreconditionError(f"atom source must be one of {SOURCES}, got {self.source!r}")
        if self.source == "eq" and (self.rel != EQ_SYMBOL or len(self.args) != 2):
            raise PreconditionError("equality atoms are binary and use the '=' symbol")


@dataclass(frozen=True)
class PpDefinition:
    """R(x_0..x_{arity-1}) ≡ ∃ y_0..y_{n_exist-1}: atom ∧ ... ∧ atom."""

    arity: int
    n_exist: int
    atoms: tuple[Atom, ...]

    def __post_init__(self):
        atoms = tuple(a if isinstance(a, Atom) else Atom(*a) for a in self.atoms)
        object.__setattr__(self, "atoms", atoms)
        if self.arity < 1 or self.n_exist < 0:
            raise PreconditionError("pp-definition needs arity >= 1 and n_exist >= 0")
        top = self.arity + self.n_exist
        for a in atoms:
            if any(not 0 <= v < top for v in a.args):
                raise PreconditionError(f"atom {a.rel}{a.args} refers to a variable outside 0..{top - 1}")

    @property
    def alien_count(self) -> int:
        return sum(1 for a in self.atoms if a.source == "alien")

    @property
    def n_vars(self) -> int:
        return self.arity + self.n_exist

    def check_types(self, base: Mapping, alien: Mapping = {}) -> None:
        """Raise unless every atom names a relation of the right arity."""
        for a in self.atoms:
            if a.source == "eq":
                continue
            lang = base if a.source == "base" else alien
            if a.rel not in lang:
                raise UnknownSymbol(f"definition uses unknown {a.source} symbol {a.rel!r}")
            if lang[a.rel].arity != len(a.args):
                raise PreconditionError(f"atom {a.rel}{a.args} does not match arity {lang[a.rel].arity}")

    def as_instance(self, base: Structure, alien: Structure | None = None) -> Instance:
        """The defining formula as an instance over variables x0.., y0.."""
        alien = alien if alien is not None else Structure(base.domain_size)
        self.check_types(base.relations, alien.relations)
        names = [f"x{i}" for i in range(self.arity)] + [f"y{i}" for i in range(self.n_exist)]
        if any(a.source == "eq" for a in self.atoms):
            base = _with_equality(base)
        cons = [Constraint(a.rel, tuple(names[v] for v in a.args), a.source == "alien") for a in self.atoms]
        return Instance(tuple(names), tuple(cons), base, alien)

    def evaluate(self, base: Structure, alien: Structure | None = None) -> Relation:
        """The relation defined over a finite structure (projection of all solutions)."""
        inst = self.as_instance(base, alien)
        head = inst.variables[: self.arity]
        return Relation(self.arity, {tuple(s[v] for v in head) for s in iter_solutions(inst)})

    def format(self, head: Sequence[str] | None = None, exist: Sequence[str] | None = None) -> str:
        head = list(head) if head is not None else [f"x{i + 1}" for i in range(self.arity)]
        exist = list(exist) if exist is not None else [f"y{i + 1}" for i in range(self.n_exist)]
        names = head + exist
        parts = []
        for a in self.atoms:
            if a.rel in (EQ_SYMBOL, "≠") and len(a.args) == 2:
                parts.append(f"{names[a.args[0]]} {a.rel} {names[a.args[1]]}")
            else:
                parts.append(f"{a.rel}({', '.join(names[v] for v in a.args)})")
        body = " ∧ ".join(parts) if parts else "⊤"
        if self.n_exist:
            return f"∃{', '.join(exist)}: {body}"
        return body


def _equality_relation(d: int) -> Relation:
    return Relation(2, {(a, a) for a in range(d)})


def _with_equality(base: Structure) -> Structure:
    eq = _equality_relation(base.domain_size)
    if EQ_SYMBOL in base:
        if base[EQ_SYMBOL] != eq:
            raise NameClash(f"base already uses {EQ_SYMBOL!r} for a different relation")
        return base
    return base.with_relations({EQ_SYMBOL: eq})


def _fresh(prefix: str, taken: set[str]) -> str:
    i = 0
    while f"{prefix}{i}" in taken:
        i += 1
    name = f"{prefix}{i}"
    taken.add(name)
    return name


# -- pp-definition inlining -----------------------------------------------


def alien_bound(defs: Mapping[str, PpDefinition], k: int) -> int:
    """Upper bound on #ac after inlining: each alien constraint becomes at most
    max(1, largest alien-atom count) alien constraints."""
    per = max([1] + [d.alien_count for d in defs.values()])
    return k * per


def inline_ppdefs(
    inst: Instance,
    defs: Mapping[str, PpDefinition],
    base: Structure | None = None,
    alien: Structure | None = None,
) -> Instance:
    """Replace every constraint on a defined symbol by the atoms of its definition.

    ``base``/``alien`` are the target structures the atoms refer to; by default
    the instance's own structures minus the defined symbols. Definitions used
    by base-flagged constraints may not contain alien atoms, which keeps the
    output within ``alien_bound(defs, inst.k)``.
    """
    d = inst.domain_size
    if base is None:
        base = Structure(d, {n: r for n, r in inst.base.relations.items() if n not in defs}, inst.base.labels)
    if alien is None:
        alien = Structure(d, {n: r for n, r in inst.alien.relations.items() if n not in defs})
    if base.domain_size != d or alien.domain_size != d:
        raise PreconditionError("target structures must keep the instance's domain")
    for name, df in defs.items():
        df.check_types(base.relations, alien.relations)
    taken = set(inst.variables)
    variables = list(inst.variables)
    out: list[Constraint] = []
    needs_eq = False
    for c in inst.constraints:
        if c.rel not in defs:
            side = alien if c.alien else base
            if c.rel not in side or side[c.rel] != inst.relation(c):
                raise UnknownSymbol(f"{c.rel!r} is neither defined nor present in the target structures")
            out.append(c)
            continue
        df = defs[c.rel]
        if df.arity != len(c.args):
            raise PreconditionError(f"definition of {c.rel!r} has arity {df.arity}, constraint has {len(c.args)}")
        if not c.alien and df.alien_count:
            raise PreconditionError(f"base symbol {c.rel!r} is defined with alien atoms")
        names = list(c.args) + [_fresh(f"_{c.rel}_", taken) for _ in range(df.n_exist)]
        variables += names[df.arity:]
        for a in df.atoms:
            needs_eq |= a.source == "eq"
            out.append(Constraint(a.rel, tuple(names[v] for v in a.args), a.source == "alien"))
    if needs_eq:
        base = _with_equality(base)
    return Instance(tuple(variables), tuple(out), base, alien)


# -- redundancy, implication, equivalence ---------------------------------


def _complement_name(sym: str, taken) -> str:
    name = "~" + sym
    while name in taken:
        name = "~" + name
    return name


def redundant_to_alien(inst: Instance, index: int) -> Instance:
    """(V, C \\ {c}) ∪ {R̄(x̄)} with the complement constraint flagged alien.

    The constraint c is redundant in inst iff the output is unsatisfiable.
    """
    if not 0 <= index < len(inst.constraints):
        raise IndexError(f"constraint index {index} out of range 0..{len(inst.constraints) - 1}")
    c = inst.constraints[index]
    if c.alien:
        raise PreconditionError("redundancy is asked about a base constraint")
    rbar = complement(inst.base[c.rel], inst.domain_size)
    name = "~" + c.rel
    if name in inst.alien and inst.alien[name] != rbar or name in inst.base:
        name = _complement_name(c.rel, set(inst.alien) | set(inst.base))
    alien = inst.alien if name in inst.alien else inst.alien.with_relations({name: rbar})
    rest = inst.constraints[:index] + inst.constraints[index + 1 :]
    return Instance(inst.variables, rest + (Constraint(name, c.args, True),), inst.base, alien)


Solver = Callable[[Instance], SolveResult]


def is_redundant(inst: Instance, index: int, solver: Solver = solve_bruteforce) -> bool:
    """Decide redundancy of constraint `index` through the alien instance."""
    return not solver(redundant_to_alien(inst, index)).satisfiable


def _merged_structure(a: Structure, b: Structure) -> Structure:
    if a.domain_size != b.domain_size:
        raise PreconditionError("instances live over different domains")
    extra = {}
    for name, r in b.relations.items():
        if name in a:
            if a[name] != r:
                raise NameClash(f"symbol {name!r} names different relations in the two instances")
        else:
            extra[name] = r
    return a.with_relations(extra) if extra else a


def _same_variables(i1: Instance, i2: Instance) -> None:
    if set(i1.variables) != set(i2.variables):
        raise PreconditionError("both instances must range over the same variable set")


RedundantOracle = Callable[[Instance, int], bool]


def impl_via_redundant(i1: Instance, i2: Instance, redundant: RedundantOracle = is_redundant) -> bool:
    """Sol(i1) ⊆ Sol(i2), asking one redundancy question per constraint of i2
    that does not already occur in i1."""
    _same_variables(i1, i2)
    base = _merged_structure(i1.base, i2.base)
    alien = _merged_structure(i1.alien, i2.alien)
    present = set(i1.constraints)
    for c in i2.constraints:
        if c in present:
            continue
        if c.alien:
            raise PreconditionError("implication targets must be base constraints")
        extended = Instance(i1.variables, i1.constraints + (c,), base, alien)
        if not redundant(extended, len(extended.constraints) - 1):
            return False
    return True


ImplOracle = Callable[[Instance, Instance], bool]


def equiv_via_impl(i1: Instance, i2: Instance, impl: ImplOracle = impl_via_redundant) -> bool:
    _same_variables(i1, i2)
    return impl(i1, i2) and impl(i2, i1)


EquivOracle = Callable[[Instance, Instance], bool]


def redundant_via_equiv(inst: Instance, index: int, equiv: EquivOracle = equiv_via_impl) -> bool:
    """c is redundant iff (V, C) and (V, C \\ {c}) are equivalent."""
    if not 0 <= index < len(inst.constraints):
        raise IndexError(f"constraint index {index} out of range 0..{len(inst.constraints) - 1}")
    rest = inst.constraints[:index] + inst.constraints[index + 1 :]
    return equiv(inst, inst.replace(constraints=rest))


# -- constants --------------------------------------------------------------


def _constant_value(r: Relation) -> int | None:
    if r.arity == 1 and len(r.tuples) == 1:
        return next(iter(r.tuples))[0]
    return None


def merge_constants(inst: Instance) -> Instance:
    """Collapse all applications of each alien constant onto one variable.

    Every alien relation must be a singleton unary relation. Variables sharing
    a constant are identified with the earliest-declared one among them, so
    the output has at most one constraint per constant symbol.
    """
    for name, r in inst.alien.relations.items():
        if _constant_value(r) is None:
            raise PreconditionError(f"alien relation {name!r} is not a constant")
    order = {v: i for i, v in enumerate(inst.variables)}
    parent = {v: v for v in inst.variables}

    def find(v):
        while parent[v] != v:
            parent[v] = parent[parent[v]]
            v = parent[v]
        return v

    def union(u, v):
        ru, rv = find(u), find(v)
        if ru != rv:
            if order[rv] < order[ru]:
                ru, rv = rv, ru
            parent[rv] = ru

    first: dict[str, str] = {}
    for c in inst.constraints:
        if c.alien:
            v = c.args[0]
            if c.rel in first:
                union(first[c.rel], v)
            else:
                first[c.rel] = v
    rename = {v: find(v) for v in inst.variables}
    out = []
    emitted = set()
    for c in inst.constraints:
        if c.alien:
            if c.rel in emitted:
                continue
            emitted.add(c.rel)
        out.append(Constraint(c.rel, tuple(rename[v] for v in c.args), c.alien))
    variables = tuple(v for v in inst.variables if rename[v] == v)
    return Instance(variables, tuple(out), inst.base, inst.alien)


def define_c1_via_nonvalid(
    r: Relation,
    c0_def: PpDefinition | None = None,
    r_symbol: str = "R",
    c0_symbol: str = "c_0",
) -> PpDefinition:
    """pp-definition of c_1 from a nonempty Boolean relation r that is not 0-valid.

    With the lexicographically least tuple a of r (never all-zero):
    c_1(x) ≡ ∃y: c_0(y) ∧ r(x_1..x_n), where x_i = x if a_i = 1 and y otherwise.
    ``c0_def`` optionally supplies c_0 as a unary base definition, which is
    inlined in place of the atom ``c0_symbol(y)``.
    """
    if not r.tuples:
        raise PreconditionError("relation is empty")
    if r.max_value() > 1:
        raise PreconditionError("relation is not Boolean")
    if (0,) * r.arity in r.tuples:
        raise PreconditionError("relation is 0-valid")
    a = min(r.tuples)
    if 0 not in a:
        return PpDefinition(1, 0, (Atom(r_symbol, (0,) * r.arity, "alien"),))
    atoms = [Atom(r_symbol, tuple(0 if v else 1 for v in a), "alien")]
    n_exist = 1
    if c0_def is None:
        atoms.insert(0, Atom(c0_symbol, (1,), "base"))
    else:
        if c0_def.arity != 1 or c0_def.alien_count:
            raise PreconditionError("c_0 must be given by a unary definition without alien atoms")
        # head of c0_def becomes y (index 1), its existentials follow
        shift = {0: 1, **{1 + j: 2 + j for j in range(c0_def.n_exist)}}
        inlined = [Atom(b.rel, tuple(shift[v] for v in b.args), b.source) for b in c0_def.atoms]
        atoms = inlined + atoms
        n_exist += c0_def.n_exist
    return PpDefinition(1, n_exist, tuple(atoms))


def _split_constants(merged: Instance) -> tuple[dict[int, str], list[Constraint]]:
    """Map constant value -> pinned variable, plus the remaining base constraints."""
    pinned: dict[int, str] = {}
    rest = []
    for c in merged.constraints:
        if c.alien:
            value = _constant_value(merged.alien[c.rel])
            if value in pinned and pinned[value] != c.args[0]:
                raise PreconditionError(f"two constant symbols denote the value {value}")
            pinned[value] = c.args[0]
        else:
            rest.append(c)
    return pinned, rest


NEQ_SYMBOL = "neq"


def neq_gadget_reduce(inst: Instance) -> Instance:
    """Replace the constants c_0(z_0), c_1(z_1) by one alien z_0 ≠ z_1.

    The base must be Boolean and closed under complement (flip). Constants
    are merged first; a lone constant is dropped since flipping a solution
    keeps it a solution of the base part.
    """
    if inst.domain_size != 2:
        raise PreconditionError("the disequality gadget needs the Boolean domain")
    if not closed_under(inst.base, FLIP):
        raise PreconditionError("base is not invariant under complement")
    merged = merge_constants(inst)
    pinned, rest = _split_constants(merged)
    neq = Structure(2, {NEQ_SYMBOL: Relation(2, {(0, 1), (1, 0)})})
    if 0 in pinned and 1 in pinned:
        rest.append(Constraint(NEQ_SYMBOL, (pinned[0], pinned[1]), True))
    return Instance(merged.variables, tuple(rest), merged.base, neq)


def endomorphism_relation(s: Structure, budget: int = 10**6) -> Relation:
    """End(s) as a d-ary relation: the tables (e(0), .., e(d-1))."""
    return Relation(s.domain_size, {e.table for e in endomorphisms(s, budget)})


E_SYMBOL = "E"


def constants_to_E_gadget(inst: Instance, E: Relation | None = None) -> Instance:
    """Trade the constants c_0..c_{d-1} for one alien E(v_0, .., v_{d-1}).

    E defaults to the endomorphism relation of the base, which must be a core
    so that every tuple of E is a permutation. Constants missing from the
    instance get fresh variables.
    """
    d = inst.domain_size
    if E is None:
        E = endomorphism_relation(inst.base)
    if E.arity != d:
        raise PreconditionError(f"E must have arity {d}")
    ident = tuple(range(d))
    if ident not in E.tuples or any(len(set(t)) != d for t in E.tuples):
        raise PreconditionError("E must be the endomorphism relation of a core")
    merged = merge_constants(inst)
    pinned, rest = _split_constants(merged)
    taken = set(merged.variables)
    variables = list(merged.variables)
    scope = []
    for a in range(d):
        if a not in pinned:
            pinned[a] = _fresh(f"_c{a}_", taken)
            variables.append(pinned[a])
        scope.append(pinned[a])
    # two different constants forced onto one variable make the scope repeat
    # a variable, which E (all permutations) rejects, as it should
    rest.append(Constraint(E_SYMBOL, tuple(scope), True))
    return Instance(tuple(variables), tuple(rest), merged.base, Structure(d, {E_SYMBOL: E}))


def neq_expansion_gadget(
    inst: EqInstance,
    neq_def: PpDefinition,
    c: int,
    base: Mapping[str, EqRelation] | None = None,
    alien: Mapping[str, EqRelation] | None = None,
    units: Iterable[tuple[str, int]] | None = None,
) -> EqInstance:
    """Simulate unit assignments v = i (0 <= i < c) with an all-distinct gadget.

    Fresh variables x_0..x_{c-1} are constrained by ``neq_def`` (a pp-definition
    of NEQ_c); each pinned variable is replaced by x_i. Atoms of the
    definition may use the instance's languages plus any extra relations
    passed in ``base``/``alien``.
    """
    if neq_def.arity != c:
        raise PreconditionError(f"definition has arity {neq_def.arity}, expected {c}")
    langs = {"base": dict(inst.base), "alien": dict(inst.alien)}
    for side, extra in (("base", base), ("alien", alien)):
        for name, r in (extra or {}).items():
            if langs[side].get(name, r) != r:
                raise NameClash(f"{side} symbol {name!r} names two different relations")
            langs[side][name] = r
    base, alien = langs["base"], langs["alien"]
    neq_def.check_types(base, alien)
    pins: dict[str, int] = {}
    for v, val in inst.pins.items() if units is None else units:
        if v not in inst.variables:
            raise UnknownSymbol(f"unit assignment on unknown variable {v!r}")
        if not 0 <= val < c:
            raise PreconditionError(f"unit value {val} outside 0..{c - 1}")
        if pins.get(v, val) != val:
            raise PreconditionError(f"contradicting unit assignments for {v!r}")
        pins[v] = val
    taken = set(inst.variables)
    xs = [_fresh("_x", taken) for _ in range(c)]
    exist = [_fresh("_y", taken) for _ in range(neq_def.n_exist)]
    names = xs + exist
    rename = {v: xs[val] for v, val in pins.items()}
    out = [Constraint(k.rel, tuple(rename.get(v, v) for v in k.args), k.alien) for k in inst.constraints]
    needs_eq = False
    for a in neq_def.atoms:
        needs_eq |= a.source == "eq"
        out.append(Constraint(a.rel, tuple(names[v] for v in a.args), a.source == "alien"))
    if needs_eq:
        if base.get(EQ_SYMBOL, EQ) != EQ:
            raise NameClash(f"{EQ_SYMBOL!r} already names another relation")
        base[EQ_SYMBOL] = EQ
    variables = tuple(v for v in inst.variables if v not in pins) + tuple(names)
    return EqInstance(variables, tuple(out), base, alien, {})


# -- cores --------------------------------------------------------------------


def core_reduce(inst: Instance) -> tuple[Instance, OperationTable]:
    """Rewrite every constraint R(x) as e(R)(x) for a minimal-range
    endomorphism e of base ∪ alien; #ac is unchanged."""
    union = inst.base.union(inst.alien)
    core, e = compute_core(union)
    base = Structure(core.domain_size, {n: core[n] for n in inst.base})
    alien = Structure(core.domain_size, {n: core[n] for n in inst.alien})
    return Instance(inst.variables, inst.constraints, base, alien), e


def core_lift(inst: Instance, base: Structure, alien: Structure | None = None) -> Instance:
    """Reverse direction: read the same constraints over the original structures."""
    alien = alien if alien is not None else Structure(base.domain_size)
    if set(inst.base) - set(base) or set(inst.alien) - set(alien):
        raise UnknownSymbol("original structures lack some symbol of the instance")
    return Instance(inst.variables, inst.constraints, base, alien)
