"""Solving CSPs with alien constraints, and the Boolean complexity classifier."""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Callable, Mapping, Sequence

from .algebra import CONST0, CONST1, FLIP, SchaeferFlags, closed_under, ppdef_check, schaefer_flags
from .errors import PreconditionError
from .reductions import PpDefinition
from .solvers import DEFAULT_NODE_BUDGET, SchaeferClass, SolveResult, solve_bruteforce, solve_schaefer
from .structures import Constraint, Instance, Relation, Structure

__all__ = [
    "UnionDecomposition",
    "decompose_alien",
    "solve_alien_fpt",
    "solve_constant_k1",
    "solve_alien_auto",
    "VerdictKind",
    "BooleanVerdict",
    "classify_boolean",
]

BaseSolver = Callable[[Instance], SolveResult]


@dataclass(frozen=True)
class UnionDecomposition:
    """For each alien symbol, relations whose union is exactly that relation.

    ``defs`` may carry pp-definitions of the parts for callers that want to
    inline them instead of adding the parts to the base as explicit relations.
    """

    parts: Mapping[str, tuple[Relation, ...]]
    defs: Mapping[str, tuple[PpDefinition, ...]] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "parts", MappingProxyType({k: tuple(v) for k, v in self.parts.items()}))
        object.__setattr__(self, "defs", MappingProxyType({k: tuple(v) for k, v in self.defs.items()}))

    @property
    def b(self) -> int:
        """Branching factor: the longest list of parts (at least 1)."""
        return max([1] + [len(p) for p in self.parts.values()])

    @staticmethod
    def part_name(symbol: str, j: int) -> str:
        return f"{symbol}#{j}"


def decompose_alien(
    alien: Structure,
    custom: Mapping[str, Sequence[Relation]] | None = None,
) -> UnionDecomposition:
    """Split every alien relation into singleton relations, one per tuple in
    sorted order, unless ``custom`` supplies parts whose union checks out."""
    custom = custom or {}
    unknown = set(custom) - set(alien)
    if unknown:
        raise PreconditionError(f"decomposition given for unknown symbols {sorted(unknown)}")
    parts = {}
    for name, r in alien.relations.items():
        if name in custom:
            given = tuple(custom[name])
            if any(p.arity != r.arity for p in given):
                raise PreconditionError(f"part of {name!r} has the wrong arity")
            union = frozenset().union(*(p.tuples for p in given)) if given else frozenset()
            if union != r.tuples:
                raise PreconditionError(f"parts of {name!r} do not union to the relation")
            parts[name] = given
        else:
            parts[name] = tuple(Relation(r.arity, {t}) for t in sorted(r.tuples))
    return UnionDecomposition(parts)


def solve_alien_fpt(
    inst: Instance,
    dec: UnionDecomposition | None = None,
    base_solver: BaseSolver = solve_bruteforce,
) -> SolveResult:
    """Branch on the alien constraints, replacing each by one part of its
    decomposition; SAT iff some leaf (a base instance) is SAT.

    Leaves are visited in lexicographic order of part indices, alien
    constraints taken in declaration order, so at most b^k leaves are solved.
    """
    dec = dec if dec is not None else decompose_alien(inst.alien)
    missing = {c.rel for c in inst.constraints if c.alien} - set(dec.parts)
    if missing:
        raise PreconditionError(f"no decomposition for alien symbols {sorted(missing)}")
    extra = {}
    for c in inst.constraints:
        if c.alien:
            for j, p in enumerate(dec.parts[c.rel]):
                extra[UnionDecomposition.part_name(c.rel, j)] = p
    base = inst.base.with_relations(extra) if extra else inst.base
    slots = [i for i, c in enumerate(inst.constraints) if c.alien]
    choices = [range(len(dec.parts[inst.constraints[i].rel])) for i in slots]
    leaves = 0
    stats = {"k": len(slots), "b": dec.b}
    for pick in itertools.product(*choices):
        leaves += 1
        cons = list(inst.constraints)
        for i, j in zip(slots, pick):
            c = cons[i]
            cons[i] = Constraint(UnionDecomposition.part_name(c.rel, j), c.args, False)
        leaf = Instance(inst.variables, tuple(cons), base)
        res = base_solver(leaf)
        if res.satisfiable:
            stats["leaves"] = leaves
            return SolveResult(True, res.witness, f"fpt[{res.strategy}]", stats)
    stats["leaves"] = leaves
    return SolveResult(False, None, "fpt", stats)


def _used(inst: Instance, alien: bool | None = None) -> Structure:
    """The relations actually applied by constraints (alien ones prefixed by '!')."""
    rels = {}
    for c in inst.constraints:
        if alien is None or c.alien == alien:
            rels[("!" if c.alien else "") + c.rel] = inst.relation(c)
    return Structure(inst.domain_size, rels)


def solve_constant_k1(inst: Instance) -> SolveResult:
    """Polynomial strategy for one alien constraint over a base that is both
    0- and 1-valid, when the alien relation is closed under some constant.

    A constant tuple (a..a) of the alien relation makes the all-a assignment
    a solution; an empty relation makes the instance unsatisfiable.
    """
    if inst.domain_size != 2 or inst.k > 1:
        raise PreconditionError("constant strategy needs a Boolean instance with at most one alien constraint")
    used_base = _used(inst, alien=False)
    if not (closed_under(used_base, CONST0) and closed_under(used_base, CONST1)):
        raise PreconditionError("base relations are not both 0- and 1-valid")
    n = len(inst.variables)
    if any(not inst.relation(c).tuples for c in inst.constraints):
        return SolveResult(False, None, "constant")
    alien = [c for c in inst.constraints if c.alien]
    value = 0
    if alien:
        r = inst.relation(alien[0])
        consts = [a for a in (0, 1) if (a,) * r.arity in r.tuples]
        if not consts:
            raise PreconditionError("alien relation is not closed under a constant operation")
        value = consts[0]
    return SolveResult(True, dict.fromkeys(inst.variables, value) if n else {}, "constant")


_FPT_ORDER = (SchaeferClass.HORN, SchaeferClass.ANTI_HORN, SchaeferClass.BIJUNCTIVE, SchaeferClass.AFFINE)
_DIRECT_ORDER = (SchaeferClass.ZERO_VALID, SchaeferClass.ONE_VALID) + _FPT_ORDER


def _first_class(s: Structure, order) -> SchaeferClass | None:
    for cls in order:
        if closed_under(s, cls.operation):
            return cls
    return None


def solve_alien_auto(inst: Instance, budget: int = DEFAULT_NODE_BUDGET) -> SolveResult:
    """Exact dispatcher; ``strategy`` on the result records the route taken.

    Boolean instances whose used relations jointly fall in a Schaefer or
    constant-valid class are solved directly. Otherwise a Schaefer base
    (Horn, anti-Horn, bijunctive, affine, in that priority) is combined with
    branching over singleton parts, which every one of these classes
    preserves. One alien constraint over a 0- and 1-valid base with a
    constant-closed alien relation uses the constant strategy. Everything
    else goes to backtracking.
    """
    if inst.domain_size == 2:
        everything = _used(inst)
        cls = _first_class(everything, _DIRECT_ORDER)
        if cls is not None:
            return solve_schaefer(inst, cls, check=False)
        if inst.k > 0:
            cls = _first_class(_used(inst, alien=False), _FPT_ORDER)
            if cls is not None:
                return solve_alien_fpt(inst, base_solver=lambda leaf: solve_schaefer(leaf, cls, check=False))
            if inst.k == 1:
                try:
                    return solve_constant_k1(inst)
                except PreconditionError:
                    pass
    return solve_bruteforce(inst, budget)


# -- Boolean classification ----------------------------------------------------


class VerdictKind(str, enum.Enum):
    FPT = "FPT"
    NPH_AT_1 = "NPH_AT_1"
    NPH_AT_2_P_AT_1 = "NPH_AT_2_P_AT_1"
    BASE_HARD = "BASE_HARD"
    TOTAL_P = "TOTAL_P"


@dataclass(frozen=True)
class BooleanVerdict:
    kind: VerdictKind
    base_flags: SchaeferFlags
    union_flags: SchaeferFlags
    evidence: Mapping[str, object] = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "verdict": self.kind.value,
            "base_flags": self.base_flags.as_dict(),
            "union_flags": self.union_flags.as_dict(),
            "evidence": _jsonable(self.evidence),
        }


def _jsonable(x):
    if isinstance(x, Mapping):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    return x


def _zero_one_pair(b: Structure) -> tuple[str, str] | None:
    """(R0, R1): R0 0-valid and not 1-valid, R1 1-valid and not 0-valid."""
    zeros = [n for n, r in b.relations.items() if _constant_closed(r, 0) and not _constant_closed(r, 1)]
    ones = [n for n, r in b.relations.items() if _constant_closed(r, 1) and not _constant_closed(r, 0)]
    if zeros and ones:
        return zeros[0], ones[0]
    return None


def _constant_closed(r: Relation, a: int) -> bool:
    """Closure of r under the constant-a operation."""
    return not r.tuples or (a,) * r.arity in r.tuples


def classify_boolean(base: Structure, alien: Structure) -> BooleanVerdict:
    """Classify Alien(base, alien) by #ac.

    TOTAL_P: the union is already tractable. BASE_HARD: the base alone is
    neither Schaefer nor 0-/1-valid. FPT: the base is Schaefer. NPH_AT_2_P_AT_1:
    the base is 0- and 1-valid, the alien side has a 0/1-pair and every alien
    relation is closed under some constant operation. NPH_AT_1 otherwise.
    """
    if base.domain_size != 2 or alien.domain_size != 2:
        raise PreconditionError("Boolean classification needs domain size 2")
    union = base.union(alien)
    fa = schaefer_flags(base)
    fu = schaefer_flags(union)
    evidence: dict = {}
    if not fa.tractable:
        return BooleanVerdict(VerdictKind.BASE_HARD, fa, fu, evidence)
    if fu.tractable:
        return BooleanVerdict(VerdictKind.TOTAL_P, fa, fu, evidence)
    if fa.is_schaefer:
        return BooleanVerdict(VerdictKind.FPT, fa, fu, evidence)
    pair = _zero_one_pair(alien)
    all_constant = all(_constant_closed(r, 0) or _constant_closed(r, 1) for r in alien.relations.values())
    evidence["zero_one_pair"] = list(pair) if pair else None
    evidence["alien_constant_closed"] = all_constant
    evidence["base_complement_invariant"] = closed_under(base, FLIP)
    for a in (0, 1):
        check = ppdef_check(Relation(1, {(a,)}), base)
        evidence[f"c{a}_definable"] = check.definable
        if check.certificate is not None:
            evidence[f"c{a}_certificate"] = list(check.certificate.table)
    if fa.zero_valid and fa.one_valid and pair is not None and all_constant:
        return BooleanVerdict(VerdictKind.NPH_AT_2_P_AT_1, fa, fu, evidence)
    return BooleanVerdict(VerdictKind.NPH_AT_1, fa, fu, evidence)
