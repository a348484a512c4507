"""Equality languages: relations over (N; =) stored as sets of kernels.

Covers membership, 0-validity, the Horn test, slices, the computation of the
threshold c, orbit formulas, the two alien solvers (Horn branching and the
bounded-range enumeration) and a bounded search for pp-definitions of NEQ_c.
"""

from __future__ import annotations

import enum
import itertools
import math
import re
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

from .algebra import MINORITY, closed_under
from .errors import ArityMismatch, MalformedDocument, PreconditionError
from .reductions import EQ_SYMBOL, Atom, PpDefinition
from .solvers import SolveResult, ground_equality, solve_bruteforce
from .structures import (
    NEQ,
    Constraint,
    EqInstance,
    EqRelation,
    Relation,
    Structure,
    blocks_of,
    kernel,
    neq_relation,
    set_partitions,
)

__all__ = [
    "eq_from_formula",
    "eq_membership",
    "eq_is_0valid",
    "eq_is_horn",
    "eq_slice",
    "eq_compute_c",
    "NEQ_SYMBOL",
    "orbit_definition",
    "orbit_decompose",
    "neq_structure",
    "eq_solve_horn_fpt",
    "eq_solve_alien",
    "INF",
    "WitnessStatus",
    "WitnessResult",
    "verify_neq_definition",
    "neq_witness_search",
    "project_neq",
    "EqVerdictKind",
    "EqVerdict",
    "classify_equality",
]

INF = math.inf
NEQ_SYMBOL = "≠"

Language = Mapping[str, EqRelation] | Sequence[EqRelation]


def _relations(lang: Language) -> list[EqRelation]:
    if isinstance(lang, Mapping):
        return list(lang.values())
    return list(lang)


# -- formulas ---------------------------------------------------------------

_TOKEN = re.compile(r"\s*(?:(x\d+)|(!=|≠)|(=)|([&∧])|([|∨])|([!¬])|(\()|(\))|(true|false))")


def _tokenize(text: str) -> list[tuple[str, str]]:
    kinds = ("var", "neq", "eq", "and", "or", "not", "lp", "rp", "const")
    out = []
    pos = 0
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise MalformedDocument(f"unexpected character {text[pos:].strip()[:1]!r} at offset {pos}")
        for kind, val in zip(kinds, m.groups()):
            if val is not None:
                out.append((kind, val))
                break
        pos = m.end()
    return out


def _parse_formula(text: str, arity: int) -> Callable[[tuple], bool]:
    tokens = _tokenize(text)
    pos = 0

    def peek():
        return tokens[pos][0] if pos < len(tokens) else None

    def take(kind):
        nonlocal pos
        if peek() != kind:
            found = tokens[pos][1] if pos < len(tokens) else "end of formula"
            raise MalformedDocument(f"expected {kind}, found {found!r}")
        pos += 1
        return tokens[pos - 1][1]

    def var():
        i = int(take("var")[1:])
        if i >= arity:
            raise MalformedDocument(f"variable x{i} outside x0..x{arity - 1}")
        return i

    def disj():
        parts = [conj()]
        while peek() == "or":
            take("or")
            parts.append(conj())
        return parts[0] if len(parts) == 1 else (lambda t: any(p(t) for p in parts))

    def conj():
        parts = [unary()]
        while peek() == "and":
            take("and")
            parts.append(unary())
        return parts[0] if len(parts) == 1 else (lambda t: all(p(t) for p in parts))

    def unary():
        kind = peek()
        if kind == "not":
            take("not")
            inner = unary()
            return lambda t: not inner(t)
        if kind == "lp":
            take("lp")
            inner = disj()
            take("rp")
            return inner
        if kind == "const":
            value = take("const") == "true"
            return lambda t: value
        i = var()
        if peek() == "eq":
            take("eq")
            j = var()
            return lambda t: t[i] == t[j]
        take("neq")
        j = var()
        return lambda t: t[i] != t[j]

    f = disj()
    if pos != len(tokens):
        raise MalformedDocument(f"trailing input starting at {tokens[pos][1]!r}")
    return f


def eq_from_formula(arity: int, formula: str) -> EqRelation:
    """Compile a quantifier-free formula over =, != (also ≠), & (∧), | (∨),
    ! (¬), parentheses and variables x0..x{arity-1} into its kernel set."""
    f = _parse_formula(formula, arity)
    return EqRelation(arity, {k for k in set_partitions(arity) if f(k)})


# -- basic tests ------------------------------------------------------------


def eq_membership(rel: EqRelation, t: Sequence) -> bool:
    if len(t) != rel.arity:
        raise ArityMismatch(f"tuple of length {len(t)} for a relation of arity {rel.arity}")
    return kernel(t) in rel.kernels


def eq_is_0valid(rel: EqRelation | Language) -> bool:
    """A relation is 0-valid iff it contains a constant tuple; a language iff
    all its relations are."""
    if isinstance(rel, EqRelation):
        return rel.is_0valid
    return all(r.is_0valid for r in _relations(rel))


def eq_is_horn(rel: EqRelation | Language) -> bool:
    """Closure under the injective pairing (a, b) -> a*N + b, applied to every
    ordered pair of representative tuples (one per kernel)."""
    if not isinstance(rel, EqRelation):
        return all(eq_is_horn(r) for r in _relations(rel))
    n = rel.arity  # representatives are the kernels themselves, entries < arity
    for a in rel.kernels:
        for b in rel.kernels:
            if kernel(x * n + y for x, y in zip(a, b)) not in rel.kernels:
                return False
    return True


def eq_slice(rel: EqRelation, c: int) -> Relation:
    return rel.slice(c)


def _slice_structure(rels: Sequence[EqRelation], c: int) -> Structure:
    return Structure(c, {f"R{i}": r.slice(c) for i, r in enumerate(rels)})


def _trivial(r: Relation, c: int) -> bool:
    return not r.tuples or r.is_full(c)


def eq_compute_c(lang: Language) -> int | float:
    """Least c >= 2 such that CSP of the language with constants 0..c-1 is NP-hard.

    Horn languages give infinity. Otherwise the language must be 0-valid:
    c = 2 unless the 2-slice is closed under the Boolean minority; else the
    least c >= 3 with a non-trivial c-slice, scanning up to the largest
    arity (infinity if none).
    """
    rels = _relations(lang)
    if eq_is_horn(rels):
        return INF
    if not eq_is_0valid(rels):
        raise PreconditionError("language is neither Horn nor 0-valid")
    if not closed_under(_slice_structure(rels, 2), MINORITY):
        return 2
    top = max(r.arity for r in rels)
    for c in range(3, top + 1):
        if any(not _trivial(r.slice(c), c) for r in rels):
            return c
    return INF


# -- orbits -------------------------------------------------------------------


def orbit_definition(k: tuple[int, ...]) -> PpDefinition:
    """Conjunction of = and ≠ atoms defining the orbit with kernel k.

    Positions in a block are chained by '='; each block is represented by its
    last position and the representatives are pairwise '≠' in block order.
    """
    blocks = blocks_of(k)
    atoms = []
    for b in blocks:
        atoms += [Atom(EQ_SYMBOL, (b[i], b[i + 1]), "eq") for i in range(len(b) - 1)]
    reps = [b[-1] for b in blocks]
    atoms += [Atom(NEQ_SYMBOL, (p, q), "base") for p, q in itertools.combinations(reps, 2)]
    return PpDefinition(len(k), 0, tuple(atoms))


def orbit_decompose(rel: EqRelation) -> list[PpDefinition]:
    """One orbit formula per kernel (sorted); their disjunction defines rel."""
    return [orbit_definition(k) for k in sorted(rel.kernels)]


def neq_structure(d: int) -> Structure:
    """Ground {≠} over {0..d-1}, the language orbit formulas are written in."""
    return Structure(d, {NEQ_SYMBOL: NEQ.slice(d)})


# -- solving ------------------------------------------------------------------


def _refuse_pins(inst: EqInstance):
    if inst.pins:
        raise PreconditionError("unit assignments are not supported here; ground them first")


def eq_solve_horn_fpt(
    inst: EqInstance,
    solver: Callable = solve_bruteforce,
    check: bool = True,
) -> SolveResult:
    """Branch every alien constraint over the orbits of its relation and solve
    each leaf exactly after grounding. At most prod(#kernels) leaves."""
    if check and not eq_is_horn(inst.base):
        raise PreconditionError("base language is not Horn")
    base = dict(inst.base)
    slots = [i for i, c in enumerate(inst.constraints) if c.alien]
    options = []
    for i in slots:
        c = inst.constraints[i]
        names = []
        for j, k in enumerate(sorted(inst.alien[c.rel].kernels)):
            name = f"{c.rel}#{j}"
            base[name] = EqRelation(len(k), {k})
            names.append(name)
        options.append(names)
    leaves = 0
    for pick in itertools.product(*options):
        leaves += 1
        cons = list(inst.constraints)
        for i, name in zip(slots, pick):
            cons[i] = Constraint(name, cons[i].args, False)
        leaf = EqInstance(inst.variables, tuple(cons), base, {}, inst.pins)
        res = solver(ground_equality(leaf))
        if res.satisfiable:
            return SolveResult(True, res.witness, "eq-horn-fpt", {"leaves": leaves})
    return SolveResult(False, None, "eq-horn-fpt", {"leaves": leaves})


def eq_solve_alien(
    inst: EqInstance,
    c: int,
    assume_neq_free: bool = False,
    solver: Callable = solve_bruteforce,
) -> SolveResult:
    """Solve assuming NEQ_c has no pp-definition with #ac alien atoms.

    Under that assumption a satisfiable instance has a solution with at most
    c-1 values, so it suffices to try every assignment of the alien-scope
    variables into {0..c-2} that satisfies the alien constraints, and solve
    the rest on the (c-1)-slice with those variables pinned. The assumption
    cannot be checked here, so the caller must set ``assume_neq_free``.
    """
    if not assume_neq_free:
        raise PreconditionError(
            "refusing to run: pass assume_neq_free=True once NEQ_c is known not to be definable"
        )
    if not isinstance(c, int) or c < 2:
        raise PreconditionError("c must be an integer >= 2")
    _refuse_pins(inst)
    if not eq_is_0valid(inst.base):
        raise PreconditionError("base language is not 0-valid")
    alien = [con for con in inst.constraints if con.alien]
    xs = list(dict.fromkeys(v for con in alien for v in con.args))
    rest = tuple(con for con in inst.constraints if not con.alien)
    branches = 0
    for values in itertools.product(range(c - 1), repeat=len(xs)):
        alpha = dict(zip(xs, values))
        if not all(kernel(alpha[v] for v in con.args) in inst.alien[con.rel].kernels for con in alien):
            continue
        branches += 1
        leaf = EqInstance(inst.variables, rest, inst.base, {}, alpha)
        res = solver(ground_equality(leaf, domain_size=c - 1))
        if res.satisfiable:
            return SolveResult(True, res.witness, "eq-bounded-range", {"branches": branches})
    return SolveResult(False, None, "eq-bounded-range", {"branches": branches})


# -- NEQ witness search -------------------------------------------------------


class WitnessStatus(str, enum.Enum):
    FOUND = "FOUND"
    UNKNOWN = "UNKNOWN"


@dataclass(frozen=True)
class WitnessResult:
    status: WitnessStatus
    definition: PpDefinition | None = None
    c_prime: int | None = None
    instance: tuple[Constraint, ...] | None = None
    examined: int = 0
    exhausted: bool = False

    @property
    def found(self) -> bool:
        return self.status is WitnessStatus.FOUND

    def to_json(self) -> dict:
        out: dict = {"status": self.status.value, "examined": self.examined}
        if not self.found:
            out["exhausted"] = self.exhausted
        else:
            out["c_prime"] = self.c_prime
            out["definition"] = self.definition.format()
            out["atoms"] = [
                {"rel": a.rel, "args": list(a.args), "source": a.source} for a in self.definition.atoms
            ]
        return out


def _min_range(n: int, checks) -> tuple[int, tuple[int, ...]] | None:
    """Fewest values any solution uses, with the first such solution as an RGS."""
    best = None
    for rgs in set_partitions(n):
        blocks = max(rgs) + 1 if rgs else 0
        if best is not None and blocks >= best[0]:
            continue
        if all(kernel(rgs[i] for i in args) in ks for args, ks in checks):
            best = (blocks, rgs)
    return best


def _ground_language(base: Mapping[str, EqRelation], alien: Mapping[str, EqRelation], d: int):
    b = {name: r.slice(d) for name, r in base.items()}
    a = {name: r.slice(d) for name, r in alien.items()}
    return Structure(d, b), Structure(d, a)


def verify_neq_definition(
    defn: PpDefinition,
    base: Mapping[str, EqRelation],
    alien: Mapping[str, EqRelation],
    up_to: int | None = None,
) -> bool:
    """Grounded check that defn defines NEQ_arity over {0..n-1} for every
    n from 1 to ``up_to`` (default arity + 2)."""
    c = defn.arity
    up_to = c + 2 if up_to is None else up_to
    for n in range(1, up_to + 1):
        sb, sa = _ground_language(base, alien, n)
        if defn.evaluate(sb, sa) != neq_relation(c).slice(n):
            return False
    return True


def project_neq(defn: PpDefinition, c: int) -> PpDefinition:
    """From a definition of NEQ_{c'} get NEQ_c (c <= c') by quantifying the
    trailing head variables."""
    if c > defn.arity:
        raise PreconditionError("can only project to a smaller arity")
    return PpDefinition(c, defn.n_exist + defn.arity - c, defn.atoms)


def neq_witness_search(
    base: Mapping[str, EqRelation],
    alien: Mapping[str, EqRelation],
    k: int,
    c: int,
    n_max: int | None = None,
    m_max: int | None = None,
    budget: int = 200_000,
) -> WitnessResult:
    """Look for a satisfiable instance with at most k alien constraints whose
    solutions all take at least c values; fold it into a pp-definition of
    NEQ_{c'} (c' >= c) by a minimum-range solution.

    Instances have c..n_max variables and 1..m_max constraints. UNKNOWN means
    nothing was found within the bounds (``exhausted``) or the budget ran out.
    """
    n_max = c + 1 if n_max is None else n_max
    m_max = max(1, k) + 1 if m_max is None else m_max
    langs = [(name, r, False) for name, r in base.items()] + [(name, r, True) for name, r in alien.items()]
    examined = 0
    for n in range(max(c, 1), n_max + 1):
        atoms = [
            (name, args, is_alien)
            for name, r, is_alien in langs
            for args in itertools.product(range(n), repeat=r.arity)
        ]
        for m in range(1, m_max + 1):
            for combo in itertools.combinations_with_replacement(range(len(atoms)), m):
                chosen = [atoms[i] for i in combo]
                if sum(1 for a in chosen if a[2]) > k:
                    continue
                examined += 1
                if examined > budget:
                    return WitnessResult(WitnessStatus.UNKNOWN, examined=examined - 1, exhausted=False)
                checks = [(args, (alien if al else base)[name].kernels) for name, args, al in chosen]
                best = _min_range(n, checks)
                if best is None or best[0] < c:
                    continue
                c_prime, rgs = best
                folded = tuple(
                    Atom(name, tuple(rgs[i] for i in args), "alien" if al else "base") for name, args, al in chosen
                )
                defn = PpDefinition(c_prime, 0, folded)
                if verify_neq_definition(defn, base, alien):
                    inst = tuple(Constraint(name, tuple(f"v{i}" for i in args), al) for name, args, al in chosen)
                    return WitnessResult(WitnessStatus.FOUND, defn, c_prime, inst, examined)
    return WitnessResult(WitnessStatus.UNKNOWN, examined=examined, exhausted=True)


# -- classification -------------------------------------------------------------


class EqVerdictKind(str, enum.Enum):
    FPT_HORN = "FPT_HORN"
    PNPH = "PNPH"
    TOTAL_P = "TOTAL_P"
    BASE_HARD = "BASE_HARD"


@dataclass(frozen=True)
class EqVerdict:
    kind: EqVerdictKind
    c: int | float | None = None
    per_k: Mapping[int, str] = field(default_factory=dict)
    witnesses: Mapping[int, WitnessResult] = field(default_factory=dict)

    def to_json(self) -> dict:
        out: dict = {"verdict": self.kind.value}
        if self.kind is EqVerdictKind.PNPH:
            out["c"] = self.c if self.c != INF else "inf"
            out["per_k"] = {str(k): v for k, v in sorted(self.per_k.items())}
        return out


def classify_equality(
    base: Mapping[str, EqRelation],
    alien: Mapping[str, EqRelation],
    n_max: int | None = None,
    m_max: int | None = None,
    budget: int = 200_000,
) -> EqVerdict:
    """Classify Alien(base, alien) for equality languages.

    TOTAL_P when the union is Horn or 0-valid, BASE_HARD when the base is
    neither, FPT_HORN when the base is Horn. Otherwise PNPH with the
    threshold c and a status for each k = 0..C(c, 2): P at k = 0 and
    whenever k * (max alien arity) <= c - 1 (too few alien positions to
    force c distinct values past a retraction to c - 1 values), NPH once a
    NEQ_c witness with k alien atoms is found, UNKNOWN otherwise.
    """
    union = list(base.values()) + list(alien.values())
    if eq_is_horn(union) or eq_is_0valid(union):
        return EqVerdict(EqVerdictKind.TOTAL_P)
    horn, zero = eq_is_horn(base), eq_is_0valid(base)
    if not horn and not zero:
        return EqVerdict(EqVerdictKind.BASE_HARD)
    if horn:
        return EqVerdict(EqVerdictKind.FPT_HORN)
    c = eq_compute_c(base)
    if c == INF:
        return EqVerdict(EqVerdictKind.PNPH, c, {})
    r = max(rel.arity for rel in alien.values())
    per_k: dict[int, str] = {}
    witnesses: dict[int, WitnessResult] = {}
    hard = False
    for k in range(0, math.comb(c, 2) + 1):
        if k == 0 or k * r <= c - 1:
            per_k[k] = "P"
            continue
        if not hard:
            res = neq_witness_search(base, alien, k, c, n_max, m_max, budget)
            if res.found:
                hard = True
                witnesses[k] = res
        per_k[k] = "NPH" if hard else "UNKNOWN"
    return EqVerdict(EqVerdictKind.PNPH, c, per_k, witnesses)
