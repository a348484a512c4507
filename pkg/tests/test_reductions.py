import itertools
import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from aliencsp.algebra import FLIP, closed_under, compute_core, ppdef_check
from aliencsp.errors import NameClash, PreconditionError, UnknownSymbol
from aliencsp.reductions import (
    Atom,
    PpDefinition,
    alien_bound,
    constants_to_E_gadget,
    core_lift,
    core_reduce,
    define_c1_via_nonvalid,
    endomorphism_relation,
    equiv_via_impl,
    impl_via_redundant,
    inline_ppdefs,
    is_redundant,
    merge_constants,
    neq_expansion_gadget,
    neq_gadget_reduce,
    redundant_to_alien,
    redundant_via_equiv,
)
from aliencsp.structures import NEQ, Constraint, EqInstance, Instance, Relation, Structure, constants_structure
from helpers import all_tuples, eq_plain_sat, plain_sat, plain_solutions, rand_instance, rand_relation, rand_structure

NEQ2 = Relation(2, {(0, 1), (1, 0)})
IMP = Relation(2, {(0, 0), (0, 1), (1, 1)})
C0 = Relation(1, {(0,)})
C1 = Relation(1, {(1,)})


def _inst(variables, cons, base, alien=None):
    return Instance(
        tuple(variables),
        tuple(Constraint(r, tuple(a), bool(al)) for r, a, al in cons),
        base,
        alien,
    )


def _projected(inst, keep):
    idx = [inst.variables.index(v) for v in keep]
    return {tuple(s[i] for i in idx) for s in plain_solutions(inst)}


# -- inlining ---------------------------------------------------------------------


def test_inline_one_existential():
    # S(x, z) := ∃y: R(x, y) ∧ R(y, z)
    base = Structure(2, {"R": IMP, "S": Relation(2, {(0, 0), (0, 1), (1, 1)})})
    inst = _inst("xz", [("S", "xz", 0)], base)
    defs = {"S": PpDefinition(2, 1, (Atom("R", (0, 2)), Atom("R", (2, 1))))}
    out = inline_ppdefs(inst, defs)
    assert len(out.variables) == 3 and len(out.constraints) == 2
    assert all(c.rel == "R" for c in out.constraints)
    assert "S" not in out.base
    assert _projected(out, "xz") == _projected(inst, "xz")


def test_inline_without_definitions_is_identity():
    inst = _inst("xy", [("ne", "xy", 0)], Structure(2, {"ne": NEQ2}))
    assert inline_ppdefs(inst, {}) == inst


def test_inline_rejects_alien_atoms_under_base_symbols():
    base = Structure(2, {"S": NEQ2})
    alien = Structure(2, {"ne": NEQ2})
    inst = _inst("xy", [("S", "xy", 0)], base, alien)
    with pytest.raises(PreconditionError):
        inline_ppdefs(inst, {"S": PpDefinition(2, 0, (Atom("ne", (0, 1), "alien"),))})


@given(st.integers(0, 10**6))
def test_inline_preserves_solutions_on_original_variables(seed):
    rng = random.Random(seed)
    base = rand_structure(rng, 2, ["p", "q"], arities=(1, 2))
    alien = Structure(2, {"a": rand_relation(rng, 2, 2)})
    defs = {}
    for name in ("S", "T"):
        atoms = []
        for _ in range(rng.randint(1, 3)):
            sym = rng.choice(["p", "q", "a"])
            r = alien[sym] if sym == "a" else base[sym]
            atoms.append(Atom(sym, tuple(rng.randrange(3) for _ in range(r.arity)), "alien" if sym == "a" else "base"))
        defs[name] = PpDefinition(2, 1, tuple(atoms))
    full_base = base.with_relations({"S": defs["S"].evaluate(base, alien)}) if not defs["S"].alien_count else base
    full_alien = alien.with_relations({"T": defs["T"].evaluate(base, alien)})
    if "S" not in full_base:
        defs.pop("S")
    inst = rand_instance(rng, full_base, full_alien, rng.randint(2, 4), rng.randint(1, 5), rng.randint(0, 2))
    out = inline_ppdefs(inst, defs, base, alien)
    assert out.k <= alien_bound(defs, inst.k)
    assert _projected(out, inst.variables) == plain_solutions(inst)


# -- redundancy, implication, equivalence -----------------------------------------


def test_redundant_examples():
    base = Structure(2, {"ne": NEQ2})
    dup = _inst("xy", [("ne", "xy", 0), ("ne", "xy", 0)], base)
    assert is_redundant(dup, 1)
    out = redundant_to_alien(dup, 1)
    assert out.k == 1 and out.alien["~ne"] == Relation(2, {(0, 0), (1, 1)})
    single = _inst("xy", [("ne", "xy", 0)], base)
    assert not is_redundant(single, 0)
    with pytest.raises(IndexError):
        redundant_to_alien(single, 3)


@given(st.integers(0, 10**6))
def test_redundancy_routes_agree_with_enumeration(seed):
    rng = random.Random(seed)
    base = rand_structure(rng, rng.randint(2, 3), ["r", "s"], arities=(1, 2))
    inst = rand_instance(rng, base, None, rng.randint(1, 4), rng.randint(1, 5))
    i = rng.randrange(len(inst.constraints))
    rest = inst.replace(constraints=inst.constraints[:i] + inst.constraints[i + 1 :])
    truth = plain_solutions(inst) == plain_solutions(rest)
    assert is_redundant(inst, i) == truth
    assert redundant_via_equiv(inst, i) == truth


def test_turing_drivers_examples():
    s = constants_structure(2)
    i = _inst("x", [("c_0", "x", 0)], s)
    assert equiv_via_impl(i, i)
    assert impl_via_redundant(i, _inst("x", [], s))
    assert not impl_via_redundant(_inst("x", [], s), i)
    with pytest.raises(PreconditionError):
        impl_via_redundant(i, _inst("y", [], s))


def test_implication_conflicting_symbol():
    a = _inst("xy", [("r", "xy", 0)], Structure(2, {"r": NEQ2}))
    b = _inst("xy", [("r", "xy", 0)], Structure(2, {"r": IMP}))
    with pytest.raises(NameClash):
        impl_via_redundant(a, b)


@given(st.integers(0, 10**6))
def test_implication_matches_solution_inclusion(seed):
    rng = random.Random(seed)
    base = rand_structure(rng, 2, ["r", "s"], arities=(1, 2))
    n = rng.randint(1, 4)
    i1 = rand_instance(rng, base, None, n, rng.randint(0, 4))
    i2 = rand_instance(rng, base, None, n, rng.randint(0, 4))
    s1, s2 = plain_solutions(i1), plain_solutions(i2)
    assert impl_via_redundant(i1, i2) == (s1 <= s2)
    assert equiv_via_impl(i1, i2) == (s1 == s2)


# -- constants ----------------------------------------------------------------------


def test_merge_constants_example():
    inst = _inst("xy", [("c_0", "x", 1), ("c_0", "y", 1), ("R", "xy", 0)], Structure(2, {"R": IMP}), Structure(2, {"c_0": C0}))
    out = merge_constants(inst)
    assert out.variables == ("x",)
    assert out.constraints == (Constraint("c_0", ("x",), True), Constraint("R", ("x", "x")))


def test_merge_constants_requires_constants():
    inst = _inst("xy", [("ne", "xy", 1)], Structure(2), Structure(2, {"ne": NEQ2}))
    with pytest.raises(PreconditionError):
        merge_constants(inst)


@given(st.integers(0, 10**6))
def test_merge_constants_preserves_satisfiability(seed):
    rng = random.Random(seed)
    base = rand_structure(rng, 2, ["r"], arities=(1, 2, 3))
    inst = rand_instance(rng, base, constants_structure(2), rng.randint(1, 5), rng.randint(1, 7), rng.randint(0, 4))
    out = merge_constants(inst)
    assert plain_sat(out) == plain_sat(inst)
    assert out.k <= 2


def test_define_c1_examples():
    d = define_c1_via_nonvalid(Relation(2, {(1, 1)}))
    assert d.n_exist == 0 and d.atoms == (Atom("R", (0, 0), "alien"),)
    d = define_c1_via_nonvalid(Relation(2, {(0, 1)}))
    assert d.n_exist == 1
    assert d.atoms == (Atom("c_0", (1,), "base"), Atom("R", (1, 0), "alien"))
    d = define_c1_via_nonvalid(NEQ2)
    base, alien = Structure(2, {"c_0": C0}), Structure(2, {"R": NEQ2})
    assert d.evaluate(base, alien) == C1
    for bad in [Relation(1, set()), Relation(2, {(0, 0), (1, 1)}), Relation(1, {(2,)})]:
        with pytest.raises(PreconditionError):
            define_c1_via_nonvalid(bad)


@given(st.integers(0, 10**6))
def test_define_c1_evaluates_to_the_constant(seed):
    rng = random.Random(seed)
    arity = rng.randint(1, 3)
    r = Relation(arity, {t for t in all_tuples(2, arity) if any(t) and rng.random() < 0.5} or {(1,) * arity})
    d = define_c1_via_nonvalid(r)
    assert d.evaluate(Structure(2, {"c_0": C0}), Structure(2, {"R": r})) == C1


def test_neq_gadget_example():
    inst = _inst("xy", [("c_0", "x", 1), ("c_1", "y", 1)], Structure(2), constants_structure(2))
    out = neq_gadget_reduce(inst)
    assert out.constraints == (Constraint("neq", ("x", "y"), True),)
    with pytest.raises(PreconditionError):
        neq_gadget_reduce(_inst("x", [("c_0", "x", 1)], Structure(2, {"c": C0}), constants_structure(2)))


@given(st.integers(0, 10**6))
def test_neq_gadget_preserves_satisfiability(seed):
    rng = random.Random(seed)
    rels = {}
    for name in ("r", "s"):
        r = rand_relation(rng, 2, rng.randint(1, 3), 0.3)
        rels[name] = Relation(r.arity, r.tuples | {FLIP.apply_rows([t]) for t in r.tuples})
    base = Structure(2, rels)
    assert closed_under(base, FLIP)
    inst = rand_instance(rng, base, constants_structure(2), rng.randint(1, 5), rng.randint(1, 7), rng.randint(0, 3))
    out = neq_gadget_reduce(inst)
    assert plain_sat(out) == plain_sat(inst)
    assert out.k <= 1


def test_endomorphism_relation_and_E_gadget():
    s = Structure(2, {"ne": NEQ2})
    E = endomorphism_relation(s)
    assert E == Relation(2, {(0, 1), (1, 0)})
    assert ppdef_check(E, s)
    inst = _inst("xy", [("c_0", "x", 1), ("ne", "xy", 0)], s, constants_structure(2))
    out = constants_to_E_gadget(inst)
    assert out.k == 1 and out.alien["E"] == E
    assert len(out.variables) == 3
    assert plain_sat(out)
    with pytest.raises(PreconditionError):
        constants_to_E_gadget(inst, Relation(2, {(0, 0)}))


@given(st.integers(0, 10**6))
def test_E_gadget_preserves_satisfiability_over_cores(seed):
    rng = random.Random(seed)
    d = rng.randint(2, 3)
    core, _ = compute_core(rand_structure(rng, d, ["r", "s"], arities=(1, 2)))
    if core.domain_size < 2:
        return
    d = core.domain_size
    inst = rand_instance(rng, core, constants_structure(d), rng.randint(1, 4), rng.randint(1, 5), rng.randint(0, 3))
    assert plain_sat(constants_to_E_gadget(inst)) == plain_sat(inst)


# -- the all-distinct expansion over equality languages ------------------------------


def test_neq_expansion_examples():
    neq_def = PpDefinition(2, 0, (Atom("ne", (0, 1), "alien"),))
    inst = EqInstance(("u", "v"), [], {}, {"ne": NEQ}, {"u": 0, "v": 1})
    out = neq_expansion_gadget(inst, neq_def, 2)
    assert out.k == 1 and not out.pins
    assert eq_plain_sat(out)
    same = EqInstance(("u", "v"), [("ne", ("u", "v"), True)], {}, {"ne": NEQ}, {"u": 0, "v": 0})
    assert not eq_plain_sat(neq_expansion_gadget(same, neq_def, 2))
    with pytest.raises(PreconditionError):
        neq_expansion_gadget(inst, neq_def, 2, units=[("u", 0), ("u", 1)])
    with pytest.raises(PreconditionError):
        neq_expansion_gadget(inst, neq_def, 2, units=[("u", 2)])
    with pytest.raises(UnknownSymbol):
        neq_expansion_gadget(inst, neq_def, 2, units=[("w", 0)])


@given(st.integers(0, 10**6))
def test_neq_expansion_preserves_satisfiability(seed):
    rng = random.Random(seed)
    c = rng.randint(2, 3)
    # all-distinct on c variables as pairwise ≠
    neq_def = PpDefinition(c, 0, tuple(Atom("ne", p, "alien") for p in itertools.combinations(range(c), 2)))
    variables = tuple(f"v{i}" for i in range(rng.randint(1, 4)))
    cons = [("ne", tuple(rng.sample(variables * 2, 2)), True) for _ in range(rng.randint(0, 3))]
    pins = {v: rng.randrange(c) for v in variables if rng.random() < 0.5}
    inst = EqInstance(variables, cons, {}, {"ne": NEQ}, pins)
    assert eq_plain_sat(neq_expansion_gadget(inst, neq_def, c)) == eq_plain_sat(inst)


# -- cores ----------------------------------------------------------------------------


def test_core_reduce_example():
    inst = _inst("xy", [("R", "xy", 0), ("S", "y", 1)], Structure(3, {"R": Relation(2, all_tuples(3, 2))}), Structure(3, {"S": Relation(1, {(1,), (2,)})}))
    out, e = core_reduce(inst)
    assert out.domain_size == 1 and out.k == inst.k
    assert plain_sat(out)
    assert core_lift(out, inst.base, inst.alien) == inst


@given(st.integers(0, 10**6))
def test_core_reduce_preserves_satisfiability(seed):
    rng = random.Random(seed)
    d = rng.randint(2, 3)
    base = rand_structure(rng, d, ["r"], arities=(1, 2))
    alien = rand_structure(rng, d, ["a"], arities=(1, 2))
    inst = rand_instance(rng, base, alien, rng.randint(1, 4), rng.randint(1, 5), rng.randint(0, 2))
    out, e = core_reduce(inst)
    assert plain_sat(out) == plain_sat(inst)
    assert out.k == inst.k
    assert out.domain_size == len(e.range)
