import itertools
import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from aliencsp.alien import (
    UnionDecomposition,
    VerdictKind,
    classify_boolean,
    decompose_alien,
    solve_alien_auto,
    solve_alien_fpt,
    solve_constant_k1,
)
from aliencsp.errors import PreconditionError
from aliencsp.structures import Constraint, Instance, Relation, Structure, evaluate
from helpers import all_tuples, plain_sat, rand_instance, rand_relation, rand_small_relation, rand_structure

NEQ2 = Relation(2, {(0, 1), (1, 0)})
IMP = Relation(2, {(0, 0), (0, 1), (1, 1)})
C0 = Relation(1, {(0,)})
C1 = Relation(1, {(1,)})
R_XYZ = Relation(3, {t for t in all_tuples(2, 3) if t[0] == t[1] or t[1] == t[2]})
HORN = Structure(2, {"imp": IMP, "c_0": C0, "c_1": C1})


def _inst(variables, cons, base, alien=None):
    return Instance(
        tuple(variables),
        tuple(Constraint(r, tuple(a), bool(al)) for r, a, al in cons),
        base,
        alien,
    )


def test_singleton_decomposition():
    dec = decompose_alien(Structure(2, {"ne": NEQ2}))
    assert dec.parts["ne"] == (Relation(2, {(0, 1)}), Relation(2, {(1, 0)}))
    assert dec.b == 2
    assert decompose_alien(Structure(2)).b == 1
    assert UnionDecomposition.part_name("ne", 1) == "ne#1"


def test_custom_decomposition_must_union_to_the_relation():
    alien = Structure(2, {"ne": NEQ2})
    assert decompose_alien(alien, {"ne": [NEQ2]}).b == 1
    with pytest.raises(PreconditionError):
        decompose_alien(alien, {"ne": [Relation(2, {(0, 1)})]})
    with pytest.raises(PreconditionError):
        decompose_alien(alien, {"other": [NEQ2]})
    with pytest.raises(PreconditionError):
        decompose_alien(alien, {"ne": [Relation(1, {(0,)})]})


def test_fpt_examples():
    alien = Structure(2, {"ne": NEQ2})
    inst = _inst("xy", [("imp", "xy", 0), ("ne", "xy", 1)], HORN, alien)
    res = solve_alien_fpt(inst)
    assert res.witness == {"x": 0, "y": 1}
    assert res.stats["leaves"] <= 2
    both = _inst("xy", [("imp", "xy", 0), ("imp", "yx", 0), ("ne", "xy", 1)], HORN, alien)
    res = solve_alien_fpt(both)
    assert not res and res.stats["leaves"] == 2


def test_fpt_with_no_alien_constraints_is_one_call():
    inst = _inst("xy", [("imp", "xy", 0), ("c_1", "x", 0)], HORN)
    calls = []

    def counting(leaf):
        calls.append(leaf)
        from aliencsp.solvers import solve_bruteforce

        return solve_bruteforce(leaf)

    assert solve_alien_fpt(inst, base_solver=counting).witness == {"x": 1, "y": 1}
    assert len(calls) == 1


@given(st.integers(0, 10**6))
def test_fpt_matches_enumeration_and_bounds_leaves(seed):
    rng = random.Random(seed)
    base = rand_structure(rng, 2, ["r", "s"], arities=(1, 2))
    alien = Structure(2, {"a": rand_small_relation(rng, 2, 2, 3), "b": rand_small_relation(rng, 2, 1, 2)})
    k = rng.randint(0, 3)
    inst = rand_instance(rng, base, alien, rng.randint(1, 5), rng.randint(k, k + 4), k)
    res = solve_alien_fpt(inst)
    assert res.satisfiable == plain_sat(inst)
    assert res.stats["leaves"] <= res.stats["b"] ** inst.k
    if res:
        assert evaluate(inst, res.witness)


def test_auto_strategies():
    alien = Structure(2, {"ne": NEQ2, "r": R_XYZ})
    horn = _inst("xy", [("imp", "xy", 0), ("r", "xyx", 1), ("c_1", "y", 0), ("ne", "xy", 1)], HORN, alien)
    res = solve_alien_auto(horn)
    assert res.strategy.startswith("fpt") and res.satisfiable == plain_sat(horn)
    one_in_three = Relation(3, {(0, 0, 1), (0, 1, 0), (1, 0, 0)})
    hard = _inst("xyz", [("t", "xyz", 0)], Structure(2, {"t": one_in_three}))
    assert solve_alien_auto(hard).strategy == "bruteforce"
    direct = _inst("xy", [("imp", "xy", 0)], HORN)
    assert solve_alien_auto(direct).strategy.startswith("schaefer")


def test_constant_strategy():
    base = Structure(2, {"R": R_XYZ})
    alien = Structure(2, {"c": Relation(2, {(1, 1), (0, 1)})})
    inst = _inst("xyz", [("R", "xyz", 0), ("c", "xz", 1)], base, alien)
    res = solve_constant_k1(inst)
    assert res.witness == {"x": 1, "y": 1, "z": 1} and evaluate(inst, res.witness)
    # the union is then 1-valid already, so the dispatcher takes the direct route
    assert solve_alien_auto(inst).strategy == "schaefer:one_valid"
    two = _inst("xyz", [("c", "xy", 1), ("c", "yz", 1)], base, alien)
    with pytest.raises(PreconditionError):
        solve_constant_k1(two)


@given(st.integers(0, 10**6))
def test_auto_matches_enumeration(seed):
    rng = random.Random(seed)
    base = rand_structure(rng, 2, ["r", "s"], arities=(1, 2, 3))
    alien = rand_structure(rng, 2, ["a"], arities=(1, 2))
    k = rng.randint(0, 2)
    inst = rand_instance(rng, base, alien, rng.randint(1, 6), rng.randint(k, k + 5), k)
    res = solve_alien_auto(inst)
    assert res.satisfiable == plain_sat(inst)
    if res:
        assert evaluate(inst, res.witness)


# -- classification ---------------------------------------------------------------------


def test_classify_examples():
    v = classify_boolean(Structure(2, {"R": R_XYZ}), Structure(2, {"ne": NEQ2}))
    assert v.kind is VerdictKind.NPH_AT_1
    assert "zero_one_pair" in v.evidence
    v = classify_boolean(HORN, Structure(2, {"R": R_XYZ}))
    assert v.kind is VerdictKind.FPT
    v = classify_boolean(Structure(2, {"imp": IMP}), Structure(2, {"c_0": C0}))
    assert v.kind is VerdictKind.TOTAL_P
    one_in_three = Relation(3, {(0, 0, 1), (0, 1, 0), (1, 0, 0)})
    v = classify_boolean(Structure(2, {"t": one_in_three}), Structure(2))
    assert v.kind is VerdictKind.BASE_HARD
    v = classify_boolean(Structure(2, {"R": R_XYZ}), Structure(2, {"c_0": C0, "c_1": C1}))
    assert v.kind is VerdictKind.NPH_AT_2_P_AT_1
    assert v.evidence["zero_one_pair"] == ["c_0", "c_1"]
    doc = v.to_json()
    assert doc["verdict"] == "NPH_AT_2_P_AT_1" and set(doc["base_flags"]) == set(doc["union_flags"])
    with pytest.raises(PreconditionError):
        classify_boolean(Structure(3), Structure(3))


def test_classification_is_total_on_small_languages():
    rels = [Relation(a, {t for i, t in enumerate(all_tuples(2, a)) if m >> i & 1}) for a in (1, 2) for m in range(1 << 2**a)]
    rng = random.Random(5)
    pairs = list(itertools.product(range(len(rels)), repeat=2))
    for i, j in rng.sample(pairs, 120) + [(0, 0)]:
        v = classify_boolean(Structure(2, {"a": rels[i]}), Structure(2, {"b": rels[j]}))
        assert isinstance(v.kind, VerdictKind)
        # arity <= 2 Boolean relations are all bijunctive
        assert v.kind is VerdictKind.TOTAL_P


@given(st.integers(0, 10**6))
def test_fpt_verdicts_are_solved_by_auto(seed):
    rng = random.Random(seed)
    base = HORN.with_relations({"r": rand_relation(rng, 2, rng.randint(1, 2))})
    if not classify_boolean(base, Structure(2)).base_flags.horn:
        return
    alien = Structure(2, {"R": R_XYZ})
    assert classify_boolean(base, alien).kind is VerdictKind.FPT
    inst = rand_instance(rng, base, alien, rng.randint(1, 5), rng.randint(2, 6), rng.randint(1, 2))
    res = solve_alien_auto(inst)
    # only the relations used by the instance decide the route
    assert res.strategy.startswith(("fpt", "schaefer")) and res.satisfiable == plain_sat(inst)
