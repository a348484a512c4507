"""Random fixture generators and plain-enumeration oracles for the tests.

The oracles here deliberately avoid the package's solvers: they walk all
d^n assignments with itertools.product.
"""

from __future__ import annotations

import itertools
import random

from aliencsp.algebra import OperationTable
from aliencsp.structures import Constraint, EqInstance, EqRelation, Instance, Relation, Structure, set_partitions


def all_tuples(d: int, arity: int):
    return list(itertools.product(range(d), repeat=arity))


def plain_solutions(inst: Instance) -> set[tuple[int, ...]]:
    """Sol(I) by full enumeration."""
    rels = [(inst.relation(c).tuples, [inst.variables.index(v) for v in c.args]) for c in inst.constraints]
    out = set()
    for values in itertools.product(range(inst.domain_size), repeat=len(inst.variables)):
        if all(tuple(values[i] for i in idx) in tuples for tuples, idx in rels):
            out.add(values)
    return out


def plain_sat(inst: Instance) -> bool:
    return bool(plain_solutions(inst))


def eq_plain_sat(inst: EqInstance) -> bool:
    """Satisfiability over the naturals.

    Without pins only the equality pattern of an assignment matters, so trying
    one assignment per set partition of the variables is exhaustive. With pins
    every value below (number of variables + largest pin + 1) is tried.
    """
    n = len(inst.variables)
    if not inst.pins:
        candidates = set_partitions(n)
    else:
        candidates = itertools.product(range(n + max(inst.pins.values()) + 1), repeat=n)
    return any(inst.satisfied_by(dict(zip(inst.variables, values))) for values in candidates)


def rand_relation(rng: random.Random, d: int, arity: int, density: float | None = None) -> Relation:
    density = rng.random() if density is None else density
    return Relation(arity, {t for t in all_tuples(d, arity) if rng.random() < density})


def rand_small_relation(rng: random.Random, d: int, arity: int, most: int) -> Relation:
    """At most `most` tuples, so a singleton decomposition branches at most `most` ways."""
    pool = all_tuples(d, arity)
    return Relation(arity, rng.sample(pool, rng.randint(0, min(most, len(pool)))))


def rand_structure(rng, d, names, arities=(1, 2, 3), density=None) -> Structure:
    return Structure(d, {n: rand_relation(rng, d, rng.choice(arities), density) for n in names})


def rand_instance(
    rng: random.Random,
    base: Structure,
    alien: Structure | None = None,
    n_vars: int = 5,
    n_cons: int = 6,
    k: int = 0,
) -> Instance:
    alien = alien if alien is not None else Structure(base.domain_size)
    variables = tuple(f"v{i}" for i in range(n_vars))
    cons = []
    base_names = list(base.relations)
    for _ in range(n_cons - k if base_names else 0):
        name = rng.choice(base_names)
        cons.append(Constraint(name, tuple(rng.choice(variables) for _ in range(base[name].arity)), False))
    alien_names = list(alien.relations)
    for _ in range(k if alien_names else 0):
        name = rng.choice(alien_names)
        pos = rng.randint(0, len(cons))
        cons.insert(pos, Constraint(name, tuple(rng.choice(variables) for _ in range(alien[name].arity)), True))
    return Instance(variables, tuple(cons), base, alien)


def close_under(r: Relation, f: OperationTable) -> Relation:
    """Smallest relation containing r and closed under f."""
    tuples = set(r.tuples)
    while True:
        rows = sorted(tuples)
        new = {f.apply_rows(pick) for pick in itertools.product(rows, repeat=f.arity)} - tuples
        if not new:
            return Relation(r.arity, tuples)
        tuples |= new


def rand_eq_relation(rng: random.Random, arity: int, density: float | None = None) -> EqRelation:
    density = rng.random() if density is None else density
    return EqRelation(arity, {k for k in set_partitions(arity) if rng.random() < density})


def rand_eq_instance(rng, base, alien, n_vars, n_cons, k, pins=None) -> EqInstance:
    variables = tuple(f"v{i}" for i in range(n_vars))
    cons = []
    for _ in range(n_cons - k):
        name = rng.choice(list(base))
        cons.append((name, tuple(rng.choice(variables) for _ in range(base[name].arity)), False))
    for _ in range(k):
        name = rng.choice(list(alien))
        cons.insert(rng.randint(0, len(cons)), (name, tuple(rng.choice(variables) for _ in range(alien[name].arity)), True))
    return EqInstance(variables, cons, base, alien, pins or {})


def eq_formula_relation(arity: int, pred) -> EqRelation:
    """EqRelation from a Python predicate on tuples, via one representative per kernel."""
    return EqRelation(arity, {k for k in set_partitions(arity) if pred(k)})


def not_all_distinct(arity: int) -> EqRelation:
    return eq_formula_relation(arity, lambda t: len(set(t)) < arity)
