"""Boolean CSP with alien constraints: classify a language pair, then solve.

Run: python3 demos/boolean_alien.py
"""

from aliencsp import Constraint, Instance, Relation, Structure, classify_boolean, solve_alien_auto, solve_alien_fpt

IMP = Relation(2, {(0, 0), (0, 1), (1, 1)})
NEQ = Relation(2, {(0, 1), (1, 0)})
R = Relation(3, {(0, 0, 0), (0, 0, 1), (0, 1, 1), (1, 0, 0), (1, 1, 0), (1, 1, 1)})

horn = Structure(2, {"imp": IMP, "c_0": Relation(1, {(0,)}), "c_1": Relation(1, {(1,)})})
alien = Structure(2, {"ne": NEQ, "R": R})

# binary Boolean relations are all bijunctive, so ≠ alone keeps Horn + ≠ easy;
# the ternary R on the alien side is what makes the parameter matter
print("Horn base, alien ≠:    ", classify_boolean(horn, Structure(2, {"ne": NEQ})).kind.value)
print("Horn base, alien ≠, R: ", classify_boolean(horn, alien).kind.value)
print("R base, alien ≠:       ", classify_boolean(Structure(2, {"R": R}), Structure(2, {"ne": NEQ})).kind.value)

# a chain of implications with two alien constraints across it
variables = tuple(f"x{i}" for i in range(6))
cons = [Constraint("imp", (variables[i], variables[i + 1])) for i in range(5)]
cons.append(Constraint("ne", ("x0", "x5"), True))
cons.append(Constraint("R", ("x5", "x0", "x2"), True))
inst = Instance(variables, tuple(cons), horn, alien)

res = solve_alien_fpt(inst)
print(f"fpt: satisfiable={res.satisfiable} leaves={res.stats['leaves']} witness={res.witness}")
res = solve_alien_auto(inst)
print(f"auto: strategy={res.strategy} witness={res.witness}")

# pin x0 to 1: x0 <= x5 then forces x5 = 1 and the alien ≠ fails
pinned = inst.replace(constraints=inst.constraints + (Constraint("c_1", ("x0",)),))
print("with x0 = 1:", solve_alien_auto(pinned).satisfiable)
