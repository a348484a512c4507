"""Redundancy, implication and equivalence decided through one alien constraint.

Run: python3 demos/redundancy.py
"""

from aliencsp import Constraint, Instance, Relation, Structure, impl_via_redundant, is_redundant, redundant_to_alien

LEQ = Relation(2, {(0, 0), (0, 1), (1, 1)})
base = Structure(2, {"leq": LEQ})

# x <= y, y <= z, x <= z: the last constraint follows from the first two
chain = Instance(
    ("x", "y", "z"),
    (Constraint("leq", ("x", "y")), Constraint("leq", ("y", "z")), Constraint("leq", ("x", "z"))),
    base,
)
for i, c in enumerate(chain.constraints):
    print(f"constraint {i} {c.rel}{c.args}: redundant={is_redundant(chain, i)}")

probe = redundant_to_alien(chain, 2)
print("alien instance for constraint 2:", [(c.rel, c.args, c.alien) for c in probe.constraints])

shorter = chain.replace(constraints=chain.constraints[:1])
print("chain implies its first constraint:", impl_via_redundant(chain, shorter))
print("first constraint implies the chain:", impl_via_redundant(shorter, chain))
