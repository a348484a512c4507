"""Equality languages: the threshold c, orbit formulas and the per-k table.

Run: python3 demos/equality_threshold.py
"""

from aliencsp import NEQ, classify_equality, eq_compute_c, eq_from_formula, neq_witness_search, orbit_decompose

R = eq_from_formula(3, "x0 = x1 | x1 = x2")
NAD3 = eq_from_formula(3, "!(x0 != x1 & x1 != x2 & x0 != x2)")

print("orbits of R:")
for d in orbit_decompose(R):
    print("   ", d.format())

for name, rel in (("R", R), ("not-all-distinct", NAD3)):
    c = eq_compute_c([rel])
    verdict = classify_equality({"base": rel}, {"ne": NEQ})
    print(f"{name}: c = {c}, verdict {verdict.kind.value}, per k {dict(verdict.per_k)}")

res = neq_witness_search({"nad": NAD3}, {"ne": NEQ}, 3, 3)
print("NEQ_3 from three alien ≠ atoms:", res.status.value, "|", res.definition.format())
