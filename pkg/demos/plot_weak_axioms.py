"""
Relabeled group differences
===========================

Composing a^-1 b with a permutation sigma of the group keeps the weak
axioms (a recovery map F and an injective G exist) while the strong identity
usually breaks.  The injection still works.
"""

from geomruzsa import check_axiom1, check_weak_axioms, ruzsa_inequality
from geomruzsa.groups import random_permutation, relabeled_delta, symmetric

G = symmetric(3)
print(f"{'seed':>4}  {'axiom1':>6}  {'weak':>5}  first bad triple")
for seed in range(6):
    R = relabeled_delta(G, random_permutation(G.order, seed))
    a1 = check_axiom1(R, "exhaustive")
    weak = check_weak_axioms(R, "exhaustive")
    print(f"{seed:>4}  {str(a1.ok):>6}  {str(weak.ok):>5}  {a1.counterexample}")

R = relabeled_delta(G, random_permutation(G.order, 1))
r = ruzsa_inequality(R, [0, 1, 2], [3, 4], [0, 5])
print("relabeled Ruzsa:", r.lhs, "<=", r.rhs, "injective:", r.witness.is_injective)
