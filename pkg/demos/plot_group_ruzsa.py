"""
Difference sets and the Ruzsa injection in a finite group
==========================================================

Build the difference operation a^-1 b on a small group, look at one
explicit injection, then count how tight the inequality is on random subsets.
"""

import numpy as np

from geomruzsa import build_injection, delta_set, ruzsa_inequality
from geomruzsa.groups import cyclic, dihedral, group_delta

# Z6 with A = {0,1}, B = {0,3}, C = {0,2}
Z6 = group_delta(cyclic(6))
A, B, C = [0, 1], [0, 3], [0, 2]
print("D(C,A) =", delta_set(Z6, C, A).members)

w = build_injection(Z6, A, B, C)
for (x, b), (c, d) in sorted(w.entries.items()):
    print(f"  x={x} b={b} -> ({c}, {d})")

r = ruzsa_inequality(Z6, A, B, C)
print(f"lhs={r.lhs} rhs={r.rhs} injective={w.is_injective}")

# slack on a non-abelian group
D5 = group_delta(dihedral(5))
rng = np.random.default_rng(0)
ratios = []
for _ in range(300):
    sets = [rng.choice(10, size=rng.integers(1, 6), replace=False).tolist() for _ in range(3)]
    r = ruzsa_inequality(D5, *sets)
    ratios.append(r.lhs / r.rhs)
ratios = np.array(ratios)
print(f"dihedral:5  lhs/rhs  min={ratios.min():.3f}  median={np.median(ratios):.3f}"
      f"  max={ratios.max():.3f}  equality in {np.mean(ratios == 1):.0%}")
