"""
How fast the approximate difference converges
==============================================

In Euclidean space the gap is exactly eps * |a - e|.  In the Heisenberg
group it shrinks only like sqrt(eps) once the horizontal parts of a and b are
not parallel, so the log-log slope sits near 1/2.
"""

import numpy as np

from geomruzsa.dilations import EuclideanSpace, HeisenbergSpace, convergence_table

grid = [2.0 ** -k for k in range(1, 21)]

E = EuclideanSpace(2)
t = convergence_table(E, [0, 0], [1, 0], [0, 1], grid)
print(f"euclid:2  slope={t.slope:.4f}  gap(2^-20)={t.gaps[-1]:.3e}")

H = HeisenbergSpace()
rng = np.random.default_rng(1)
slopes = []
for _ in range(20):
    a, b = H.sample_ball(rng, 2, 1.0)
    slopes.append(convergence_table(H, H.base_point, a, b, grid).slope)
print(f"heis1     slopes over 2^-1..2^-20: {np.min(slopes):.3f} .. {np.max(slopes):.3f}")

# parallel horizontal parts: the commutator term vanishes and the rate is linear
a, b = np.array([0.3, 0.1, 0.2]), np.array([0.6, 0.2, -0.1])
print(f"heis1 parallel pair slope={convergence_table(H, H.base_point, a, b, grid).slope:.3f}")

# fine tail of one generic pair: gap / sqrt(eps) settles to a constant
a, b = H.sample_ball(np.random.default_rng(2), 2, 1.0)
t = convergence_table(H, H.base_point, a, b, grid)
for eps, gap in t.rows[::4]:
    print(f"  eps={eps:.2e}  gap={gap:.3e}  gap/sqrt(eps)={gap / np.sqrt(eps):.4f}")
