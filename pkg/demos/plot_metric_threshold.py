"""
Injectivity threshold on separated point sets
=============================================

Sample 20-point sets in the Heisenberg unit ball whose approximate
difference images stay mu-separated, then sweep eps and record where the
injection is exact.  Overstating mu is caught rather than silently accepted.
"""

from geomruzsa.dilations import HeisenbergSpace
from geomruzsa.metric_ruzsa import (
    SeparationHypothesisError,
    estimate_threshold,
    metric_injection,
    sample_ruzsa_configuration,
    separation,
)

H = HeisenbergSpace()
e = H.base_point
grid = [2.0 ** -k for k in range(1, 9)]
mu = 0.1

cfg = sample_ruzsa_configuration(H, mu, (20, 20, 20), seed=42, eps_grid=grid)
A, B, C = cfg.A.points, cfg.B.points, cfg.C.points
print("separations:", [round(separation(H, P), 3) for P in (A, B, C)])

rep = estimate_threshold(H, e, A, B, C, mu, grid)
for eps, hyp, inj in rep.rows:
    print(f"  eps={eps:<10g} hypothesis={hyp!s:<5}  injective={inj}")
print("empirical threshold:", rep.empirical_threshold)

w = metric_injection(H, e, grid[-1], A, B, C, mu)
print(f"|D(C,A)|*|B| = {w.source_size}, injective={w.is_injective}")

try:
    metric_injection(H, e, grid[-1], A, B, C, 2 * separation(H, B))
except SeparationHypothesisError as err:
    print("overstated mu:", err)
