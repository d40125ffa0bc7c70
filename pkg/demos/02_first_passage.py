"""First-passage time from 0̂ to 1̂ on Q_n and the shape of the geodesic.

Weights are a pure function of (seed, edge index): the same seed gives the
same cube whether weights are stored or recomputed on demand.
"""

import numpy as np

from cubefpp import fpp
from cubefpp.analytic import THETA
from cubefpp.rng import derive_seed

model = fpp.WeightModel(seed=2024, n=12)
r = fpp.first_passage(model, want_covering=True)
print(f"T_12 = {r.t_first:.5f}  (theta = {THETA:.5f})")
print(f"geodesic length {r.geodesic_length}, backsteps {r.backsteps}, covering time {r.covering_time:.4f}")
print("steps per direction:", r.per_direction_steps)

lazy = fpp.WeightModel(seed=2024, n=12, scheme="derived")
assert fpp.first_passage(lazy).t_first == r.t_first

# small cubes can be checked against enumeration of all simple paths
m3 = fpp.WeightModel(seed=5, n=3)
print("n=3 Dijkstra vs enumeration:", fpp.first_passage(m3).t_first, fpp.brute_force_oracle(m3))

# T_n concentrates around theta as n grows
for n in (4, 8, 12):
    t = [fpp.first_passage(fpp.WeightModel(derive_seed(1, i), n), want_geodesic=False).t_first
         for i in range(300)]
    print(f"n={n:2d}: mean T_n = {np.mean(t):.4f}, sd = {np.std(t):.4f}")
