"""Branching translation process with the alive/ghost coupling.

Alive particles reproduce Richardson's model; uncontested particles are a
subset of them.  Averages over many runs recover the analytic expectations.
"""

import numpy as np

from cubefpp import analytic, btp
from cubefpp.rng import derive_seed

run = btp.mark_alive(btp.simulate(n=4, horizon=analytic.THETA, seed=7))
print(f"{run.size} particles, {int(run.alive.sum())} alive, {int((run.c == 0).sum())} uncontested")
print("coupling violations:", btp.coupling_violations(run))

x = int(run.at(15)[0]) if run.count(15) else run.size - 1
print("ancestral path of particle", x, btp.ancestral_path(run, x))
print("contest counts (a, b, c):", btp.contest_counts(run, x))

n, trials = 3, 20_000
z, ta, tab = [], [], []
for i in range(trials):
    r = btp.simulate(n, analytic.THETA, seed=derive_seed(3, i))
    tc = btp.count_triples(r, 7)
    z.append(r.count(7))
    ta.append(tc.t_a)
    tab.append(tc.total)
print(f"E Z(1,theta) ~ {np.mean(z):.4f} (exact 1)")
print(f"E|T_a| ~ {np.mean(ta):.4f} (quadrature {analytic.a_expected(n).value:.4f})")
print(f"E|T|   ~ {np.mean(tab):.4f} (quadrature {analytic.ab_expected(n).value:.4f})")
