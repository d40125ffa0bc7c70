"""Rate-n random walk over [0, theta] conditioned to end at 1̂.

Each coordinate flips an odd-conditioned Poisson number of times; the mean
length per coordinate is theta coth theta = sqrt(2) theta.
"""

import numpy as np

from cubefpp import walks
from cubefpp.analytic import THETA, oriented_mass_ratio
from cubefpp.rng import generator

rng = generator(11)
p = walks.sample_conditioned_walk(8, THETA, rng)
print("event times:", np.round(p.times, 3))
print("coordinates:", p.coords, "endpoint", bin(p.endpoint))
print(walks.walk_stats(p))

lengths = [walks.walk_stats(walks.sample_conditioned_walk(1000, THETA, rng)).length_per_n for _ in range(200)]
print(f"length/n at n=1000: {np.mean(lengths):.4f} vs {walks.expected_length_per_n(THETA):.4f}")

oriented = np.mean([walks.walk_stats(walks.sample_conditioned_walk(3, THETA, rng)).oriented
                    for _ in range(20_000)])
print(f"P(oriented) at n=3: {oriented:.4f} vs theta^3 = {oriented_mass_ratio(3, THETA):.4f}")
