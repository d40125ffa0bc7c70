"""Closed forms and the reduced quadratures for the branching process.

Prints the large-n limits, then A, B and the success bound as n grows, so
the convergence towards the limits can be read off directly.
"""

import math

from cubefpp import analytic

c = analytic.constants()
print(f"theta = {c.theta:.12f}   (sinh theta - 1 = {math.sinh(c.theta) - 1:.1e})")
print(f"limits: A -> {c.a_limit:.5f}, B -> {c.b_limit:.5f}, A+B -> {c.ab_limit:.5f}, "
      f"P -> {c.p_lower_limit:.3e}")

print("\n     n          A          B   success bound")
for n in (3, 10, 100, 1000, 10_000, 100_000):
    a = analytic.a_expected(n)
    b = analytic.b_expected(n)
    p = analytic.success_lower_bound(n)
    print(f"{n:>6} {a.value:10.6f} {b.value:10.5f}   {p.value:.4e}")

# the small-n brute-force oracle evaluates the unreduced double sums directly
for n in (1, 2, 3):
    print(f"n={n}: reduced A = {analytic.a_expected(n).value:.9f}, "
          f"brute force = {analytic.a_expected_bruteforce(n):.9f}")

# expected particle count at a weight-k vertex obeys the master equation
n, t = 6, 0.4
for k in range(n + 1):
    print(k, float(analytic.occupancy_mean(k, t, n)), float(analytic.occupancy_derivative(k, t, n)))
