import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.integrate import solve_ivp
from scipy.special import comb

from cubefpp import analytic as an
from cubefpp.hypercube import hamming_weight

from conftest import THETA


def test_constants():
    c = an.constants()
    assert abs(math.sinh(c.theta) - 1.0) <= 1e-14
    assert c.theta == pytest.approx(0.8813735870, abs=1e-10)
    assert abs(c.b_limit - (c.ab_limit - c.a_limit)) <= 1e-14
    assert f"{c.a_limit:.3f}" == "0.623"
    assert f"{c.b_limit:.3f}" == "6.710" and str(c.b_limit).startswith("6.709")
    assert str(c.ab_limit).startswith("7.333")
    assert f"{c.p_lower_limit:.1e}" == "6.9e-09"
    assert c.s_lower_limit == pytest.approx(0.3768, abs=1e-4)
    assert c.geodesic_slope == pytest.approx(1.24645, abs=1e-5)


def test_occupancy_examples():
    assert an.occupancy_mean(0, 0.0, 7) == 1.0
    for n in (1, 5, 40):
        assert an.occupancy_mean(n, THETA, n) == pytest.approx(1.0, rel=1e-13)
    assert an.occupancy_mean(1, 1.0, 2) == pytest.approx(1.8134302, abs=1e-7)


def test_occupancy_matches_master_ode():
    # the master equation integrated directly over all 2^n vertices, n = 2
    n = 2

    def rhs(t, m):
        return np.array([sum(m[v ^ (1 << i)] for i in range(n)) for v in range(1 << n)])

    m0 = np.zeros(1 << n)
    m0[0] = 1.0
    sol = solve_ivp(rhs, (0, 1.0), m0, rtol=1e-12, atol=1e-14)
    for v in range(1 << n):
        assert sol.y[v, -1] == pytest.approx(an.occupancy_mean(hamming_weight(v), 1.0, n), rel=1e-9)
    assert sol.y[1, -1] == pytest.approx(1.8134302, abs=1e-7)


def test_occupancy_overflow_and_log_mode():
    with pytest.raises(OverflowError, match="log"):
        an.occupancy_mean(0, 2.0, 2000)
    assert an.log_occupancy_mean(0, 2.0, 2000) == pytest.approx(2000 * math.log(math.cosh(2.0)))
    assert an.log_occupancy_mean(3, 0.0, 5) == -math.inf
    with pytest.raises(ValueError):
        an.occupancy_mean(6, 0.1, 5)


@pytest.mark.parametrize("n", [1, 2, 4, 7])
def test_master_equation_residual(n):
    t = np.linspace(0.05, 1.5, 40)
    h = 1e-5
    for k in range(n + 1):
        fd = (an.occupancy_mean(k, t + h, n) - an.occupancy_mean(k, t - h, n)) / (2 * h)
        assert np.max(np.abs(fd - an.occupancy_derivative(k, t, n)) / an.occupancy_derivative(k, t, n)) <= 1e-6


@pytest.mark.parametrize("n", [1, 2, 3, 4, 5, 6])
def test_second_derivative_identity(n):
    h = 1e-3
    t = np.linspace(0.1, 1.2, 12)
    for k in range(n + 1):
        m = lambda x: an.occupancy_mean(k, x, n)
        # fourth-order central stencil
        fd = (-m(t + 2 * h) + 16 * m(t + h) - 30 * m(t) + 16 * m(t - h) - m(t - 2 * h)) / (12 * h**2)
        exact = an.occupancy_second_derivative(k, t, n)
        assert np.max(np.abs(fd - exact) / exact) <= 1e-6


def test_second_derivative_matches_explicit_double_sum():
    n = 4
    for v in range(1 << n):
        explicit = sum(an.occupancy_mean(hamming_weight(v ^ (1 << i) ^ (1 << j)), 0.7, n)
                       for i in range(n) for j in range(n))
        assert an.occupancy_second_derivative(hamming_weight(v), 0.7, n) == pytest.approx(explicit, rel=1e-13)


def test_convolution_examples():
    assert an.convolve_occupancy(2, 0.5, 0.5, 2) == pytest.approx(an.occupancy_mean(2, 1.0, 2), rel=1e-12)
    assert an.convolve_occupancy(1, 0.0, 0.8, 3) == pytest.approx(an.occupancy_mean(1, 0.8, 3), rel=1e-14)
    assert an.convolve_occupancy(3, 0.3, 0.6, 3) == pytest.approx(math.sinh(0.9) ** 3, rel=1e-12)
    with pytest.raises(ValueError):
        an.convolve_occupancy(0, 0.1, 0.1, 21)


def test_convolution_grid():
    grid = np.round(np.arange(0.1, 1.01, 0.1), 10)
    for n in range(1, 5):
        for k in range(n + 1):
            for s in grid:
                for t in grid:
                    lhs = an.convolve_occupancy(k, s, t, n)
                    rhs = an.occupancy_mean(k, s + t, n)
                    assert abs(lhs - rhs) <= 1e-10 * rhs


def test_log_sinh_bound():
    t = np.linspace(0, THETA, 100001)[:-1]
    assert np.all(np.log(np.sinh(THETA - t)) <= -math.sqrt(2) * t + 1e-15)


@pytest.mark.parametrize("n", [1, 2, 3])
def test_reduced_forms_match_brute_force(n):
    a = an.a_expected(n)
    ab = an.ab_expected(n)
    assert a.value == pytest.approx(an.a_expected_bruteforce(n), rel=1e-4)
    assert ab.value == pytest.approx(an.ab_expected_bruteforce(n), rel=1e-4)


def test_reduced_forms_match_brute_force_off_theta():
    for u in (0.4, 1.3):
        assert an.a_expected(2, u).value == pytest.approx(an.a_expected_bruteforce(2, u), rel=1e-4)
        assert an.ab_expected(2, u).value == pytest.approx(an.ab_expected_bruteforce(2, u), rel=1e-4)


def test_brute_force_limits():
    with pytest.raises(ValueError):
        an.a_expected_bruteforce(4)


def test_large_n_values():
    a = an.a_expected(10_000)
    b = an.b_expected(10_000)
    ab = an.ab_expected(10_000)
    p = an.success_lower_bound(10_000)
    assert abs(a.value - 0.6232) <= 0.01
    assert abs(b.value - 6.7098) <= 0.03
    assert abs(ab.value - 7.3330) <= 0.02
    assert abs(p.value / 6.9e-9 - 1) <= 0.05
    assert b.value == ab.value - a.value
    lo, hi = an.s_bounds(10_000)
    assert lo == pytest.approx(0.3768, abs=2e-3) and hi == pytest.approx(1.0)


@given(st.integers(1, 300), st.floats(0.1, 1.5))
def test_value_invariants(n, u):
    a = an.a_expected(n, u)
    ab = an.ab_expected(n, u)
    assert a.est_error >= 0 and a.est_error <= 1e-9 * abs(a.value) + 1e-300
    assert 0 <= a.value <= ab.value
    lo, hi = an.s_bounds(n, u)
    assert 0 <= lo <= hi


@given(st.floats(0.01, 5.0), st.floats(0.01, 5.0), st.floats(0.0, 50.0))
def test_success_bound_monotone_in_s(s1, s2, b):
    lo, hi = sorted((s1, s2))
    assert an.success_bound_from(lo, b) <= an.success_bound_from(hi, b)
    assert an.success_bound_from(hi, b) <= hi


def test_success_bound_below_s_lower():
    for n in (3, 6, 12, 100):
        lo, _ = an.s_bounds(n)
        p = an.success_lower_bound(n)
        assert 0 < p.value <= lo


def test_degenerate_bound():
    with pytest.raises(an.DegenerateBoundError, match="degenerate"):
        an.success_lower_bound(3, 2.0)


def test_config_validation():
    with pytest.raises(ValueError):
        an.AnalyticConfig(tol=1e-3)
    with pytest.raises(ValueError):
        an.AnalyticConfig(max_subdivisions=8)
    with pytest.raises(ValueError):
        an.a_expected(0)
    with pytest.raises(ValueError):
        an.a_expected(3, -1.0)


def test_oriented_mass_ratio():
    assert an.oriented_mass_ratio(3, THETA) == pytest.approx(THETA**3, rel=1e-14)
    assert an.oriented_mass_ratio(1, 0.7) == pytest.approx(0.7 / math.sinh(0.7))
    # n! oriented paths of length n each carry t^n / n! expected particles
    n, t = 4, 0.9
    assert an.oriented_mass_ratio(n, t) == pytest.approx(
        math.factorial(n) * t**n / math.factorial(n) / math.sinh(t) ** n)
    with pytest.raises(ValueError):
        an.oriented_mass_ratio(3, 0.0)


def test_class_counts_used_by_brute_force():
    # sum over vertices equals the class-weighted sum
    n, t = 3, 0.5
    direct = sum(an.occupancy_mean(hamming_weight(v), t, n) for v in range(1 << n))
    classes = sum(comb(n, k) * an.occupancy_mean(k, t, n) for k in range(n + 1))
    assert direct == pytest.approx(classes) == pytest.approx(math.exp(n * t))
