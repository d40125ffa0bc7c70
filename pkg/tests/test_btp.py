import io
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from cubefpp import analytic, btp
from cubefpp import hypercube as hc
from cubefpp.rng import derive_seed

from conftest import THETA, within_se


def _runs(n, horizon, count, master=0, origin=0):
    return [btp.simulate(n, horizon, origin, derive_seed(master, i)) for i in range(count)]


def test_horizon_zero_is_root_only():
    run = btp.mark_alive(btp.simulate(4, 0.0, seed=3))
    assert run.size == 1 and run.alive[0] and run.parent[0] == -1
    assert btp.contest_counts(run, 0) == (0, 0, 0)
    assert btp.uncontested_occupancy(run, 0, 0.0) == 1
    assert btp.ancestral_path(run, 0) == ([0], True, 0)


def test_argument_checks():
    with pytest.raises(ValueError):
        btp.simulate(3, -1.0)
    with pytest.raises(ValueError):
        btp.simulate(3, 1.0, origin=8)
    with pytest.raises(hc.DimensionError):
        btp.simulate(31, 0.1)
    run = btp.simulate(3, 0.5)
    with pytest.raises(ValueError):
        run.count(0, 0.6)


def test_population_cap():
    with pytest.raises(btp.PopulationCapExceeded) as info:
        btp.simulate(10, 2.0, seed=1, max_particles=500)
    assert info.value.particles >= 500
    assert 0 < info.value.time_reached <= 2.0
    assert btp.expected_population(14, THETA) == pytest.approx(2.3e5, rel=0.02)


@given(st.integers(1, 5), st.floats(0.0, THETA + 0.6), st.integers(0, 2**64 - 1))
def test_run_structure_and_coupling(n, horizon, seed):
    run = btp.mark_alive(btp.simulate(n, horizon, seed=seed))
    assert btp.coupling_violations(run) == []
    assert not run.truncated
    assert np.all(np.diff(run.birth) > 0)
    assert np.all(run.birth <= horizon)
    assert np.all(run.a + run.b == run.c)
    par = run.parent[1:]
    assert np.all(run.birth[1:] > run.birth[par])
    for x in range(0, run.size, max(1, run.size // 10)):
        path = btp.ancestral_path(run, x)
        assert path.simple == (run.a[x] == 0)
        assert btp.contest_counts(run, x) == (run.a[x], run.b[x], run.c[x])
        assert path.length == run.depth[x]


@given(st.integers(2, 5), st.integers(0, 2**64 - 1), st.floats(0.05, 1.0))
def test_sandwich_at_intermediate_times(n, seed, frac):
    run = btp.mark_alive(btp.simulate(n, THETA + 0.3, seed=seed))
    t = frac * run.horizon
    for v in range(1 << n):
        ids = run.at(v, t)
        z0 = btp.uncontested_occupancy(run, v, t)
        alive = int(np.sum(run.alive[ids]))
        assert z0 <= alive <= len(ids)
        assert alive <= 1


def test_return_to_origin_is_ghost():
    for run in _runs(2, 2.0, 50):
        run = btp.mark_alive(run)
        back = run.at(0)
        if len(back) > 1:
            assert run.alive[back[0]] and not run.alive[back[1:]].any()
            assert run.a[back[1]] >= 1
            return
    pytest.fail("no return to the origin in 50 runs")


def test_alive_arrival_basics():
    run = btp.simulate(3, 5.0, seed=9)
    t = btp.alive_arrival(run, 7)
    assert math.isfinite(t) and t >= run.birth[run.at(7)[0]]
    assert btp.alive_arrival(btp.simulate(3, 0.0), 7) == math.inf


def test_count_triples_single_particle():
    run = btp.simulate(3, 0.0)
    tc = btp.count_triples(run, 0)
    assert (tc.t_a, tc.t_b, tc.total) == (0, 0, 0)
    run = btp.simulate(3, 2.0, seed=4)
    tc = btp.count_triples(run, 7)
    assert tc.total == sum(c for _, _, c in tc.per_particle.values())
    assert all(a + b == c for a, b, c in tc.per_particle.values())


def test_dump_round_trip():
    run = btp.mark_alive(btp.simulate(4, 1.1, origin=5, seed=17))
    buf = io.StringIO()
    btp.dump_run(run, buf)
    buf.seek(0)
    back = btp.load_run(buf)
    assert (back.n, back.horizon, back.origin, back.seed) == (4, run.horizon, 5, 17)
    for k in ("parent", "vertex", "birth", "direction", "alive"):
        assert np.array_equal(getattr(back, k), getattr(run, k))
    assert np.array_equal(back.c, run.c)


def test_population_mean_small_cube():
    pop = np.array([r.size for r in _runs(2, 0.5, 20000, master=1)])
    assert within_se(pop.mean(), pop.std(ddof=1) / math.sqrt(len(pop)), math.e)


def test_triples_match_quadrature_n2():
    ta, tab = [], []
    for r in _runs(2, THETA, 100_000, master=2):
        tc = btp.count_triples(r, 3)
        ta.append(tc.t_a)
        tab.append(tc.total)
    ta, tab = np.array(ta, float), np.array(tab, float)
    se = lambda x: x.std(ddof=1) / math.sqrt(len(x))
    assert within_se(ta.mean(), se(ta), analytic.a_expected(2).value)
    assert within_se(tab.mean(), se(tab), analytic.ab_expected(2).value)


def test_class_means_match_occupancy():
    n, t = 3, 0.8
    runs = _runs(n, t, 20000, master=3)
    for k in range(n + 1):
        v = (1 << k) - 1
        z = np.array([r.count(v) for r in runs], float)
        assert within_se(z.mean(), z.std(ddof=1) / math.sqrt(len(z)), analytic.occupancy_mean(k, t, n))


def test_origin_is_configurable():
    runs = _runs(3, THETA, 20000, master=4, origin=0b101)
    z = np.array([r.count(0b010) for r in runs], float)
    assert within_se(z.mean(), z.std(ddof=1) / math.sqrt(len(z)), 1.0)


def test_uncontested_probability_dominates_bound_n6():
    runs = _runs(6, THETA, 20000, master=5)
    z0 = np.mean([btp.uncontested_occupancy(r, 63) for r in runs])
    assert z0 >= analytic.success_lower_bound(6).value
    assert z0 > 0


def test_line_lengths_average_to_walk_mean():
    # expected total line length at 1̂ over expected count equals n * theta * coth(theta)
    n = 6
    runs = _runs(n, THETA, 20000, master=6)
    z = np.array([r.count(63) for r in runs], float)
    s = np.array([r.depth[r.at(63)].sum() for r in runs], float)
    ratio = s.mean() / z.mean()
    resid = s - ratio * z
    se = resid.std(ddof=1) / (math.sqrt(len(z)) * z.mean())
    assert within_se(ratio, se, math.sqrt(2) * THETA * n)
    counts = btp.line_length_counts(runs[0], 63)
    assert sum(counts.values()) == runs[0].count(63)
