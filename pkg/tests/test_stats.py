import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import stats as sps

from cubefpp import stats
from cubefpp.rng import generator

from conftest import THETA

samples = st.lists(st.floats(0.0, 5.0, allow_nan=False), min_size=2, max_size=200)


@given(samples)
def test_norm_ordering_and_parts(xs):
    d = stats.deviation_summary(xs, THETA, 10)
    assert d.norms[1] <= d.norms[2] + 1e-12
    x = np.asarray(xs) - THETA
    assert np.all(np.maximum(x, 0) * np.maximum(-x, 0) == 0)
    assert d.mean_plus - d.mean_minus == pytest.approx(np.mean(x), abs=1e-12)
    assert d.scaled_l1 == pytest.approx(10 * d.norms[1])


def test_summarize():
    s = stats.summarize("x", np.arange(101.0))
    assert (s.count, s.mean, s.min, s.max, s.q50) == (101, 50.0, 0.0, 100.0, 50.0)
    assert s.variance == pytest.approx(np.var(np.arange(101.0), ddof=1))
    assert s.stderr == pytest.approx(math.sqrt(s.variance / 101))
    assert list(s.row()) == list(stats.SUMMARY_FIELDS)
    assert stats.summarize("y", []).count == 0


def test_ks_examples():
    rng = generator(0)
    a = rng.exponential(size=10_000)
    same = stats.compare_distributions(a, a)
    assert same.statistic == 0.0 and same.pvalue == 1.0
    b = rng.exponential(0.5, size=10_000)
    assert stats.compare_distributions(a, b).pvalue < 0.01
    c = rng.exponential(size=10_000)
    assert stats.compare_distributions(a, c).pvalue > 0.01
    with pytest.raises(ValueError):
        stats.compare_distributions([], [1.0])


# scipy's asymptotic p-value divides by zero on one-point samples; only the statistic is compared
@pytest.mark.filterwarnings("ignore::RuntimeWarning")
@given(st.lists(st.floats(-10, 10), min_size=1, max_size=60), st.lists(st.floats(-10, 10), min_size=1, max_size=60))
def test_ks_statistic_matches_library(a, b):
    assert stats.ks_statistic(a, b) == pytest.approx(sps.ks_2samp(a, b, method="asymp").statistic, abs=1e-12)


def test_z_score():
    assert stats.z_score(1.3, 0.1, 1.0) == pytest.approx(3.0)
    assert stats.z_score(1.0, 0.0, 1.0) == 0.0
    assert stats.z_score(2.0, 0.0, 1.0) == math.inf
