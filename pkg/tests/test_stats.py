import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import stats as sps

from echoassign.errors import AllTied, EmptyCondition
from echoassign.stats import (
    PairedSample, bootstrap_mean_ci, bootstrap_std, conditional_curve, conditional_percentile_prob,
    kendall_tau_b, nearest_rank,
)


def brute_tau_b(x, y):
    c = d = t1 = t2 = 0
    for i, j in itertools.combinations(range(len(x)), 2):
        sx, sy = np.sign(x[i] - x[j]), np.sign(y[i] - y[j])
        t1 += sx == 0
        t2 += sy == 0
        c += sx * sy > 0
        d += sx * sy < 0
    n0 = len(x) * (len(x) - 1) // 2
    return (c - d) / np.sqrt((n0 - t1) * (n0 - t2))


def test_perfect_and_reversed():
    x = np.arange(10.0)
    assert kendall_tau_b(PairedSample(x, x)) == 1.0
    assert kendall_tau_b(PairedSample(x, -x)) == -1.0


def test_all_tied():
    with pytest.raises(AllTied):
        kendall_tau_b(PairedSample(np.ones(5), np.arange(5)))
    with pytest.raises(ValueError):
        PairedSample([1, 2], [1])
    with pytest.raises(ValueError):
        PairedSample([1, np.nan], [1, 2])


@settings(max_examples=60, deadline=None)
@given(st.lists(st.tuples(st.integers(0, 5), st.integers(0, 5)), min_size=3, max_size=30))
def test_tau_matches_brute_force(pairs):
    x, y = np.array(pairs, dtype=float).T
    if len(set(x)) == 1 or len(set(y)) == 1:
        return
    assert kendall_tau_b(PairedSample(x, y)) == pytest.approx(brute_tau_b(x, y), abs=1e-12)
    assert kendall_tau_b(PairedSample(x, y)) == pytest.approx(sps.kendalltau(x, y).statistic, abs=1e-10)


def test_tau_large_chunked():
    rng = np.random.default_rng(0)
    x = rng.integers(0, 50, 5000).astype(float)
    y = x + rng.normal(0, 10, 5000)
    assert kendall_tau_b(PairedSample(x, y)) == pytest.approx(sps.kendalltau(x, y).statistic, abs=1e-10)


def test_nearest_rank():
    v = np.array([15, 20, 35, 40, 50.0])
    assert nearest_rank(v, 30) == 20
    assert nearest_rank(v, 40) == 20
    assert nearest_rank(v, 50) == 35
    assert nearest_rank(v, 100) == 50


def test_conditional_probability():
    x = np.arange(1, 21.0)
    assert conditional_percentile_prob(PairedSample(x, x), 50) == 1.0
    assert conditional_percentile_prob(PairedSample(x, -x), 50) == 0.0
    with pytest.raises(EmptyCondition):
        conditional_percentile_prob(PairedSample(np.ones(10), x[:10]), 50)
    with pytest.raises(ValueError):
        conditional_percentile_prob(PairedSample(x, x), 100)
    curve = conditional_curve(PairedSample(x, x))
    assert list(curve) == list(range(5, 100, 5)) and all(v == 1.0 for v in curve.values())


def test_bootstrap_std():
    rng = np.random.default_rng(1)
    x = rng.normal(size=400)
    s = PairedSample(x, x + rng.normal(size=400))
    sd = bootstrap_std(kendall_tau_b, s, 300, np.random.default_rng(2))
    assert 0.005 < sd < 0.1
    with pytest.raises(ValueError):
        bootstrap_std(kendall_tau_b, s, 50)


def test_bootstrap_mean_ci():
    v = np.random.default_rng(0).normal(1.0, 1.0, 500)
    m, lo, hi = bootstrap_mean_ci(v, rng=np.random.default_rng(1))
    assert lo < m < hi and lo < 1.0 < hi
    assert hi - lo == pytest.approx(2 * 1.96 / np.sqrt(500), rel=0.2)
