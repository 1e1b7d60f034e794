import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from echoassign.errors import SingularConfusion
from echoassign.readout import ConfusionMatrix, apply_confusion, correct, corrected_zero_estimate, reject

rates = st.tuples(st.floats(0, 0.4), st.floats(0, 0.4))


def dense(cm):
    """Full 2^n x 2^n confusion built entry by entry."""
    n = cm.n
    out = np.ones((2**n, 2**n))
    for obs, true in itertools.product(range(2**n), repeat=2):
        for k in range(n):
            o, t = (obs >> (n - 1 - k)) & 1, (true >> (n - 1 - k)) & 1
            out[obs, true] *= cm.matrices[k][o, t]
    return out


def test_identity_is_noop():
    p = np.array([0.1, 0.2, 0.3, 0.4])
    assert np.allclose(apply_confusion(p, ConfusionMatrix.identity(2)), p)


def test_single_qubit_example():
    cm = ConfusionMatrix.from_rates([(0.1, 0.2)])
    assert np.allclose(apply_confusion(np.array([1.0, 0.0]), cm), [0.9, 0.1])
    assert cm.p00() == pytest.approx(0.9)
    assert np.allclose(correct(np.array([0.9, 0.1]), cm), [1, 0])


@settings(max_examples=40, deadline=None)
@given(st.lists(rates, min_size=1, max_size=4), st.integers(0, 2**31))
def test_forward_matches_dense_and_inverts(rs, seed):
    cm = ConfusionMatrix.from_rates(rs)
    p = np.random.default_rng(seed).dirichlet(np.ones(2**cm.n))
    q = apply_confusion(p, cm)
    assert np.allclose(q, dense(cm) @ p, atol=1e-12)
    assert q.sum() == pytest.approx(1)
    assert np.allclose(correct(q, cm), p, atol=1e-9)


def test_singular():
    with pytest.raises(SingularConfusion):
        ConfusionMatrix.from_rates([(0.5, 0.5)]).inverses()
    with pytest.raises(ValueError):
        ConfusionMatrix(np.array([[0.5, 0.5], [0.6, 0.5]]))


def test_corrected_zero_estimate():
    cm = ConfusionMatrix.from_rates([(0.05, 0.1), (0.02, 0.03)])
    true = np.array([0.7, 0.1, 0.1, 0.1])
    counts = apply_confusion(true, cm) * 1_000_000
    mean, err = corrected_zero_estimate(counts, cm)
    assert mean == pytest.approx(0.7, abs=1e-9)
    assert 0 < err < 1e-3
    rng = np.random.default_rng(0)
    draws = [corrected_zero_estimate(rng.multinomial(2000, apply_confusion(true, cm)), cm) for _ in range(400)]
    est = np.array([d[0] for d in draws])
    assert np.mean([d[1] for d in draws]) == pytest.approx(est.std(), rel=0.15)


def test_reject_threshold_is_strict():
    assert not reject(ConfusionMatrix.from_rates([(0.15, 0.0)])).rejected
    v = reject(ConfusionMatrix.from_rates([(0.0, 0.1500001), (0.01, 0.02)]))
    assert v.rejected and list(v.per_qubit) == [True, False]
    assert reject(ConfusionMatrix.from_rates([(0.3, 0.0)]), threshold=0.35).rejected is False
