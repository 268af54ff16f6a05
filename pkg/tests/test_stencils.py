import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dglocality.errors import AccuracyError
from dglocality.stencils import (
    DEPENDENT,
    INCONCLUSIVE,
    INDEPENDENT,
    accuracy_order,
    central_weights,
    classify,
    richardson,
    time_derivative,
)


def test_known_weights():
    np.testing.assert_allclose(central_weights(1, 1), [-0.5, 0, 0.5])
    np.testing.assert_allclose(central_weights(2, 1), [1, -2, 1])
    np.testing.assert_allclose(central_weights(3, 2), [-0.5, 1, 0, -1, 0.5])
    np.testing.assert_allclose(central_weights(1, 2), [1 / 12, -2 / 3, 0, 2 / 3, -1 / 12])


@pytest.mark.parametrize("nu,K,order", [(1, 1, 2), (1, 3, 6), (2, 2, 4), (3, 2, 2), (3, 3, 4), (4, 3, 4), (4, 4, 6)])
def test_accuracy_order(nu, K, order):
    assert accuracy_order(nu, K) == order


def test_halfwidth_too_small():
    with pytest.raises(ValueError):
        central_weights(4, 1)


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 4), st.integers(0, 3))
def test_weights_reproduce_monomials(nu, extra):
    K = max(nu, 2) + extra // 2
    w = central_weights(nu, K)
    ks = np.arange(-K, K + 1, dtype=float)
    for m in range(2 * K + 1):
        expect = float(np.prod(range(1, nu + 1))) if m == nu else 0.0
        assert abs(np.dot(w, ks**m) - expect) < 1e-9 * max(1.0, float(K) ** m)


def test_time_derivative_of_exponential():
    # d^3/dt^3 exp(a t) at 0 = a^3
    a = np.array([0.5, -1.3, 2.0])
    ex = time_derivative(lambda t: np.exp(np.outer(t, a)), 3, 0.05, 3, 3)
    np.testing.assert_allclose(ex.value, a**3, rtol=1e-9)
    assert ex.error < 1e-8


def test_richardson_removes_leading_terms():
    steps = [0.1, 0.05, 0.025]
    est = [1.0 + 3 * h**2 + 7 * h**4 for h in steps]
    ex = richardson(est, steps, 2)
    assert abs(ex.value - 1.0) < 1e-13


def test_richardson_divergence_is_reported():
    steps = [0.1, 0.05, 0.025]
    est = [np.array([0.0]), np.array([1.0]), np.array([30.0])]
    with pytest.raises(AccuracyError):
        richardson(est, steps, 2)
    # the same growth inside the noise allowance is tolerated
    richardson(est, steps, 2, noise=1e3)


def test_richardson_needs_halving_steps():
    with pytest.raises(ValueError):
        richardson([1.0, 1.0], [0.1, 0.07], 2)


def test_classify_thresholds():
    assert classify(11.0, 1.0) == DEPENDENT
    assert classify(1.99, 1.0) == INDEPENDENT
    assert classify(5.0, 1.0) == INCONCLUSIVE
