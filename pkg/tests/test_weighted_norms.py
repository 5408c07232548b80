import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from onlinecode.weighted_norms import (NormParams, dagger_norm, dagger_weights, star_norm,
                                       star_weights, tf, weight_diagonals)


@pytest.mark.parametrize("n, expected", [(1, 1), (4, 3), (7, 3), (8, 4), (1023, 10)])
def test_tf(n, expected):
    assert tf(n) == expected == math.ceil(math.log2(n + 1))


def test_tf_rejects_zero():
    with pytest.raises(ValueError):
        tf(0)


def test_star_examples():
    assert star_norm(np.ones(3), NormParams(1.0, 3)) == pytest.approx(math.sqrt(2.0), abs=1e-15)
    for mu in (0.0, 0.3, 1.0):
        assert star_norm(np.eye(5)[0], mu) == 1.0
    assert star_norm(np.eye(4)[2], 0.5) == pytest.approx(0.5 ** 0.25, abs=1e-6)
    assert star_norm(np.eye(4)[2], 0.5) == pytest.approx(0.840896, abs=1e-6)


def test_dagger_examples():
    assert dagger_norm(np.array([1.0, 2.0]), 1.0) == 3.0
    assert dagger_norm(np.eye(2)[1], 0.0) == pytest.approx(math.sqrt(2.0), abs=1e-15)
    assert dagger_norm(np.eye(4)[3], 0.5) == pytest.approx(1.414214, abs=1e-6)


def test_length_mismatch():
    with pytest.raises(ValueError):
        star_norm(np.ones(3), NormParams(0.5, 4))
    with pytest.raises(ValueError):
        dagger_norm(np.ones(5), NormParams(0.5, 2, rate=3))


def test_params_validation():
    for bad in (dict(mu=-0.1, horizon=2), dict(mu=1.5, horizon=2), dict(mu=0.5, horizon=0),
                dict(mu=0.5, horizon=2, rate=0)):
        with pytest.raises(ValueError):
            NormParams(**bad)
    assert NormParams(0.5, 4, rate=17).length == 68


def test_weight_diagonals_examples(rng):
    L, Rinv = weight_diagonals(NormParams(1.0, 4))
    np.testing.assert_array_equal(L, np.ones(4))
    np.testing.assert_allclose(Rinv, np.sqrt([1, 3 / 4, 2 / 4, 1 / 4]), rtol=0, atol=1e-15)
    for _ in range(50):
        mu = rng.uniform()
        p = NormParams(mu, 7, rate=3)
        L, Rinv = weight_diagonals(p)
        y, x = rng.standard_normal(21), rng.standard_normal(7)
        assert dagger_norm(y, p) == pytest.approx(np.abs(L * y).sum(), abs=1e-12)
        assert star_norm(x, p) == pytest.approx(np.linalg.norm(Rinv * x), abs=1e-12)


def test_weight_monotonicity():
    for mu in (0.0, 0.4, 1.0):
        assert np.all(np.diff(star_weights(10, mu)) <= 0)
        assert np.all(np.diff(dagger_weights(10, mu)) >= 0)


vec = arrays(np.float64, st.integers(1, 12), elements=st.floats(-1e3, 1e3))
mus = st.floats(0.0, 1.0)


@settings(max_examples=200, deadline=None)
@given(vec, mus)
def test_star_below_l2_dagger_above_l1(x, mu):
    assert star_norm(x, mu) <= np.linalg.norm(x) + 1e-12
    assert dagger_norm(x, mu) >= np.abs(x).sum() - 1e-12


@settings(max_examples=200, deadline=None)
@given(vec, mus, st.floats(-50, 50))
def test_homogeneity(x, mu, c):
    assert star_norm(c * x, mu) == pytest.approx(abs(c) * star_norm(x, mu), rel=1e-12, abs=1e-12)
    assert dagger_norm(c * x, mu) == pytest.approx(abs(c) * dagger_norm(x, mu), rel=1e-12,
                                                   abs=1e-12)


@settings(max_examples=200, deadline=None)
@given(st.integers(1, 12).flatmap(lambda n: st.tuples(
    arrays(np.float64, n, elements=st.floats(-1e3, 1e3)),
    arrays(np.float64, n, elements=st.floats(-1e3, 1e3)))), mus)
def test_triangle(pair, mu):
    x, y = pair
    scale = 1e-12 * (1 + np.abs(x).sum() + np.abs(y).sum())
    assert star_norm(x + y, mu) <= star_norm(x, mu) + star_norm(y, mu) + scale
    assert dagger_norm(x + y, mu) <= dagger_norm(x, mu) + dagger_norm(y, mu) + scale


def test_equality_cases(rng):
    x = np.zeros(6)
    x[0] = 3.0
    assert star_norm(x, 0.7) == np.linalg.norm(x)
    assert dagger_norm(x, 0.2) == np.abs(x).sum()
    z = rng.standard_normal(6)
    assert star_norm(z, 0.0) == pytest.approx(np.linalg.norm(z), abs=1e-14)
    assert dagger_norm(z, 1.0) == pytest.approx(np.abs(z).sum(), abs=1e-14)
    z[-1] = 1.0
    assert star_norm(z, 0.5) < np.linalg.norm(z)
    assert dagger_norm(z, 0.5) > np.abs(z).sum()


def test_monotone_in_mu(rng):
    x = rng.standard_normal(9)
    grid = np.linspace(0, 1, 11)
    s = [star_norm(x, m) for m in grid]
    d = [dagger_norm(x, m) for m in grid]
    assert all(a >= b - 1e-15 for a, b in zip(s, s[1:]))
    assert all(a >= b - 1e-15 for a, b in zip(d, d[1:]))
