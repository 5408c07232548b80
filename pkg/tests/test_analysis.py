import math

import numpy as np
import pytest

from onlinecode.analysis import (ConvergenceError, PrefixSplit, block_event, block_norm_profile,
                                 bvh_bound, fit_power_law, invertibility_ratio,
                                 jacobi_singular_values, operator_norm, prefix_invertibility,
                                 robust_invertibility, structured_starts, two_one_norm)
from onlinecode.matrix_ensemble import EnsembleParams, code_matrix, entry_variance, sample_M
from onlinecode.weighted_norms import dagger_norm, star_norm


def test_operator_norm_examples(rng):
    assert operator_norm(np.eye(3)) == pytest.approx(1.0, abs=1e-12)
    assert operator_norm(np.diag([3.0, 1.0])) == pytest.approx(3.0, abs=1e-12)
    for _ in range(20):
        A = rng.standard_normal((8, 5))
        ref = jacobi_singular_values(A)[0]
        assert operator_norm(A) == pytest.approx(ref, abs=1e-7)


def test_jacobi_oracle_matches_lapack(rng):
    A = rng.standard_normal((7, 4))
    np.testing.assert_allclose(jacobi_singular_values(A), np.linalg.svd(A, compute_uv=False),
                               atol=1e-12)


def test_operator_norm_cap():
    A = np.diag([1.0, 1.0 - 1e-9])
    with pytest.raises(ConvergenceError) as info:
        operator_norm(A, tol=1e-15, max_iter=3)
    assert info.value.last > 0


def test_operator_norm_rejects_nan():
    with pytest.raises(ValueError):
        operator_norm(np.array([[np.nan]]))


def test_block_profile_T1():
    M = sample_M(EnsembleParams(T=1, k=4, seed=1))
    prof = block_norm_profile(M)
    assert prof.shape == (1,)
    assert prof[0] == pytest.approx(np.linalg.norm(M.entries, 2))


def test_block_event_implies_unit_norm():
    for s in range(30):
        M = sample_M(EnsembleParams(T=32, k=8, seed=s))
        if block_event(block_norm_profile(M)):
            assert np.linalg.norm(M.entries, 2) <= 1.0


def test_block_event_frequency_grows_with_k():
    freq = {k: np.mean([block_event(block_norm_profile(sample_M(EnsembleParams(T=64, k=k, seed=s))))
                        for s in range(200)]) for k in (4, 16)}
    assert freq[16] > freq[4]


def test_bvh_examples(rng):
    assert bvh_bound(np.array([[4.0]])) == pytest.approx(6.0)
    n, s2 = 5, 0.3
    expect = 1.5 * (2 * math.sqrt(s2) * math.sqrt(n) + 10 * math.sqrt(s2) * math.sqrt(math.log(n)))
    assert bvh_bound(np.full((n, n), s2)) == pytest.approx(expect)
    T, k = 16, 2
    var = np.array([[entry_variance(i, j, k) for j in range(1, T + 1)]
                    for i in range(1, T + 1) for _ in range(k)])
    norms = [np.linalg.norm(sample_M(EnsembleParams(T=T, k=k, seed=s)).entries, 2)
             for s in range(200)]
    assert np.mean(norms) <= bvh_bound(var)
    with pytest.raises(ValueError):
        bvh_bound(-np.ones((2, 2)))


def test_two_one_examples(rng):
    a = rng.standard_normal(5)
    assert two_one_norm(a[:, None]) == pytest.approx(np.abs(a).sum())
    assert two_one_norm(np.eye(2)) == pytest.approx(math.sqrt(2))
    A = rng.standard_normal((6, 3))
    exact = two_one_norm(A)
    est = two_one_norm(A, mode="estimate", restarts=10_000)
    assert est <= exact * (1 + 1e-12) and exact <= est * (1 + 1e-9)
    with pytest.raises(ValueError):
        two_one_norm(np.ones((21, 2)))


def test_invertibility_t1():
    C = code_matrix(3, 4, 1).entries
    e = robust_invertibility(C, 0.5)
    assert e.value == pytest.approx(dagger_norm(C[:, 0], 0.5), rel=1e-12)


def test_invertibility_stacked_identity():
    k, t = 3, 5
    A = np.vstack([np.eye(t)] * k)
    assert robust_invertibility(A, 1.0).value == pytest.approx(k, rel=1e-9)


def test_invertibility_t2_vs_grid():
    A = code_matrix(7, 4, 2).entries
    # a one-point internal grid leaves the subgradient result in charge
    e = robust_invertibility(A, 0.5, grid_points=1)
    th = np.linspace(0, math.pi, 10_000, endpoint=False)
    from onlinecode.weighted_norms import star_weights
    R = np.sqrt(star_weights(2, 0.5))
    grid = min(dagger_norm(A @ (np.array([math.cos(a), math.sin(a)]) / R), 0.5) for a in th)
    assert e.value <= grid * 1.01 and e.value >= grid * 0.99 - 1e-12


def test_invertibility_witness_and_starts():
    A = code_matrix(2, 4, 12).entries
    e = robust_invertibility(A, 0.5, starts=16, iters=200)
    assert invertibility_ratio(A, e.best_x, 0.5) == pytest.approx(e.value, abs=1e-9)
    assert star_norm(e.best_x, 0.5) == pytest.approx(1.0, abs=1e-12)
    S = structured_starts(12)
    assert all(e.value <= invertibility_ratio(A, S[:, j], 0.5) + 1e-12 for j in range(S.shape[1]))


def test_invertibility_scaling_covariance():
    A = code_matrix(2, 4, 10).entries
    a = robust_invertibility(A, 0.5, starts=8, iters=100)
    b = robust_invertibility(3.0 * A, 0.5, starts=8, iters=100)
    assert b.value == pytest.approx(3.0 * a.value, rel=1e-9)


def test_prefix_split():
    s = PrefixSplit(8, 0.25)
    assert s.j0 == math.ceil(4 * 3 / 0.25) and not s.usable
    assert PrefixSplit(8, j0=3).suffix_length == 3
    with pytest.raises(ValueError):
        PrefixSplit(8, j0=0)
    A = code_matrix(1, 4, 8).entries
    with pytest.raises(ValueError):
        prefix_invertibility(A, 0.5, s)


def test_prefix_j0_one_reduces():
    A = code_matrix(1, 4, 8).entries
    a = prefix_invertibility(A, 0.5, PrefixSplit(8, j0=1), starts=8, iters=100)
    b = robust_invertibility(A, 0.5, starts=8, iters=100)
    assert a.value == b.value


def test_prefix_at_least_full():
    A = code_matrix(1, 4, 8).entries
    full = robust_invertibility(A, 0.5)
    pre = prefix_invertibility(A, 0.5, PrefixSplit(8, j0=3))
    assert pre.value >= full.value - 1e-9
    # witness ratio with the suffix zeroed in the denominator
    x = pre.best_x
    den = star_norm(np.concatenate([x[:5], np.zeros(3)]), 0.5)
    assert dagger_norm(A @ x, 0.5) / den == pytest.approx(pre.value, rel=1e-9)


def test_fit_power_law_exact():
    ts = np.array([4, 8, 16, 32, 64])
    c0, d, r2 = fit_power_law(ts, 2.0 * ts ** 0.3)
    assert c0 == pytest.approx(2.0) and d == pytest.approx(0.2) and r2 == pytest.approx(1.0)
