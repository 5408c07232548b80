import math

import numpy as np
import pytest

from onlinecode.matrix_ensemble import (EnsembleParams, LotMatrix, cblock, code_matrix,
                                        dump_csv, entry_variance, lclock, leading_submatrix,
                                        load_csv, mblock, mcblock, sample_M, segment_rows,
                                        systematic_C, to_B, vblock)
from onlinecode.weighted_norms import dagger_norm, star_norm, weight_diagonals, NormParams


def M_of(T=8, k=3, seed=11):
    return sample_M(EnsembleParams(T=T, k=k, seed=seed))


def test_variance_closed_form():
    k = 5
    assert entry_variance(1, 1, k) == 1 / k ** 2
    assert entry_variance(3, 2, k) == pytest.approx(1 / (2 * (16 * k) ** 2), rel=1e-15)
    assert entry_variance(1, 2, k) == 0.0


def test_upper_entries_exactly_zero():
    M = M_of(T=12, k=4)
    assert M.is_lot()
    assert np.all(M.entries[M.row(1, 2), 1:] == 0.0)
    assert systematic_C(M).is_lot()


@pytest.mark.parametrize("i, j", [(1, 1), (3, 2), (6, 1)])
def test_empirical_variance(i, j):
    # one draw of entry ((i, 1), j) per seed
    k = 2
    draws = np.array([segment_rows(s, k, i)[0, j - 1] for s in range(10_000)])
    v = entry_variance(i, j, k)
    se = v * math.sqrt(2.0 / (draws.size - 1))
    assert abs(draws.var(ddof=1) - v) <= 5 * se


def test_entries_independent_of_T():
    a = sample_M(EnsembleParams(T=8, k=3, seed=4))
    b = sample_M(EnsembleParams(T=4, k=3, seed=4))
    assert np.array_equal(leading_submatrix(a, 4).entries, b.entries)
    np.testing.assert_array_equal(leading_submatrix(a, 8).entries, a.entries)
    np.testing.assert_array_equal(leading_submatrix(a, 1).entries, a.entries[:3, :1])


def test_leading_out_of_range():
    with pytest.raises(ValueError):
        leading_submatrix(M_of(), 0)
    with pytest.raises(ValueError):
        leading_submatrix(M_of(), 9)


def test_params_validation():
    for bad in (dict(T=0, k=1), dict(T=2, k=0), dict(T=2, k=1, seed=-1)):
        with pytest.raises(ValueError):
            EnsembleParams(**bad)


def test_entries_read_only():
    M = M_of()
    with pytest.raises(ValueError):
        M.entries[0, 0] = 1.0


def test_to_B():
    M = M_of(T=6, k=2)
    B1 = to_B(M, 1.0)
    T = 6
    j = np.arange(1, T + 1)
    np.testing.assert_allclose(B1.entries, M.entries / np.sqrt(T - j + 1.0), rtol=1e-15)
    B = to_B(M, 0.5)
    last = M.row(T, 2)
    assert B.entries[last, T - 1] == M.entries[last, T - 1]
    i, l, jj = 4, 1, 2
    r = M.row(i, l)
    expect = M.entries[r, jj - 1] / math.sqrt((T - i + 1) ** 0.5 * (T - jj + 1) ** 0.5)
    assert B.entries[r, jj - 1] == pytest.approx(expect, rel=1e-12)


def test_systematic_structure(rng):
    M = M_of(T=7, k=3)
    C = systematic_C(M)
    assert C.k == 4 and C.shape == (28, 7)
    sys_rows = C.entries[3::4]
    np.testing.assert_array_equal(sys_rows, np.eye(7) / math.sqrt(2))
    x = rng.standard_normal(7)
    lhs = np.linalg.norm(C @ x) ** 2
    rhs = (np.linalg.norm(M @ x) ** 2 + np.linalg.norm(x) ** 2) / 2
    assert lhs == pytest.approx(rhs, rel=1e-13)
    # a pulse at the last time only reaches the last segment
    col = C @ np.eye(7)[6]
    assert np.all(col[:-4] == 0.0) and np.any(col[-4:] != 0.0)


def test_blocks_T7():
    x = np.arange(1, 8)
    np.testing.assert_array_equal(vblock(x, 1), [7])
    np.testing.assert_array_equal(vblock(x, 2), [5, 6])
    np.testing.assert_array_equal(vblock(x, 3), [1, 2, 3, 4])
    np.testing.assert_array_equal(cblock(x, 3, 2), [1, 2, 3, 4, 5, 6])
    with pytest.raises(ValueError):
        vblock(x, 4)
    with pytest.raises(ValueError):
        vblock(x, 0)


@pytest.mark.parametrize("T", [7, 8, 13, 16])
def test_block_decomposition(T, rng):
    A = rng.standard_normal((3 * T, T))
    x = rng.standard_normal(T)
    from onlinecode.weighted_norms import tf
    total = sum(mblock(A, j) @ vblock(x, j) for j in range(1, tf(T) + 1))
    np.testing.assert_allclose(total, A @ x, atol=1e-12)
    for j in range(2, tf(T) + 1):
        lhs = mcblock(A, j) @ cblock(x, j)
        rhs = mblock(A, j) @ vblock(x, j) + mcblock(A, j - 1) @ cblock(x, j - 1)
        np.testing.assert_allclose(lhs, rhs, atol=1e-12)


def test_lclock(rng):
    y = np.arange(24)
    np.testing.assert_array_equal(lclock(y, 2, 3), np.arange(18, 24))
    with pytest.raises(ValueError):
        lclock(y, 5, 3)


def test_reduction_identity(rng):
    T, k, mu = 9, 3, 0.4
    M = M_of(T=T, k=k)
    L, _ = weight_diagonals(NormParams(mu, T, rate=k))
    _, Rinv = weight_diagonals(NormParams(mu, T))
    for _ in range(20):
        y = rng.standard_normal(T)
        x = Rinv * y
        lhs = dagger_norm(M @ y, mu) / star_norm(y, mu)
        rhs = np.abs(L * (M.entries @ (x / Rinv))).sum() / np.linalg.norm(x)
        assert lhs == pytest.approx(rhs, rel=1e-10)


def test_csv_roundtrip(tmp_path):
    C = code_matrix(5, 2, 6)
    text = dump_csv(C, tmp_path / "c.csv")
    assert text.splitlines()[0] == "T,k,seed"
    back = load_csv(tmp_path / "c.csv")
    assert np.array_equal(back.entries, C.entries) and (back.T, back.k, back.seed) == (6, 3, 5)
    assert np.array_equal(load_csv(text).entries, C.entries)
    with pytest.raises(ValueError):
        load_csv("a,b\n1,2\n")


def test_lotmatrix_shape_check():
    with pytest.raises(ValueError):
        LotMatrix(T=2, k=2, entries=np.zeros((3, 2)))
