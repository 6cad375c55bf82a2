import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import dtw_brute, krdtw_brute
from spdtw.elastic_dense import band_radius, dtw, dtw_sc, krdtw
from spdtw.elastic_sparse import (
    SENTINEL,
    pairwise_sp_dtw,
    pairwise_sp_krdtw,
    sp_dtw,
    sp_krdtw,
)
from spdtw.errors import DimensionError, ParameterError
from spdtw.path_sparsifier import SparsePathMatrix, ensure_connectivity, learn_path_matrix


def _random_spm(rng, T, density, symmetric=False, weights=False):
    mask = rng.random((T, T)) < density
    if symmetric:
        mask = mask | mask.T
    mask[0, 0] = mask[-1, -1] = True
    w = None
    if weights:
        w = rng.uniform(0.5, 3.0, size=(T, T))
        if symmetric:
            w = np.triu(w) + np.triu(w, 1).T
    return ensure_connectivity(SparsePathMatrix.from_mask(mask, w))


@settings(max_examples=200, deadline=None)
@given(st.integers(1, 32), st.sampled_from(["sq", "abs"]), st.integers(0, 2**31 - 1))
def test_full_grid_equals_dtw(T, cost, seed):
    x, y = np.random.default_rng(seed).normal(size=(2, T))
    r = sp_dtw(x, y, SparsePathMatrix.full(T), cost)
    assert r.value == dtw(x, y, cost).value
    assert r.visited == T * T and r.reachable


@settings(max_examples=200, deadline=None)
@given(st.integers(1, 32), st.floats(0.01, 10), st.integers(0, 2**31 - 1))
def test_full_grid_equals_krdtw(T, nu, seed):
    x, y = np.random.default_rng(seed).normal(size=(2, T))
    r = sp_krdtw(x, y, SparsePathMatrix.full(T), nu)
    assert r.value == pytest.approx(krdtw(x, y, nu).value, rel=1e-9)


def test_diagonal_corridor(rng):
    for T in (1, 5, 40):
        x, y = rng.normal(size=(2, T))
        m = SparsePathMatrix.diagonal(T)
        assert sp_dtw(x, y, m).value == pytest.approx(np.sum((x - y) ** 2), rel=1e-14)
        assert sp_dtw(x, y, m, "abs").value == pytest.approx(np.sum(np.abs(x - y)), rel=1e-14)


@pytest.mark.parametrize("pct", [0, 3, 10, 25, 100])
def test_band_matrix_equals_dtw_sc(pct, rng):
    T = 57
    m = SparsePathMatrix.band(T, band_radius(pct, T))
    for _ in range(10):
        x, y = rng.normal(size=(2, T))
        r = sp_dtw(x, y, m)
        ref = dtw_sc(x, y, band_pct=pct)
        assert r.value == ref.value and r.visited == ref.visited


def test_single_cell_kernel():
    m = SparsePathMatrix.full(1)
    assert sp_krdtw([0.2], [-0.1], m, 2.0).value == pytest.approx(math.log(2 * math.exp(-2.0 * 0.09)), abs=1e-15)


@settings(max_examples=150, deadline=None)
@given(st.integers(1, 5), st.floats(0.05, 0.95), st.integers(0, 2**31 - 1))
def test_restricted_sums_match_enumeration(T, density, seed):
    rng = np.random.default_rng(seed)
    m = _random_spm(rng, T, density, weights=True)
    cells = set(zip(m.rows.tolist(), m.cols.tolist()))
    x, y = rng.integers(-3, 4, size=(2, T)).astype(float)
    w = m.to_dense()
    assert sp_dtw(x, y, m).value == pytest.approx(dtw_brute(list(x), list(y), "sq", cells, w), rel=1e-12)
    k1, k2 = krdtw_brute(list(x), list(y), 0.4, cells)
    assert sp_krdtw(x, y, m, 0.4).value == pytest.approx(math.log(k1 + k2), rel=1e-9, abs=1e-12)


@settings(max_examples=100, deadline=None)
@given(st.integers(2, 30), st.floats(0.05, 0.6), st.integers(0, 2**31 - 1))
def test_dominance_with_unit_weights(T, density, seed):
    rng = np.random.default_rng(seed)
    m = _random_spm(rng, T, density)
    x, y = rng.normal(size=(2, T))
    assert sp_dtw(x, y, m).value >= dtw(x, y).value
    assert sp_dtw(x, y, m).visited == len(m) <= T * T


@settings(max_examples=100, deadline=None)
@given(st.integers(2, 30), st.floats(0.05, 0.6), st.integers(0, 2**31 - 1))
def test_symmetric_matrix_gives_symmetric_measures(T, density, seed):
    rng = np.random.default_rng(seed)
    m = _random_spm(rng, T, density, symmetric=True, weights=True)
    x, y = rng.normal(size=(2, T))
    assert sp_dtw(x, y, m).value == sp_dtw(y, x, m).value
    assert sp_krdtw(x, y, m, 0.7).value == pytest.approx(sp_krdtw(y, x, m, 0.7).value, rel=1e-9)


def test_unreachable_raw_matrix():
    m = SparsePathMatrix([0, 2], [0, 2], [1.0, 1.0], 3)
    r = sp_dtw([0.0, 1.0, 2.0], [1.0, 1.0, 1.0], m)
    assert not r.reachable and r.value == SENTINEL
    k = sp_krdtw([0.0, 1.0, 2.0], [1.0, 1.0, 1.0], m)
    assert not k.reachable and k.value == -math.inf


def test_missing_first_row_cell_reads_sentinel():
    # (0,1) removed: (0,2) has no finite predecessor, (1,2) must come from (1,1)
    mask = np.ones((3, 3), dtype=bool)
    mask[0, 1] = False
    m = SparsePathMatrix.from_mask(mask)
    x, y = np.array([0.0, 1.0, 3.0]), np.array([2.0, -1.0, 0.5])
    cells = set(zip(*np.nonzero(mask)))
    assert sp_dtw(x, y, m).value == dtw_brute(list(x), list(y), "sq", cells)


def test_length_checks():
    m = SparsePathMatrix.full(3)
    with pytest.raises(DimensionError):
        sp_dtw([1.0, 2.0], [1.0, 2.0], m)
    with pytest.raises(DimensionError):
        sp_krdtw([1.0, 2.0, 3.0], [1.0, 2.0], m)
    with pytest.raises(ParameterError):
        sp_krdtw([1.0, 2.0, 3.0], [1.0, 2.0, 3.0], m, nu=-1)


@pytest.mark.parametrize("symmetric", [True, False])
def test_sparse_kernel_gram_positive_definite(symmetric, rng):
    X = rng.normal(size=(30, 20))
    for _ in range(3):
        m = _random_spm(rng, 20, 0.3, symmetric=symmetric)
        L, _ = pairwise_sp_krdtw(X, None, m, 0.5)
        if not symmetric:
            L = 0.5 * (L + L.T)
        d = np.diag(L)
        K = np.exp(L - 0.5 * (d[:, None] + d[None, :]))
        eig = np.linalg.eigvalsh(K)
        assert eig[0] >= -1e-8 * eig[-1]


def test_pairwise_matches_single(gunpoint):
    train = gunpoint[0]
    m = learn_path_matrix(train, theta=10, gamma=0.5)
    A, B = train.X[:4], train.X[10:13]
    D, visited = pairwise_sp_dtw(A, B, m)
    assert visited == len(m)
    np.testing.assert_array_equal(D, [[sp_dtw(a, b, m).value for b in B] for a in A])
    S, _ = pairwise_sp_dtw(A, None, m)
    np.testing.assert_array_equal(S, [[sp_dtw(a, b, m).value for b in A] for a in A])
    L, _ = pairwise_sp_krdtw(A, B, m, 0.3)
    np.testing.assert_array_equal(L, [[sp_krdtw(a, b, m, 0.3).value for b in B] for a in A])
