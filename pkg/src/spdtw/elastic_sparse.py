"""DTW and the ``K_rdtw`` kernel restricted to a learned sparse path matrix.

Both measures stream the row-major entries of a :class:`SparsePathMatrix`
once and keep two row buffers, so memory is ``O(T)`` and time is
``O(T + L)`` for ``L`` entries. Cells that are absent from the matrix read
as unreachable: the largest finite float for DTW, zero for the kernel.
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np
from numba import njit, prange

from .elastic_dense import _kappa, _phi, cost_code
from .errors import DimensionError, ParameterError
from .path_sparsifier import SparsePathMatrix

__all__ = ["SENTINEL", "SparseEvalResult", "sp_dtw", "sp_krdtw", "pairwise_sp_dtw", "pairwise_sp_krdtw"]

SENTINEL = float(np.finfo(np.float64).max)


class SparseEvalResult(NamedTuple):
    value: float
    visited: int
    reachable: bool


@njit(cache=True)
def _sp_dtw(x, y, row_ptr, cols, weights, kind):
    T = x.shape[0]
    big = np.finfo(np.float64).max
    prev = np.full(T, big)
    cur = np.full(T, big)
    for k in range(row_ptr[0], row_ptr[1]):
        j = cols[k]
        c = _phi(x[0], y[j], kind) * weights[k]
        if j == 0:
            cur[0] = c
        else:
            v = c + cur[j - 1]
            cur[j] = v if v < big else big
    for i in range(1, T):
        prev, cur = cur, prev
        if i >= 2:
            # cur still holds row i - 2
            for k in range(row_ptr[i - 2], row_ptr[i - 1]):
                cur[cols[k]] = big
        xi = x[i]
        for k in range(row_ptr[i], row_ptr[i + 1]):
            j = cols[k]
            best = prev[j]
            if j > 0:
                best = min(best, min(prev[j - 1], cur[j - 1]))
            v = _phi(xi, y[j], kind) * weights[k] + best
            cur[j] = v if v < big else big
    return cur[T - 1]


@njit(cache=True)
def _sp_krdtw(x, y, row_ptr, cols, nu):
    # Same arithmetic as the dense banded recursion, so a full matrix
    # reproduces it bit for bit.
    T = x.shape[0]
    third = 1.0 / 3.0
    p1 = np.zeros(T)
    p2 = np.zeros(T)
    c1 = np.zeros(T)
    c2 = np.zeros(T)
    kdiag = np.empty(T)
    for t in range(T):
        kdiag[t] = _kappa(x[t], y[t], nu)
    log_scale = 0.0
    for i in range(T):
        start = row_ptr[i]
        stop = row_ptr[i + 1]
        kii = kdiag[i]
        row_max = 0.0
        for k in range(start, stop):
            j = cols[k]
            kk = _kappa(x[i], y[j], nu)
            kjj = kdiag[j]
            if i == 0 and j == 0:
                v1 = kk
                v2 = kk
            elif j == 0:
                v1 = third * p1[0] * kk
                v2 = third * p2[0] * kii
            elif i == 0:
                v1 = third * c1[j - 1] * kk
                v2 = third * c2[j - 1] * kjj
            else:
                v1 = third * kk * (p1[j - 1] + p1[j] + c1[j - 1])
                v2 = third * (
                    0.5 * (kii + kjj) * p2[j - 1] + p2[j] * kii + c2[j - 1] * kjj
                )
            c1[j] = v1
            c2[j] = v2
            if v1 > row_max:
                row_max = v1
            if v2 > row_max:
                row_max = v2
        if row_max > 0.0:
            inv = 1.0 / row_max
            for k in range(start, stop):
                c1[cols[k]] *= inv
                c2[cols[k]] *= inv
            log_scale += np.log(row_max)
        if i > 0:
            for k in range(row_ptr[i - 1], start):
                p1[cols[k]] = 0.0
                p2[cols[k]] = 0.0
        p1, c1 = c1, p1
        p2, c2 = c2, p2
    total = p1[T - 1] + p2[T - 1]
    if total <= 0.0:
        return -np.inf
    return np.log(total) + log_scale


def _check(x, y, m: SparsePathMatrix):
    x = np.ascontiguousarray(np.asarray(x, dtype=np.float64))
    y = np.ascontiguousarray(np.asarray(y, dtype=np.float64))
    if x.ndim != 1 or y.ndim != 1:
        raise DimensionError("series must be 1-D")
    if x.size != m.T or y.size != m.T:
        raise DimensionError(
            f"series lengths {x.size}, {y.size} do not match the {m.T}x{m.T} path matrix"
        )
    return x, y


def sp_dtw(x, y, m: SparsePathMatrix, cost="sq") -> SparseEvalResult:
    """DTW over the cells of ``m`` with local costs scaled by the cell weights.

    Parameters
    ----------
    x, y : array_like
        Series of length ``m.T``.
    m : SparsePathMatrix
    cost : {'sq', 'abs'}

    Returns
    -------
    SparseEvalResult
        ``reachable`` is False when no path of ``m`` joins the corners, in
        which case ``value`` equals :data:`SENTINEL`.
    """
    x, y = _check(x, y, m)
    v = float(_sp_dtw(x, y, m.row_ptr, m.cols, m.weights, cost_code(cost)))
    return SparseEvalResult(v, len(m), v < SENTINEL)


def sp_krdtw(x, y, m: SparsePathMatrix, nu: float = 1.0) -> SparseEvalResult:
    """Log of the ``K_rdtw`` kernel summed over the paths inside ``m``.

    Weights of ``m`` are ignored so the kernel stays positive definite.
    """
    if not nu > 0:
        raise ParameterError(f"kernel bandwidth nu must be positive, got {nu}")
    x, y = _check(x, y, m)
    v = float(_sp_krdtw(x, y, m.row_ptr, m.cols, float(nu)))
    return SparseEvalResult(v, len(m), v > -np.inf)


@njit(cache=True, parallel=True)
def _pairwise_sp_dtw(A, B, row_ptr, cols, weights, kind, symmetric):
    out = np.empty((A.shape[0], B.shape[0]))
    for i in prange(A.shape[0]):
        for j in range(i if symmetric else 0, B.shape[0]):
            out[i, j] = _sp_dtw(A[i], B[j], row_ptr, cols, weights, kind)
            if symmetric:
                out[j, i] = out[i, j]
    return out


@njit(cache=True, parallel=True)
def _pairwise_sp_krdtw(A, B, row_ptr, cols, nu, symmetric):
    out = np.empty((A.shape[0], B.shape[0]))
    for i in prange(A.shape[0]):
        for j in range(i if symmetric else 0, B.shape[0]):
            out[i, j] = _sp_krdtw(A[i], B[j], row_ptr, cols, nu)
            if symmetric:
                out[j, i] = out[i, j]
    return out


def _batch(A, B, m):
    A = np.ascontiguousarray(np.asarray(A, dtype=np.float64))
    symmetric = B is None and m.is_symmetric()
    B = A if B is None else np.ascontiguousarray(np.asarray(B, dtype=np.float64))
    if A.ndim != 2 or B.ndim != 2 or A.shape[1] != m.T or B.shape[1] != m.T:
        raise DimensionError(f"expected (N, {m.T}) arrays")
    return A, B, symmetric


def pairwise_sp_dtw(A, B, m: SparsePathMatrix, cost="sq"):
    """SP-DTW matrix between the rows of ``A`` and ``B`` (``B=None``: ``A`` vs ``A``).

    Returns the matrix and the visited-cell count per comparison.
    """
    A, B, sym = _batch(A, B, m)
    out = _pairwise_sp_dtw(A, B, m.row_ptr, m.cols, m.weights, cost_code(cost), sym)
    return out, len(m)


def pairwise_sp_krdtw(A, B, m: SparsePathMatrix, nu: float = 1.0):
    """Log SP-K_rdtw matrix between the rows of ``A`` and ``B``."""
    if not nu > 0:
        raise ParameterError(f"kernel bandwidth nu must be positive, got {nu}")
    A, B, sym = _batch(A, B, m)
    return _pairwise_sp_krdtw(A, B, m.row_ptr, m.cols, float(nu), sym), len(m)
