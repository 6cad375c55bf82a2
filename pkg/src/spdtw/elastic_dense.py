"""Full-grid and Sakoe-Chiba banded elastic measures.

DTW is computed by the usual dynamic program over the ``Tx x Ty`` grid. The
``K_rdtw`` kernel follows the two-table recursion (``K1`` sums over alignment
paths, ``K2`` is the diagonal-marginal term) and is evaluated in the log
domain: after each row the two tables are divided by the row maximum and the
logarithm of that factor is accumulated, which keeps long series from
underflowing.

Indices in returned paths are 0-based.
"""

from typing import NamedTuple

import numpy as np
from numba import njit, prange

from .errors import DimensionError, ParameterError

__all__ = [
    "COSTS",
    "cost_code",
    "band_radius",
    "band_cell_count",
    "DtwResult",
    "ElasticResult",
    "dtw",
    "dtw_sc",
    "dtw_cost_matrix",
    "local_kernel",
    "krdtw",
    "krdtw_terms",
    "krdtw_sc",
    "pairwise_dtw",
    "pairwise_krdtw",
]

SQUARED = 0
ABSOLUTE = 1

COSTS = {
    "sq": SQUARED,
    "squared_difference": SQUARED,
    "abs": ABSOLUTE,
    "absolute_difference": ABSOLUTE,
}


def cost_code(cost) -> int:
    if isinstance(cost, (int, np.integer)) and cost in (SQUARED, ABSOLUTE):
        return int(cost)
    try:
        return COSTS[cost]
    except KeyError:
        raise ParameterError(f"unknown local cost {cost!r}; use 'sq' or 'abs'") from None


def band_radius(pct: int, T: int) -> int:
    """Corridor radius ``floor(pct * T / 100)``, capped at ``T - 1``."""
    if not (0 <= pct <= 100) or int(pct) != pct:
        raise ParameterError(f"band percentage must be an integer in [0, 100], got {pct}")
    return min(int(pct) * T // 100, T - 1)


def band_cell_count(T: int, r: int) -> int:
    """Number of cells with ``|t - t'| <= r`` in a ``T x T`` grid."""
    r = min(r, T - 1)
    return T * (2 * r + 1) - r * (r + 1)


class DtwResult(NamedTuple):
    value: float
    path: np.ndarray
    visited: int


class ElasticResult(NamedTuple):
    value: float
    visited: int


@njit(cache=True, inline="always")
def _phi(a, b, kind):
    d = a - b
    if kind == 0:
        return d * d
    return abs(d)


@njit(cache=True)
def _dtw_full(x, y, kind):
    n, m = x.shape[0], y.shape[0]
    D = np.empty((n, m))
    D[0, 0] = _phi(x[0], y[0], kind)
    for j in range(1, m):
        D[0, j] = D[0, j - 1] + _phi(x[0], y[j], kind)
    for i in range(1, n):
        D[i, 0] = D[i - 1, 0] + _phi(x[i], y[0], kind)
        for j in range(1, m):
            best = D[i - 1, j - 1]
            if D[i - 1, j] < best:
                best = D[i - 1, j]
            if D[i, j - 1] < best:
                best = D[i, j - 1]
            D[i, j] = _phi(x[i], y[j], kind) + best
    return D


@njit(cache=True)
def _backtrack(D):
    n, m = D.shape
    path = np.empty((n + m - 1, 2), dtype=np.int64)
    i, j = n - 1, m - 1
    k = 0
    path[k, 0] = i
    path[k, 1] = j
    while i > 0 or j > 0:
        if i == 0:
            j -= 1
        elif j == 0:
            i -= 1
        else:
            # preference on ties: diagonal, then (i-1, j), then (i, j-1)
            diag = D[i - 1, j - 1]
            up = D[i - 1, j]
            left = D[i, j - 1]
            if diag <= up and diag <= left:
                i -= 1
                j -= 1
            elif up <= left:
                i -= 1
            else:
                j -= 1
        k += 1
        path[k, 0] = i
        path[k, 1] = j
    return path[: k + 1][::-1].copy()


@njit(cache=True)
def _dtw_band(x, y, kind, r):
    """DTW value on ``|i - j| <= r`` (``r < 0``: whole grid) with two row buffers."""
    n, m = x.shape[0], y.shape[0]
    inf = np.inf
    prev = np.full(m, inf)
    cur = np.full(m, inf)
    visited = 0
    for i in range(n):
        if r < 0:
            lo, hi = 0, m - 1
        else:
            lo = max(0, i - r)
            hi = min(m - 1, i + r)
        if lo > 0:
            cur[lo - 1] = inf
        for j in range(lo, hi + 1):
            c = _phi(x[i], y[j], kind)
            if i == 0 and j == 0:
                cur[j] = c
                continue
            best = inf
            if i > 0 and j > 0:
                best = prev[j - 1]
            if i > 0 and prev[j] < best:
                best = prev[j]
            if j > 0 and cur[j - 1] < best:
                best = cur[j - 1]
            cur[j] = c + best
        visited += hi - lo + 1
        prev, cur = cur, prev
    return prev[m - 1], visited


@njit(cache=True, inline="always")
def _kappa(a, b, nu):
    d = a - b
    return np.exp(-nu * d * d)


@njit(cache=True)
def _krdtw_band_terms(x, y, nu, r):
    """Rescaled ``K1(T, T)``, ``K2(T, T)`` and the log of the common scale factor."""
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
    visited = 0
    for i in range(T):
        if r < 0:
            lo, hi = 0, T - 1
        else:
            lo = max(0, i - r)
            hi = min(T - 1, i + r)
        if lo > 0:
            c1[lo - 1] = 0.0
            c2[lo - 1] = 0.0
        kii = kdiag[i]
        row_max = 0.0
        for j in range(lo, hi + 1):
            k = _kappa(x[i], y[j], nu)
            kjj = kdiag[j]
            if i == 0 and j == 0:
                v1 = k
                v2 = k
            elif j == 0:
                v1 = third * p1[0] * k
                v2 = third * p2[0] * kii
            elif i == 0:
                v1 = third * c1[j - 1] * k
                v2 = third * c2[j - 1] * kjj
            else:
                v1 = third * k * (p1[j - 1] + p1[j] + c1[j - 1])
                v2 = third * (
                    0.5 * (kii + kjj) * p2[j - 1] + p2[j] * kii + c2[j - 1] * kjj
                )
            c1[j] = v1
            c2[j] = v2
            if v1 > row_max:
                row_max = v1
            if v2 > row_max:
                row_max = v2
        visited += hi - lo + 1
        if row_max > 0.0:
            inv = 1.0 / row_max
            for j in range(lo, hi + 1):
                c1[j] *= inv
                c2[j] *= inv
            log_scale += np.log(row_max)
        p1, c1 = c1, p1
        p2, c2 = c2, p2
    return p1[T - 1], p2[T - 1], log_scale, visited


@njit(cache=True)
def _krdtw_band(x, y, nu, r):
    """Log of ``K1(T, T) + K2(T, T)`` on ``|i - j| <= r`` (``r < 0``: whole grid)."""
    k1, k2, log_scale, visited = _krdtw_band_terms(x, y, nu, r)
    total = k1 + k2
    if total <= 0.0:
        return -np.inf, visited
    return np.log(total) + log_scale, visited


def _series(x, name="x"):
    x = np.ascontiguousarray(np.asarray(x, dtype=np.float64))
    if x.ndim != 1 or x.size == 0:
        raise DimensionError(f"{name} must be a non-empty 1-D series")
    return x


def _square_pair(x, y):
    x, y = _series(x), _series(y, "y")
    if x.size != y.size:
        raise DimensionError(f"series lengths differ: {x.size} vs {y.size}")
    return x, y


def dtw_cost_matrix(x, y, cost="sq") -> np.ndarray:
    """Accumulated cost matrix ``D`` of DTW."""
    return _dtw_full(_series(x), _series(y, "y"), cost_code(cost))


def dtw(x, y, cost="sq") -> DtwResult:
    """Dynamic time warping with one optimal alignment path.

    Parameters
    ----------
    x, y : array_like
        Non-empty 1-D series; lengths may differ.
    cost : {'sq', 'abs'}
        Local divergence: squared or absolute difference.

    Returns
    -------
    DtwResult
        ``value`` is the minimal summed cost, ``path`` an ``(m, 2)`` array of
        0-based index pairs attaining it (ties resolved diagonal first, then
        advancing ``x`` alone, then ``y`` alone) and ``visited`` is
        ``len(x) * len(y)``.

    Examples
    --------
    >>> dtw([0.0], [1.0, 2.0], cost="abs").value
    3.0
    """
    x, y = _series(x), _series(y, "y")
    D = _dtw_full(x, y, cost_code(cost))
    return DtwResult(float(D[-1, -1]), _backtrack(D), x.size * y.size)


def dtw_sc(x, y, cost="sq", band_pct: int = 10) -> ElasticResult:
    """DTW restricted to the Sakoe-Chiba corridor ``|t - t'| <= floor(pct*T/100)``."""
    x, y = _square_pair(x, y)
    r = band_radius(band_pct, x.size)
    value, visited = _dtw_band(x, y, cost_code(cost), r)
    return ElasticResult(float(value), int(visited))


def local_kernel(a, b, nu: float):
    """Gaussian local kernel ``exp(-nu * (a - b)**2)``."""
    if not nu > 0:
        raise ParameterError(f"kernel bandwidth nu must be positive, got {nu}")
    d = np.asarray(a, dtype=np.float64) - np.asarray(b, dtype=np.float64)
    out = np.exp(-nu * d * d)
    return float(out) if out.ndim == 0 else out


def krdtw(x, y, nu: float = 1.0) -> ElasticResult:
    """Logarithm of the ``K_rdtw`` kernel over all admissible alignments.

    ``value`` is ``log(K1(T, T) + K2(T, T))``; use ``np.exp`` only for short
    series, the raw kernel underflows quickly as ``T`` grows.
    """
    if not nu > 0:
        raise ParameterError(f"kernel bandwidth nu must be positive, got {nu}")
    x, y = _square_pair(x, y)
    value, visited = _krdtw_band(x, y, float(nu), -1)
    return ElasticResult(float(value), int(visited))


def krdtw_terms(x, y, nu: float = 1.0) -> tuple:
    """``(log K1(T, T), log K2(T, T))``, the two parts summed by :func:`krdtw`."""
    if not nu > 0:
        raise ParameterError(f"kernel bandwidth nu must be positive, got {nu}")
    x, y = _square_pair(x, y)
    k1, k2, log_scale, _ = _krdtw_band_terms(x, y, float(nu), -1)
    with np.errstate(divide="ignore"):
        return float(np.log(k1) + log_scale), float(np.log(k2) + log_scale)


def krdtw_sc(x, y, nu: float = 1.0, band_pct: int = 10) -> ElasticResult:
    """``krdtw`` restricted to the Sakoe-Chiba corridor; cells outside count as zero."""
    if not nu > 0:
        raise ParameterError(f"kernel bandwidth nu must be positive, got {nu}")
    x, y = _square_pair(x, y)
    r = band_radius(band_pct, x.size)
    value, visited = _krdtw_band(x, y, float(nu), r)
    return ElasticResult(float(value), int(visited))


@njit(cache=True, parallel=True)
def _pairwise_dtw(A, B, kind, r, symmetric):
    na, nb = A.shape[0], B.shape[0]
    out = np.zeros((na, nb))
    for i in prange(na):
        start = i + 1 if symmetric else 0
        for j in range(start, nb):
            out[i, j] = _dtw_band(A[i], B[j], kind, r)[0]
    return out


@njit(cache=True, parallel=True)
def _pairwise_krdtw(A, B, nu, r, symmetric):
    na, nb = A.shape[0], B.shape[0]
    out = np.zeros((na, nb))
    for i in prange(na):
        start = i if symmetric else 0
        for j in range(start, nb):
            out[i, j] = _krdtw_band(A[i], B[j], nu, r)[0]
    return out


def _batch(A, B):
    A = np.ascontiguousarray(np.asarray(A, dtype=np.float64))
    symmetric = B is None
    B = A if symmetric else np.ascontiguousarray(np.asarray(B, dtype=np.float64))
    if A.ndim != 2 or B.ndim != 2 or A.shape[1] != B.shape[1]:
        raise DimensionError("batched inputs must be (N, T) arrays of equal T")
    return A, B, symmetric


def pairwise_dtw(A, B=None, cost="sq", band_pct=None):
    """DTW (or banded DTW) between every row of ``A`` and every row of ``B``.

    With ``B=None`` the symmetric ``A`` vs ``A`` matrix is computed from its
    upper triangle. Returns ``(matrix, visited_per_pair)``.
    """
    A, B, symmetric = _batch(A, B)
    T = A.shape[1]
    r = -1 if band_pct is None else band_radius(band_pct, T)
    out = _pairwise_dtw(A, B, cost_code(cost), r, symmetric)
    if symmetric:
        out = out + out.T
    visited = T * T if r < 0 else band_cell_count(T, r)
    return out, visited


def pairwise_krdtw(A, B=None, nu=1.0, band_pct=None):
    """Log ``K_rdtw`` between rows of ``A`` and ``B``; see :func:`pairwise_dtw`."""
    if not nu > 0:
        raise ParameterError(f"kernel bandwidth nu must be positive, got {nu}")
    A, B, symmetric = _batch(A, B)
    T = A.shape[1]
    r = -1 if band_pct is None else band_radius(band_pct, T)
    out = _pairwise_krdtw(A, B, float(nu), r, symmetric)
    if symmetric:
        out = np.triu(out) + np.triu(out, 1).T
    visited = T * T if r < 0 else band_cell_count(T, r)
    return out, visited
