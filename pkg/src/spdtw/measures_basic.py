"""Lock-step measures: Euclidean, Minkowski, Pearson correlation and DACO.

All sums run over ascending time index, so results are bit-reproducible and
symmetric in the two arguments.
"""

import math

import numpy as np

from .errors import DegenerateSeriesError, DimensionError, ParameterError

__all__ = [
    "euclidean",
    "minkowski",
    "corr",
    "autocorr",
    "autocorr_features",
    "daco",
    "daco_lag_grid",
    "pairwise_euclidean",
    "pairwise_corr",
    "pairwise_daco",
]


def _pair(x, y):
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.ndim != 1 or y.ndim != 1 or x.shape != y.shape:
        raise DimensionError(f"series lengths differ: {x.shape} vs {y.shape}")
    return x, y


def euclidean(x, y) -> float:
    """Euclidean (L2) distance between two equal-length series."""
    x, y = _pair(x, y)
    d = x - y
    return math.sqrt(float(np.sum(d * d)))


def minkowski(x, y, p: float = 2.0) -> float:
    """Minkowski distance of order ``p``; ``p=np.inf`` gives the max-norm.

    Raises
    ------
    ParameterError
        If ``p < 1``.
    """
    if not (p >= 1.0):
        raise ParameterError(f"Minkowski order must be >= 1, got {p}")
    x, y = _pair(x, y)
    d = np.abs(x - y)
    if math.isinf(p):
        return float(d.max())
    if p == 2.0:
        return math.sqrt(float(np.sum(d * d)))
    if p == 1.0:
        return float(np.sum(d))
    return float(np.sum(d**p)) ** (1.0 / p)


def _centered(x):
    c = x - x.mean()
    ss = float(np.sum(c * c))
    if ss == 0.0:
        raise DegenerateSeriesError("series is constant")
    return c, ss


def corr(x, y) -> float:
    """Pearson correlation coefficient, a similarity in ``[-1, 1]``.

    Raises
    ------
    DegenerateSeriesError
        If either series is constant.
    """
    x, y = _pair(x, y)
    cx, sx = _centered(x)
    cy, sy = _centered(y)
    r = float(np.sum(cx * cy)) / (math.sqrt(sx) * math.sqrt(sy))
    return min(1.0, max(-1.0, r))


def autocorr(x, tau: int) -> float:
    """Lag-``tau`` autocorrelation, normalised by the full centred energy."""
    x = np.asarray(x, dtype=np.float64)
    T = x.size
    if not (1 <= tau <= T - 1):
        raise ParameterError(f"lag must lie in [1, {T - 1}], got {tau}")
    c, ss = _centered(x)
    return float(np.sum(c[: T - tau] * c[tau:])) / ss


def autocorr_features(x, k: int) -> np.ndarray:
    """Vector ``(rho_1(x), ..., rho_k(x))``."""
    x = np.asarray(x, dtype=np.float64)
    T = x.size
    if not (1 <= k <= T - 1):
        raise ParameterError(f"DACO lag count must lie in [1, {T - 1}], got {k}")
    c, ss = _centered(x)
    return np.array([np.sum(c[: T - tau] * c[tau:]) for tau in range(1, k + 1)]) / ss


def daco(x, y, k: int) -> float:
    """Squared distance between the first ``k`` autocorrelation coefficients."""
    x, y = _pair(x, y)
    d = autocorr_features(x, k) - autocorr_features(y, k)
    return float(np.sum(d * d))


def daco_lag_grid(T: int) -> list:
    """Candidate lag counts ``{1, ceil(T/8), ceil(T/4), ceil(T/2), T-1}``."""
    grid = {1, math.ceil(T / 8), math.ceil(T / 4), math.ceil(T / 2), T - 1}
    return sorted(k for k in grid if 1 <= k <= T - 1)


# Batched forms used by the classifiers. Rows index the first argument.


def pairwise_euclidean(A, B) -> np.ndarray:
    A = np.asarray(A, dtype=np.float64)
    B = np.asarray(B, dtype=np.float64)
    if A.shape[1] != B.shape[1]:
        raise DimensionError("series lengths differ")
    out = np.empty((A.shape[0], B.shape[0]))
    for i, a in enumerate(A):
        d = B - a
        out[i] = np.sqrt(np.sum(d * d, axis=1))
    return out


def pairwise_corr(A, B) -> np.ndarray:
    A = np.asarray(A, dtype=np.float64)
    B = np.asarray(B, dtype=np.float64)
    if A.shape[1] != B.shape[1]:
        raise DimensionError("series lengths differ")
    cA = A - A.mean(axis=1, keepdims=True)
    cB = B - B.mean(axis=1, keepdims=True)
    nA = np.sqrt(np.sum(cA * cA, axis=1))
    nB = np.sqrt(np.sum(cB * cB, axis=1))
    if np.any(nA == 0) or np.any(nB == 0):
        raise DegenerateSeriesError("constant series in correlation input")
    out = np.empty((A.shape[0], B.shape[0]))
    for i, a in enumerate(cA):
        out[i] = np.sum(cB * a, axis=1) / (nA[i] * nB)
    return np.clip(out, -1.0, 1.0)


def pairwise_daco(A, B, k: int) -> np.ndarray:
    FA = np.array([autocorr_features(a, k) for a in np.asarray(A, dtype=np.float64)])
    FB = np.array([autocorr_features(b, k) for b in np.asarray(B, dtype=np.float64)])
    out = np.empty((FA.shape[0], FB.shape[0]))
    for i, f in enumerate(FA):
        d = FB - f
        out[i] = np.sum(d * d, axis=1)
    return out
