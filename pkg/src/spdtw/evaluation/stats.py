"""Wilcoxon signed-rank test and speed-up arithmetic."""

from __future__ import annotations

import math

import numpy as np
from scipy.stats import norm, rankdata

from ..errors import InsufficientDataError, ParameterError

__all__ = ["wilcoxon_signed_rank", "speedup", "EXACT_MAX_N"]

EXACT_MAX_N = 25


def speedup(visited, T) -> float:
    """Percentage of the ``T x T`` grid left unvisited: ``100 * (1 - visited / T**2)``."""
    total = T * T
    if not 0 <= visited <= total:
        raise ParameterError(f"visited cells must lie in [0, {total}], got {visited}")
    return 100.0 * (1.0 - visited / total)


def _exact_p(doubled_ranks: np.ndarray, w2: int) -> float:
    # Null distribution of twice the positive rank sum: each rank enters
    # with probability 1/2. Doubling keeps average ranks integral.
    total = int(doubled_ranks.sum())
    dist = np.zeros(total + 1)
    dist[0] = 1.0
    for r in doubled_ranks:
        r = int(r)
        dist[r:] = dist[r:] + dist[: total + 1 - r]
    dist /= dist.sum()
    lower = dist[: w2 + 1].sum()
    upper = dist[w2:].sum()
    return min(1.0, 2.0 * min(lower, upper))


def wilcoxon_signed_rank(a, b, decimals: int = 12) -> float:
    """Two-sided p-value of the Wilcoxon signed-rank test on ``a - b``.

    Zero differences are dropped and tied magnitudes share their average
    rank. With at most :data:`EXACT_MAX_N` non-zero differences the exact
    null distribution is used, otherwise the normal approximation with
    continuity and tie correction.

    Parameters
    ----------
    a, b : array_like
        Paired observations, at least five pairs.
    decimals : int
        Differences are rounded to this many decimals before ranking, so
        that values such as ``0.3 - 0.1`` and ``0.2`` count as ties.

    Returns
    -------
    float
        The p-value; 1 when every difference is zero.
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape or a.ndim != 1:
        raise ParameterError("paired samples must be 1-D of equal length")
    if a.size < 5:
        raise InsufficientDataError("the signed-rank test needs at least five pairs")
    d = np.round(a - b, decimals)
    d = d[d != 0]
    n = d.size
    if n == 0:
        return 1.0
    ranks = rankdata(np.abs(d))
    w_plus = float(ranks[d > 0].sum())
    if n <= EXACT_MAX_N:
        return _exact_p(np.rint(2 * ranks).astype(np.int64), int(round(2 * w_plus)))
    mean = n * (n + 1) / 4.0
    _, counts = np.unique(np.abs(d), return_counts=True)
    var = n * (n + 1) * (2 * n + 1) / 24.0 - float(np.sum(counts**3 - counts)) / 48.0
    if var <= 0:
        return 1.0
    z = (abs(w_plus - mean) - 0.5) / math.sqrt(var)
    return min(1.0, 2.0 * float(norm.sf(max(z, 0.0))))
