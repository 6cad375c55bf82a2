"""Learning a sparse alignment search space from training alignments.

Pipeline: align every training pair with DTW and count how often each grid
cell lies on the optimal path (:func:`accumulate_paths`), turn counts into
occupancy frequencies (:func:`normalize_grid`), drop cells whose count does
not exceed a threshold and weight the survivors by ``p ** -gamma``
(:func:`sparsify`). The result is a :class:`SparsePathMatrix`, a row-major
sorted coordinate list that the sparse measures iterate over.

Text format of a path matrix (indices 1-based)::

    SPM v1 T=<T> theta=<theta> gamma=<gamma> [source=<name>]
    <row> <col> <weight>
    ...
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from numba import njit

from .elastic_dense import _backtrack, _dtw_full, cost_code
from .errors import (
    DimensionError,
    EmptyGridError,
    FormatError,
    InsufficientDataError,
    OverThresholdError,
    ParameterError,
)

__all__ = [
    "SparsePathMatrix",
    "accumulate_paths",
    "normalize_grid",
    "sparsify",
    "ensure_connectivity",
    "learn_path_matrix",
    "read_spm",
    "write_spm",
    "is_reachable",
]


@njit(cache=True)
def _reachable(row_ptr, cols, T):
    prev = np.zeros(T, dtype=np.bool_)
    cur = np.zeros(T, dtype=np.bool_)
    for i in range(T):
        for k in range(row_ptr[i], row_ptr[i + 1]):
            j = cols[k]
            if i == 0 and j == 0:
                ok = True
            else:
                ok = False
                if i > 0 and prev[j]:
                    ok = True
                elif i > 0 and j > 0 and prev[j - 1]:
                    ok = True
                elif j > 0 and cur[j - 1]:
                    ok = True
            cur[j] = ok
        if i > 0:
            for k in range(row_ptr[i - 1], row_ptr[i]):
                prev[cols[k]] = False
        prev, cur = cur, prev
    return prev[T - 1]


@dataclass(frozen=True)
class SparsePathMatrix:
    """Row-major sorted list of admissible grid cells with positive weights.

    Indices are 0-based in memory and 1-based in the text format.
    """

    rows: np.ndarray
    cols: np.ndarray
    weights: np.ndarray
    T: int
    theta: float = 0
    gamma: float = 0.0
    source: str = ""
    row_ptr: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        rows = np.ascontiguousarray(self.rows, dtype=np.int64)
        cols = np.ascontiguousarray(self.cols, dtype=np.int64)
        weights = np.ascontiguousarray(self.weights, dtype=np.float64)
        T = int(self.T)
        if T < 1:
            raise DimensionError("grid size must be positive")
        if not (rows.ndim == cols.ndim == weights.ndim == 1) or not (
            rows.size == cols.size == weights.size
        ):
            raise DimensionError("rows, cols and weights must be 1-D of equal length")
        if rows.size:
            if rows.min() < 0 or cols.min() < 0 or rows.max() >= T or cols.max() >= T:
                raise DimensionError(f"entry outside the {T}x{T} grid")
            key = rows * T + cols
            if np.any(np.diff(key) <= 0):
                raise FormatError("entries must be sorted by row then column, without duplicates")
            if not np.all(np.isfinite(weights)) or np.any(weights <= 0):
                raise FormatError("weights must be positive and finite")
        for arr in (rows, cols, weights):
            arr.setflags(write=False)
        row_ptr = np.zeros(T + 1, dtype=np.int64)
        np.cumsum(np.bincount(rows, minlength=T), out=row_ptr[1:])
        row_ptr.setflags(write=False)
        object.__setattr__(self, "rows", rows)
        object.__setattr__(self, "cols", cols)
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "T", T)
        object.__setattr__(self, "row_ptr", row_ptr)

    def __len__(self):
        return self.rows.size

    def __eq__(self, other):
        if not isinstance(other, SparsePathMatrix):
            return NotImplemented
        return (
            self.T == other.T
            and np.array_equal(self.rows, other.rows)
            and np.array_equal(self.cols, other.cols)
            and np.array_equal(self.weights, other.weights)
        )

    __hash__ = None

    @classmethod
    def from_mask(cls, mask, weights=None, **meta) -> "SparsePathMatrix":
        """Build from a boolean ``T x T`` mask; ``weights`` is a grid or None (all 1)."""
        mask = np.asarray(mask, dtype=bool)
        if mask.ndim != 2 or mask.shape[0] != mask.shape[1]:
            raise DimensionError("mask must be square")
        rows, cols = np.nonzero(mask)  # row-major order
        w = np.ones(rows.size) if weights is None else np.asarray(weights, dtype=np.float64)[rows, cols]
        return cls(rows, cols, w, mask.shape[0], **meta)

    @classmethod
    def full(cls, T: int) -> "SparsePathMatrix":
        return cls.from_mask(np.ones((T, T), dtype=bool))

    @classmethod
    def diagonal(cls, T: int) -> "SparsePathMatrix":
        return cls.from_mask(np.eye(T, dtype=bool))

    @classmethod
    def band(cls, T: int, r: int) -> "SparsePathMatrix":
        idx = np.arange(T)
        return cls.from_mask(np.abs(idx[:, None] - idx[None, :]) <= r)

    @property
    def entries(self) -> list:
        """``(row, col, weight)`` tuples with 1-based indices."""
        return [
            (int(r) + 1, int(c) + 1, float(w))
            for r, c, w in zip(self.rows, self.cols, self.weights)
        ]

    def to_dense(self) -> np.ndarray:
        """Weight grid with zeros outside the admissible cells."""
        out = np.zeros((self.T, self.T))
        out[self.rows, self.cols] = self.weights
        return out

    def mask(self) -> np.ndarray:
        out = np.zeros((self.T, self.T), dtype=bool)
        out[self.rows, self.cols] = True
        return out

    def is_connected(self) -> bool:
        return is_reachable(self)

    def is_symmetric(self) -> bool:
        d = self.to_dense()
        return bool(np.array_equal(d, d.T))

    def with_meta(self, **meta) -> "SparsePathMatrix":
        kw = dict(theta=self.theta, gamma=self.gamma, source=self.source)
        kw.update(meta)
        return SparsePathMatrix(self.rows, self.cols, self.weights, self.T, **kw)


def is_reachable(m: SparsePathMatrix) -> bool:
    """True if a monotone unit-step path joins the two corners inside ``m``."""
    if len(m) == 0:
        return False
    return bool(_reachable(m.row_ptr, m.cols, m.T))


@njit(cache=True)
def _accumulate(X, kind):
    N, T = X.shape
    counts = np.zeros((T, T), dtype=np.int64)
    for i in range(N):
        for j in range(i + 1, N):
            path = _backtrack(_dtw_full(X[i], X[j], kind))
            for k in range(path.shape[0]):
                a = path[k, 0]
                b = path[k, 1]
                counts[a, b] += 1
                counts[b, a] += 1
    return counts


def accumulate_paths(train, cost="sq") -> np.ndarray:
    """Count optimal-path occupancy over all training pairs.

    Each unordered pair ``i < j`` is aligned once; every cell ``(t, t')`` on
    the backtracked path adds one to ``(t, t')`` and one to ``(t', t)``. The
    result is symmetric and both corners equal ``N * (N - 1)``.

    Parameters
    ----------
    train : Dataset or array_like
        ``N >= 2`` equal-length series.
    cost : {'sq', 'abs'}

    Returns
    -------
    numpy.ndarray
        ``T x T`` integer count grid.
    """
    X = np.ascontiguousarray(np.asarray(getattr(train, "X", train), dtype=np.float64))
    if X.ndim != 2:
        raise DimensionError("training data must be an (N, T) array")
    if X.shape[0] < 2:
        raise InsufficientDataError("at least two series are needed to learn a path grid")
    return _accumulate(X, cost_code(cost))


def normalize_grid(counts) -> np.ndarray:
    """Occupancy frequencies ``counts / counts.sum()``."""
    counts = np.asarray(counts)
    total = counts.sum()
    if total <= 0:
        raise EmptyGridError("count grid has no visited cell")
    return counts / float(total)


def sparsify(counts, p=None, theta=0, gamma=0.0, source="") -> SparsePathMatrix:
    """Keep cells visited more than ``theta`` times, weighted by ``p ** -gamma``.

    ``theta`` thresholds the absolute counts, the weights use the frequencies
    normalised over the whole grid. Connectivity is then enforced with
    :func:`ensure_connectivity`.

    Raises
    ------
    OverThresholdError
        If ``theta`` would remove a grid corner. ``max_theta`` on the
        exception holds the largest usable threshold.
    """
    counts = np.asarray(counts)
    if counts.ndim != 2 or counts.shape[0] != counts.shape[1]:
        raise DimensionError("count grid must be square")
    if not theta >= 0 or not gamma >= 0:
        raise ParameterError("theta and gamma must be non-negative")
    if p is None:
        p = normalize_grid(counts)
    p = np.asarray(p, dtype=np.float64)
    if p.shape != counts.shape:
        raise DimensionError("count and frequency grids differ in shape")
    corner = int(min(counts[0, 0], counts[-1, -1]))
    if corner <= theta:
        raise OverThresholdError(
            f"theta={theta} removes the grid corners (maximal admissible theta is {corner - 1})",
            max_theta=corner - 1,
        )
    keep = counts > theta
    rows, cols = np.nonzero(keep)
    w = p[rows, cols] ** (-float(gamma)) if gamma else np.ones(rows.size)
    m = SparsePathMatrix(rows, cols, w, counts.shape[0], theta=theta, gamma=gamma, source=source)
    return ensure_connectivity(m)


def ensure_connectivity(m: SparsePathMatrix) -> SparsePathMatrix:
    """Add the main diagonal when no corner-to-corner path exists in ``m``.

    Inserted diagonal cells take the largest existing weight; cells already
    present keep theirs. A connected matrix is returned unchanged.
    """
    if is_reachable(m):
        return m
    T = m.T
    w_new = float(m.weights.max()) if len(m) else 1.0
    dense = m.to_dense()
    mask = m.mask()
    diag = np.arange(T)
    missing = ~mask[diag, diag]
    dense[diag[missing], diag[missing]] = w_new
    mask[diag, diag] = True
    rows, cols = np.nonzero(mask)
    return SparsePathMatrix(
        rows, cols, dense[rows, cols], T, theta=m.theta, gamma=m.gamma, source=m.source
    )


def learn_path_matrix(train, theta=0, gamma=0.0, cost="sq", counts=None) -> SparsePathMatrix:
    """Convenience wrapper: accumulate, normalise and sparsify in one call."""
    if counts is None:
        counts = accumulate_paths(train, cost)
    return sparsify(counts, normalize_grid(counts), theta, gamma, source=getattr(train, "name", ""))


def _fmt_number(v) -> str:
    v = float(v)
    return str(int(v)) if v.is_integer() else repr(v)


def write_spm(m: SparsePathMatrix, path) -> None:
    header = f"SPM v1 T={m.T} theta={_fmt_number(m.theta)} gamma={_fmt_number(m.gamma)}"
    if m.source:
        header += f" source={m.source}"
    with open(path, "w") as fh:
        fh.write(header + "\n")
        for r, c, w in zip(m.rows, m.cols, m.weights):
            fh.write(f"{r + 1} {c + 1} {w:.17g}\n")


def read_spm(path) -> SparsePathMatrix:
    """Parse a path-matrix file written by :func:`write_spm`."""
    path = Path(path)
    with open(path) as fh:
        lines = [ln.strip() for ln in fh]
    lines = [ln for ln in lines if ln]
    if not lines or not lines[0].startswith("SPM v1"):
        raise FormatError(f"{path}: missing 'SPM v1' header")
    meta = {}
    for token in lines[0].split()[2:]:
        key, _, value = token.partition("=")
        meta[key] = value
    try:
        T = int(meta["T"])
        theta = float(meta.get("theta", 0))
        gamma = float(meta.get("gamma", 0))
    except (KeyError, ValueError):
        raise FormatError(f"{path}: malformed header {lines[0]!r}") from None
    theta = int(theta) if theta.is_integer() else theta
    body = lines[1:]
    rows = np.empty(len(body), dtype=np.int64)
    cols = np.empty(len(body), dtype=np.int64)
    weights = np.empty(len(body))
    for k, line in enumerate(body):
        parts = line.split()
        if len(parts) != 3:
            raise FormatError(f"{path}: line {k + 2} should hold 'row col weight'")
        try:
            rows[k] = int(parts[0]) - 1
            cols[k] = int(parts[1]) - 1
            weights[k] = float(parts[2])
        except ValueError:
            raise FormatError(f"{path}: line {k + 2} is not numeric") from None
    if math.isnan(theta):
        raise FormatError(f"{path}: theta is NaN")
    return SparsePathMatrix(rows, cols, weights, T, theta=theta, gamma=gamma, source=meta.get("source", ""))
