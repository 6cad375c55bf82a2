"""Measure specifications and batched evaluation for the classifiers."""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from .. import elastic_dense as ed
from .. import elastic_sparse as es
from .. import measures_basic as mb
from ..errors import DimensionError, ParameterError
from ..path_sparsifier import SparsePathMatrix, accumulate_paths, normalize_grid, sparsify

__all__ = [
    "KINDS",
    "SIMILARITIES",
    "KERNELS",
    "MeasureSpec",
    "resolve_spec",
    "pairwise_matrix",
    "kernel_gram",
    "nu_scale",
]

KINDS = ("ed", "minkowski", "corr", "daco", "dtw", "dtw_sc", "krdtw", "krdtw_sc", "sp_dtw", "sp_krdtw")
KERNELS = ("krdtw", "krdtw_sc", "sp_krdtw")
SIMILARITIES = ("corr",) + KERNELS


@dataclass(frozen=True)
class MeasureSpec:
    """A measure kind with the hyperparameters it needs.

    ``nu`` is the absolute kernel bandwidth. ``theta`` and ``gamma``
    describe how a sparse path matrix is learned; a ready matrix may be
    supplied through ``spm`` instead.
    """

    kind: str
    cost: str = "sq"
    p: float = 2.0
    k: Optional[int] = None
    band_pct: Optional[int] = None
    nu: Optional[float] = None
    theta: Optional[int] = None
    gamma: Optional[float] = None
    spm: Optional[SparsePathMatrix] = None

    def __post_init__(self):
        kind = self.kind
        if kind not in KINDS:
            raise ParameterError(f"unknown measure {kind!r}; expected one of {', '.join(KINDS)}")
        ed.cost_code(self.cost)
        if kind == "minkowski" and not self.p >= 1:
            raise ParameterError("Minkowski order must be >= 1")
        if kind == "daco" and (self.k is None or self.k < 1):
            raise ParameterError("daco needs a lag count k >= 1")
        if kind in ("dtw_sc", "krdtw_sc"):
            if self.band_pct is None or not 0 <= self.band_pct <= 100:
                raise ParameterError(f"{kind} needs band_pct in [0, 100]")
        if kind in KERNELS and (self.nu is None or not self.nu > 0):
            raise ParameterError(f"{kind} needs a positive nu")
        if kind in ("sp_dtw", "sp_krdtw") and self.spm is None:
            if self.theta is None or self.theta < 0:
                raise ParameterError(f"{kind} needs theta >= 0 or a path matrix")
            if kind == "sp_dtw" and (self.gamma is None or self.gamma < 0):
                raise ParameterError("sp_dtw needs gamma >= 0 or a path matrix")

    @property
    def is_similarity(self) -> bool:
        return self.kind in SIMILARITIES

    @property
    def is_kernel(self) -> bool:
        return self.kind in KERNELS

    def params(self) -> dict:
        """The hyperparameters that matter for this kind."""
        out = {}
        k = self.kind
        if k in ("dtw", "dtw_sc", "sp_dtw"):
            out["cost"] = self.cost
        if k == "minkowski":
            out["p"] = self.p
        if k == "daco":
            out["k"] = self.k
        if k in ("dtw_sc", "krdtw_sc"):
            out["band_pct"] = self.band_pct
        if k in KERNELS:
            out["nu"] = self.nu
        if k in ("sp_dtw", "sp_krdtw"):
            theta = self.theta if self.theta is not None else self.spm.theta
            out["theta"] = theta
            if k == "sp_dtw":
                out["gamma"] = self.gamma if self.gamma is not None else self.spm.gamma
        return out

    def label(self) -> str:
        return ";".join(f"{key}={value}" for key, value in self.params().items())


def resolve_spec(spec: MeasureSpec, train, counts=None) -> MeasureSpec:
    """Learn the path matrix of a sparse measure from ``train`` if missing."""
    if spec.kind not in ("sp_dtw", "sp_krdtw") or spec.spm is not None:
        return spec
    if counts is None:
        counts = accumulate_paths(train, spec.cost)
    gamma = spec.gamma if spec.kind == "sp_dtw" else 0.0
    m = sparsify(counts, normalize_grid(counts), spec.theta, gamma, source=getattr(train, "name", ""))
    return replace(spec, spm=m)


def _arr(A):
    return np.ascontiguousarray(np.asarray(getattr(A, "X", A), dtype=np.float64))


def _raw(spec: MeasureSpec, A, B):
    """Raw pairwise values (log domain for kernels) and visited cells per pair."""
    kind = spec.kind
    T = A.shape[1]
    if kind == "ed":
        return mb.pairwise_euclidean(A, B), T
    if kind == "minkowski":
        out = np.array([[mb.minkowski(a, b, spec.p) for b in B] for a in A])
        return out, T
    if kind == "corr":
        return mb.pairwise_corr(A, B), T
    if kind == "daco":
        return mb.pairwise_daco(A, B, spec.k), T
    if kind == "dtw":
        return ed.pairwise_dtw(A, B, spec.cost)
    if kind == "dtw_sc":
        return ed.pairwise_dtw(A, B, spec.cost, band_pct=spec.band_pct)
    if kind == "krdtw":
        return ed.pairwise_krdtw(A, B, spec.nu)
    if kind == "krdtw_sc":
        return ed.pairwise_krdtw(A, B, spec.nu, band_pct=spec.band_pct)
    if spec.spm is None:
        raise ParameterError("sparse measure has no path matrix; call resolve_spec first")
    if kind == "sp_dtw":
        return es.pairwise_sp_dtw(A, B, spec.spm, spec.cost)
    return es.pairwise_sp_krdtw(A, B, spec.spm, spec.nu)


def _self_values(spec, A):
    if spec.kind == "krdtw":
        return np.array([ed.krdtw(a, a, spec.nu).value for a in A])
    if spec.kind == "krdtw_sc":
        return np.array([ed.krdtw_sc(a, a, spec.nu, spec.band_pct).value for a in A])
    return np.array([es.sp_krdtw(a, a, spec.spm, spec.nu).value for a in A])


def pairwise_matrix(spec: MeasureSpec, A, B=None):
    """Pairwise values between rows of ``A`` (queries) and ``B`` (references).

    Dissimilarities are returned as is. Similarities are larger for closer
    pairs: correlation is returned as is and kernels as the cosine-normalised
    log value ``log K(a,b) - (log K(a,a) + log K(b,b)) / 2``.

    Returns
    -------
    values : ndarray
    visited : int
        Grid cells evaluated per comparison; ``T`` for lock-step measures.
    """
    A = _arr(A)
    same = B is None
    B = A if same else _arr(B)
    if A.ndim != 2 or B.ndim != 2 or A.shape[1] != B.shape[1]:
        raise DimensionError("query and reference series lengths differ")
    if spec.kind in ("dtw", "dtw_sc", "krdtw", "krdtw_sc", "sp_dtw", "sp_krdtw"):
        vals, visited = _raw(spec, A, None if same else B)
    else:
        vals, visited = _raw(spec, A, B)
    if spec.is_kernel:
        if same:
            sa = sb = np.diag(vals).copy()
        else:
            sa, sb = _self_values(spec, A), _self_values(spec, B)
        vals = vals - 0.5 * (sa[:, None] + sb[None, :])
        if same:
            np.fill_diagonal(vals, 0.0)
    return vals, int(visited)


def kernel_gram(spec: MeasureSpec, A, B=None) -> np.ndarray:
    """Cosine-normalised kernel values ``K(a,b) / sqrt(K(a,a) K(b,b))``."""
    if not spec.is_kernel:
        raise ParameterError(f"{spec.kind} is not a kernel")
    vals, _ = pairwise_matrix(spec, A, B)
    return np.exp(vals)


def nu_scale(X, max_samples: int = 2000) -> float:
    """Median squared difference between sample values of ``X``.

    Kernel bandwidths are expressed as multiples of its inverse. Large inputs
    are reduced to evenly spaced order statistics, which keeps the result
    deterministic.
    """
    v = np.sort(_arr(X).ravel())
    if v.size > max_samples:
        v = v[np.linspace(0, v.size - 1, max_samples).round().astype(int)]
    iu = np.triu_indices(v.size, k=1)
    d = v[iu[0]] - v[iu[1]]
    med = float(np.median(d * d))
    if not med > 0:
        raise ParameterError("all sample values are equal; cannot scale the kernel bandwidth")
    return med
