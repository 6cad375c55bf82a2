"""Sparsified alignment-path DTW and time-elastic kernels."""

from .elastic_dense import dtw, dtw_sc, krdtw, krdtw_sc, local_kernel
from .elastic_sparse import SparseEvalResult, sp_dtw, sp_krdtw
from .measures_basic import corr, daco, euclidean, minkowski
from .path_sparsifier import (
    SparsePathMatrix,
    accumulate_paths,
    ensure_connectivity,
    learn_path_matrix,
    normalize_grid,
    read_spm,
    sparsify,
    write_spm,
)
from .series import Dataset, TimeSeries, load_ucr, znormalize

__version__ = "0.1.0"

__all__ = [
    "dtw",
    "dtw_sc",
    "krdtw",
    "krdtw_sc",
    "local_kernel",
    "SparseEvalResult",
    "sp_dtw",
    "sp_krdtw",
    "corr",
    "daco",
    "euclidean",
    "minkowski",
    "SparsePathMatrix",
    "accumulate_paths",
    "ensure_connectivity",
    "learn_path_matrix",
    "normalize_grid",
    "read_spm",
    "sparsify",
    "write_spm",
    "Dataset",
    "TimeSeries",
    "load_ucr",
    "znormalize",
]
