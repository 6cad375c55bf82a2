"""Classification, model selection and significance testing."""

from .knn import EvalReport, loo_error, loo_predictions, nearest, onenn
from .measures import KINDS, MeasureSpec, kernel_gram, nu_scale, pairwise_matrix, resolve_spec
from .selection import GridResult, default_grid, evaluate, grid_search_loo, grid_search_svm
from .stats import speedup, wilcoxon_signed_rank
from .svm import SvmConfig, SvmModel, cv_error, stratified_folds, svm_predict, svm_train

__all__ = [
    "EvalReport",
    "loo_error",
    "loo_predictions",
    "nearest",
    "onenn",
    "KINDS",
    "MeasureSpec",
    "kernel_gram",
    "nu_scale",
    "pairwise_matrix",
    "resolve_spec",
    "GridResult",
    "default_grid",
    "evaluate",
    "grid_search_loo",
    "grid_search_svm",
    "speedup",
    "wilcoxon_signed_rank",
    "SvmConfig",
    "SvmModel",
    "cv_error",
    "stratified_folds",
    "svm_predict",
    "svm_train",
]
