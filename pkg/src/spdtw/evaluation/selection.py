"""Hyperparameter selection on the training set.

1-NN measures are tuned by leave-one-out error, SVMs by stratified k-fold
cross-validation. Among equally good lattice points the sparser or smaller
one wins: larger ``theta``, then smaller ``band_pct``, ``gamma``, ``nu``
and ``c``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from ..errors import EmptyGridError, InsufficientDataError, OverThresholdError, ParameterError
from ..measures_basic import daco_lag_grid
from ..path_sparsifier import accumulate_paths
from .knn import EvalReport, _error, loo_predictions_from, onenn
from .measures import MeasureSpec, kernel_gram, nu_scale, pairwise_matrix, resolve_spec
from .stats import speedup
from .svm import SvmConfig, cv_error, stratified_folds, svm_predict, svm_train

__all__ = [
    "THETA_GRID",
    "GAMMA_GRID",
    "NU_MULTIPLIERS",
    "BAND_GRID",
    "C_GRID",
    "GridResult",
    "default_grid",
    "grid_search_loo",
    "grid_search_svm",
    "evaluate",
]

THETA_GRID = tuple(range(16))
GAMMA_GRID = (0.0, 0.25, 0.5, 1.0, 2.0)
NU_MULTIPLIERS = (0.01, 0.1, 1.0, 10.0)
BAND_GRID = tuple(range(21))
C_GRID = (0.1, 1.0, 10.0, 100.0)


@dataclass(frozen=True)
class GridResult:
    """Chosen lattice point, its error and the error at every point tried.

    ``curve`` lists ``(params, error)`` in lattice order; points whose
    threshold removes the grid corners are left out.
    """

    params: dict
    error: float
    curve: list
    spec: MeasureSpec


def _tie_key(params: dict):
    return (
        -params.get("theta", 0),
        params.get("band_pct", 0),
        params.get("gamma", 0.0),
        params.get("nu", 0.0),
        params.get("c", 0.0),
    )


def default_grid(kind: str, train) -> dict:
    """Lattice searched for ``kind`` when the caller does not fix one."""
    X = getattr(train, "X", train)
    grid = {}
    if kind in ("sp_dtw", "sp_krdtw"):
        grid["theta"] = list(THETA_GRID)
    if kind == "sp_dtw":
        grid["gamma"] = list(GAMMA_GRID)
    if kind in ("dtw_sc", "krdtw_sc"):
        grid["band_pct"] = list(BAND_GRID)
    if kind in ("krdtw", "krdtw_sc", "sp_krdtw"):
        scale = nu_scale(X)
        grid["nu"] = [m / scale for m in NU_MULTIPLIERS]
    if kind == "daco":
        grid["k"] = daco_lag_grid(np.asarray(X).shape[1])
    return grid


def _points(grid: dict):
    keys = list(grid)
    for values in itertools.product(*(grid[k] for k in keys)):
        yield dict(zip(keys, values))


def _specs(train, template: MeasureSpec, grid: dict, counts):
    """Yield ``(params, resolved spec)`` for every admissible lattice point."""
    for point in _points(grid):
        spec_point = {k: v for k, v in point.items() if k != "c"}
        try:
            relearn = "theta" in spec_point or "gamma" in spec_point
            spec = replace(template, **spec_point, **({"spm": None} if relearn else {}))
            spec = resolve_spec(spec, train, counts)
        except OverThresholdError:
            continue
        yield point, spec


def _best(curve):
    if not curve:
        raise EmptyGridError("no admissible lattice point")
    return min(curve, key=lambda pe: (pe[1], _tie_key(pe[0])))


def _counts_for(template, train, grid):
    if template.kind in ("sp_dtw", "sp_krdtw") and (
        template.spm is None or "theta" in grid or "gamma" in grid
    ):
        return accumulate_paths(train, template.cost)
    return None


def grid_search_loo(train, template: MeasureSpec, grid: Optional[dict] = None) -> GridResult:
    """Pick the lattice point with the lowest leave-one-out 1-NN error.

    Parameters
    ----------
    train : Dataset
    template : MeasureSpec
        Fixed settings; lattice values override its fields.
    grid : dict, optional
        Parameter name to candidate values. ``{}`` means the template as is;
        ``None`` uses :func:`default_grid`.

    Raises
    ------
    EmptyGridError
        A parameter has no candidate, or every point is inadmissible.
    """
    if grid is None:
        grid = default_grid(template.kind, train)
    if any(len(v) == 0 for v in grid.values()):
        raise EmptyGridError("every grid parameter needs at least one value")
    if train.n < 2:
        raise InsufficientDataError("leave-one-out needs at least two series")
    counts = _counts_for(template, train, grid)
    curve, specs = [], {}
    for point, spec in _specs(train, template, grid, counts):
        vals, _ = pairwise_matrix(spec, train.X)
        err = _error(loo_predictions_from(vals, train.y, spec.is_similarity), train.y)
        curve.append((point, err))
        specs[len(curve) - 1] = spec
    best = _best(curve)
    return GridResult(best[0], best[1], curve, specs[curve.index(best)])


def grid_search_svm(
    train, template: MeasureSpec, grid: Optional[dict] = None, folds: int = 5, seed: int = 0,
    svm: SvmConfig = SvmConfig(),
) -> GridResult:
    """Pick kernel parameters and ``c`` by stratified k-fold CV error."""
    if not template.is_kernel:
        raise ParameterError(f"{template.kind} is not a kernel")
    if grid is None:
        grid = default_grid(template.kind, train)
        grid["c"] = list(C_GRID)
    grid = dict(grid)
    grid.setdefault("c", [svm.c])
    if any(len(v) == 0 for v in grid.values()):
        raise EmptyGridError("every grid parameter needs at least one value")
    fold_ids = stratified_folds(train.y, folds, seed)
    counts = _counts_for(template, train, grid)
    kernel_grid = {k: v for k, v in grid.items() if k != "c"}
    curve, specs = [], []
    for point, spec in _specs(train, template, kernel_grid, counts):
        K = kernel_gram(spec, train.X)
        for c in grid["c"]:
            err = cv_error(K, train.y, replace(svm, c=float(c)), fold_ids)
            curve.append(({**point, "c": c}, err))
            specs.append(spec)
    best = _best(curve)
    return GridResult(best[0], best[1], curve, specs[curve.index(best)])


def evaluate(
    train, test, template: MeasureSpec, classifier: str = "1nn", grid: Optional[dict] = None,
    seed: int = 0, svm: SvmConfig = SvmConfig(),
) -> EvalReport:
    """Tune on ``train`` then report the test error.

    ``grid={}`` skips tuning and uses ``template`` as given.
    """
    if classifier == "1nn":
        sel = grid_search_loo(train, template, grid)
        report = onenn(train, test, sel.spec)
        return replace(report, chosen_params={**sel.spec.params()})
    if classifier != "svm":
        raise ParameterError(f"unknown classifier {classifier!r}")
    sel = grid_search_svm(train, template, grid, seed=seed, svm=svm)
    spec = sel.spec
    cfg = replace(svm, c=float(sel.params["c"]))
    model = svm_train(kernel_gram(spec, train.X), train.y, cfg)
    vals, visited = pairwise_matrix(spec, test.X, train.X)
    pred = svm_predict(model, np.exp(vals))
    return EvalReport(
        error_rate=_error(pred, test.y),
        predictions=pred,
        total_visited=visited * test.n * train.n,
        speedup_pct=speedup(visited, train.length),
        chosen_params={**spec.params(), "c": cfg.c},
        dataset=getattr(train, "name", ""),
        measure=spec.kind,
        classifier="svm",
    )
