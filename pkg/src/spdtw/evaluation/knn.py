"""1-nearest-neighbour classification and leave-one-out error."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import EmptyInputError
from .measures import MeasureSpec, pairwise_matrix, resolve_spec
from .stats import speedup

__all__ = ["EvalReport", "nearest", "onenn", "loo_error", "loo_predictions"]


@dataclass(frozen=True)
class EvalReport:
    """Outcome of classifying a test set.

    ``total_visited`` sums the grid cells over every test/train comparison
    and ``speedup_pct`` compares one comparison against the full ``T x T``
    grid.
    """

    error_rate: float
    predictions: np.ndarray
    total_visited: int
    speedup_pct: float
    chosen_params: dict = field(default_factory=dict)
    dataset: str = ""
    measure: str = ""
    classifier: str = "1nn"

    def csv_row(self) -> list:
        params = ";".join(f"{k}={v}" for k, v in self.chosen_params.items())
        return [
            self.dataset,
            self.measure,
            self.classifier,
            f"{self.error_rate:.3f}",
            str(self.total_visited),
            f"{self.speedup_pct:.1f}",
            params,
        ]


def nearest(values: np.ndarray, similarity: bool) -> np.ndarray:
    """Column index of the best reference for every query row.

    Ties go to the lowest index.
    """
    return np.argmax(values, axis=1) if similarity else np.argmin(values, axis=1)


def _error(pred, truth) -> float:
    return float(np.mean(np.asarray(pred) != np.asarray(truth)))


def onenn(train, test, spec: MeasureSpec, counts=None) -> EvalReport:
    """Label every test series with the class of its nearest training series.

    Sparse measures without a path matrix learn one from ``train`` first.
    """
    if len(train) == 0 or len(test) == 0:
        raise EmptyInputError("train and test sets must be non-empty")
    spec = resolve_spec(spec, train, counts)
    vals, visited = pairwise_matrix(spec, test.X, train.X)
    pred = train.y[nearest(vals, spec.is_similarity)]
    T = train.length
    return EvalReport(
        error_rate=_error(pred, test.y),
        predictions=pred,
        total_visited=visited * test.n * train.n,
        speedup_pct=speedup(visited, T),
        chosen_params=spec.params(),
        dataset=getattr(train, "name", ""),
        measure=spec.kind,
    )


def loo_predictions_from(vals: np.ndarray, y, similarity: bool) -> np.ndarray:
    vals = np.array(vals, dtype=np.float64)
    np.fill_diagonal(vals, -np.inf if similarity else np.inf)
    return np.asarray(y)[nearest(vals, similarity)]


def loo_predictions(train, spec: MeasureSpec, counts=None) -> np.ndarray:
    """Leave-one-out 1-NN labels on the training set.

    A sparse path matrix is learned once on the whole training set.
    """
    if train.n < 2:
        raise EmptyInputError("leave-one-out needs at least two series")
    spec = resolve_spec(spec, train, counts)
    vals, _ = pairwise_matrix(spec, train.X)
    return loo_predictions_from(vals, train.y, spec.is_similarity)


def loo_error(train, spec: MeasureSpec, counts=None) -> float:
    return _error(loo_predictions(train, spec, counts), train.y)
