"""Kernel SVM on precomputed Gram matrices.

Binary problems are solved by sequential minimal optimisation with
second-order working-set selection; several classes are handled one
against one with majority voting.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

import numpy as np
from numba import njit

from ..errors import DegenerateError, DimensionError, KernelError, ParameterError

__all__ = [
    "SvmConfig",
    "BinarySvm",
    "SvmModel",
    "check_gram",
    "svm_train",
    "svm_predict",
    "stratified_folds",
    "cv_error",
]

_TAU = 1e-12


@dataclass(frozen=True)
class SvmConfig:
    """SMO settings.

    Parameters
    ----------
    c : float
        Box constraint on the dual variables.
    tolerance : float
        Stop once the maximal KKT violation falls below this value.
    max_passes : int
        Iteration budget in units of the problem size: at most
        ``max_passes * n`` pair updates for ``n`` training points.
    """

    c: float = 1.0
    tolerance: float = 1e-3
    max_passes: int = 1000

    def __post_init__(self):
        if not self.c > 0:
            raise ParameterError(f"C must be positive, got {self.c}")
        if not self.tolerance > 0:
            raise ParameterError("tolerance must be positive")
        if self.max_passes < 1:
            raise ParameterError("max_passes must be at least 1")


@njit(cache=True)
def _smo(K, y, C, tol, max_iter):
    n = y.shape[0]
    alpha = np.zeros(n)
    G = -np.ones(n)  # gradient of 0.5 a'Qa - e'a with Q = yy' * K
    history = np.empty(max_iter + 1)
    history[0] = 0.0
    it = 0
    gap = np.inf
    while it < max_iter:
        gmax = -np.inf
        i = -1
        for t in range(n):
            if y[t] > 0:
                if alpha[t] < C and -G[t] >= gmax:
                    gmax = -G[t]
                    i = t
            elif alpha[t] > 0 and G[t] >= gmax:
                gmax = G[t]
                i = t
        gmax2 = -np.inf
        j = -1
        best = np.inf
        for t in range(n):
            if y[t] > 0:
                if alpha[t] > 0:
                    if G[t] >= gmax2:
                        gmax2 = G[t]
                    diff = gmax + G[t]
                else:
                    continue
            else:
                if alpha[t] < C:
                    if -G[t] >= gmax2:
                        gmax2 = -G[t]
                    diff = gmax - G[t]
                else:
                    continue
            if diff > 0 and i >= 0:
                quad = K[i, i] + K[t, t] - 2.0 * K[i, t]
                if quad <= 0:
                    quad = _TAU
                obj = -(diff * diff) / quad
                if obj <= best:
                    best = obj
                    j = t
        gap = gmax + gmax2
        if gap < tol or i < 0 or j < 0:
            break
        ai, aj = alpha[i], alpha[j]
        Qij = y[i] * y[j] * K[i, j]
        if y[i] != y[j]:
            quad = K[i, i] + K[j, j] + 2.0 * Qij
            if quad <= 0:
                quad = _TAU
            delta = (-G[i] - G[j]) / quad
            d = ai - aj
            alpha[i] += delta
            alpha[j] += delta
            if d > 0:
                if alpha[j] < 0:
                    alpha[j] = 0.0
                    alpha[i] = d
            elif alpha[i] < 0:
                alpha[i] = 0.0
                alpha[j] = -d
            if d > 0:
                if alpha[i] > C:
                    alpha[i] = C
                    alpha[j] = C - d
            elif alpha[j] > C:
                alpha[j] = C
                alpha[i] = C + d
        else:
            quad = K[i, i] + K[j, j] - 2.0 * Qij
            if quad <= 0:
                quad = _TAU
            delta = (G[i] - G[j]) / quad
            s = ai + aj
            alpha[i] -= delta
            alpha[j] += delta
            if s > C:
                if alpha[i] > C:
                    alpha[i] = C
                    alpha[j] = s - C
            elif alpha[j] < 0:
                alpha[j] = 0.0
                alpha[i] = s
            if s > C:
                if alpha[j] > C:
                    alpha[j] = C
                    alpha[i] = s - C
            elif alpha[i] < 0:
                alpha[i] = 0.0
                alpha[j] = s
        dai = alpha[i] - ai
        daj = alpha[j] - aj
        for t in range(n):
            G[t] += y[t] * (y[i] * K[t, i] * dai + y[j] * K[t, j] * daj)
        it += 1
        dual = 0.0
        for t in range(n):
            dual += 0.5 * alpha[t] - 0.5 * alpha[t] * G[t]
        history[it] = dual
    # Bias from free vectors, else the midpoint of the feasible interval.
    ub = np.inf
    lb = -np.inf
    nfree = 0
    sfree = 0.0
    for t in range(n):
        yg = y[t] * G[t]
        if alpha[t] >= C:
            if y[t] < 0:
                ub = min(ub, yg)
            else:
                lb = max(lb, yg)
        elif alpha[t] <= 0:
            if y[t] > 0:
                ub = min(ub, yg)
            else:
                lb = max(lb, yg)
        else:
            nfree += 1
            sfree += yg
    rho = sfree / nfree if nfree > 0 else 0.5 * (ub + lb)
    return alpha, rho, history[: it + 1], gap


@dataclass(frozen=True)
class BinarySvm:
    """Class ``positive`` against class ``negative``; ``coef = alpha * y``."""

    positive: int
    negative: int
    index: np.ndarray
    alpha: np.ndarray
    y: np.ndarray
    rho: float
    objective: np.ndarray
    kkt_gap: float

    def decision(self, gram_block: np.ndarray) -> np.ndarray:
        """Decision values for rows of ``gram_block`` (columns = all training points)."""
        return gram_block[:, self.index] @ (self.alpha * self.y) - self.rho


@dataclass(frozen=True)
class SvmModel:
    classes: np.ndarray
    machines: tuple
    n_train: int
    config: SvmConfig
    train_predictions: np.ndarray


def check_gram(gram, rtol: float = 1e-8) -> np.ndarray:
    """Validate that ``gram`` is symmetric positive semi-definite within ``rtol``."""
    K = np.asarray(gram, dtype=np.float64)
    if K.ndim != 2 or K.shape[0] != K.shape[1]:
        raise DimensionError("Gram matrix must be square")
    if not np.all(np.isfinite(K)):
        raise KernelError("Gram matrix has non-finite entries")
    scale = max(1.0, float(np.max(np.abs(K)))) if K.size else 1.0
    if not np.allclose(K, K.T, rtol=0, atol=rtol * scale):
        raise KernelError("Gram matrix is not symmetric")
    if K.size:
        eig = np.linalg.eigvalsh(0.5 * (K + K.T))
        if eig[0] < -rtol * max(abs(eig[-1]), 1.0):
            raise KernelError(f"Gram matrix is not positive semi-definite (min eigenvalue {eig[0]:.3g})")
    return K


def svm_train(gram, labels, cfg: SvmConfig = SvmConfig()) -> SvmModel:
    """Fit one-vs-one SMO machines on a precomputed Gram matrix.

    Raises
    ------
    KernelError
        ``gram`` is not symmetric PSD.
    DegenerateError
        Only one class is present.
    """
    K = check_gram(gram)
    labels = np.asarray(labels)
    if labels.shape != (K.shape[0],):
        raise DimensionError("one label per Gram row is required")
    classes = np.unique(labels)
    if classes.size < 2:
        raise DegenerateError("SVM training needs at least two classes")
    machines = []
    for a, b in combinations(classes, 2):
        idx = np.flatnonzero((labels == a) | (labels == b))
        y = np.where(labels[idx] == a, 1.0, -1.0)
        sub = np.ascontiguousarray(K[np.ix_(idx, idx)])
        alpha, rho, hist, gap = _smo(sub, y, float(cfg.c), float(cfg.tolerance), cfg.max_passes * idx.size)
        machines.append(BinarySvm(int(a), int(b), idx, alpha, y, float(rho), hist, float(gap)))
    model = SvmModel(classes, tuple(machines), K.shape[0], cfg, np.empty(0, dtype=classes.dtype))
    object.__setattr__(model, "train_predictions", svm_predict(model, K))
    return model


def svm_predict(model: SvmModel, gram_test) -> np.ndarray:
    """One-vs-one vote; ties go to the smallest class id.

    ``gram_test`` holds kernel values between test rows and all training
    points, in training order.
    """
    G = np.asarray(gram_test, dtype=np.float64)
    if G.ndim != 2 or G.shape[1] != model.n_train:
        raise DimensionError(f"expected a (n_test, {model.n_train}) kernel block")
    pos = {c: k for k, c in enumerate(model.classes)}
    votes = np.zeros((G.shape[0], model.classes.size), dtype=np.int64)
    rows = np.arange(G.shape[0])
    for mach in model.machines:
        win = np.where(mach.decision(G) > 0, pos[mach.positive], pos[mach.negative])
        np.add.at(votes, (rows, win), 1)
    return model.classes[np.argmax(votes, axis=1)]


def stratified_folds(labels, k: int = 5, seed: int = 0) -> np.ndarray:
    """Fold id per item; each class is shuffled then dealt round-robin."""
    labels = np.asarray(labels)
    rng = np.random.default_rng(seed)
    folds = np.empty(labels.size, dtype=np.int64)
    offset = 0
    for c in np.unique(labels):
        idx = np.flatnonzero(labels == c)
        rng.shuffle(idx)
        folds[idx] = (np.arange(idx.size) + offset) % k
        offset += idx.size
    return folds


def cv_error(gram, labels, cfg: SvmConfig, folds) -> float:
    """Cross-validated error of :func:`svm_train` with precomputed ``folds``."""
    K = np.asarray(gram, dtype=np.float64)
    labels = np.asarray(labels)
    wrong = 0
    for f in np.unique(folds):
        te = np.flatnonzero(folds == f)
        tr = np.flatnonzero(folds != f)
        if np.unique(labels[tr]).size < 2:
            # Too few classes left to train on: predict the majority label.
            vals, cnt = np.unique(labels[tr], return_counts=True)
            wrong += int(np.sum(labels[te] != vals[np.argmax(cnt)]))
            continue
        model = svm_train(K[np.ix_(tr, tr)], labels[tr], cfg)
        wrong += int(np.sum(svm_predict(model, K[np.ix_(te, tr)]) != labels[te]))
    return wrong / labels.size
