"""Representation probes: ridge regression, KNN, and rank-correlation scoring.

Fixed-length embeddings are regressed against fitness scores.  Ridge uses
the normal equations with an unpenalized intercept over features
standardized by training statistics; the regularization strength comes from
seeded 5-fold cross-validation over a fixed grid.  The KNN probe predicts
the mean score of the k nearest training vectors and picks k by validation
rank correlation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Optional, Sequence

import numpy as np
import scipy.linalg
from scipy.stats import rankdata
from sklearn.base import BaseEstimator, RegressorMixin

from .errors import ContractError
from .validation import check_finite_matrix, check_finite_vector, check_positive

ALPHA_GRID: tuple[float, ...] = (1e-6, 1e-5, 1e-4, 1e-3, 0.01, 0.1, 1.0, 10.0, 100.0)
K_GRID: tuple[int, ...] = (1, 3, 5, 10, 20, 50, 100)


@dataclass(frozen=True)
class EmbeddingTable:
    """Variant ids, an N x D embedding matrix, and N fitness scores."""

    ids: tuple[str, ...]
    vectors: np.ndarray = field(repr=False)
    scores: np.ndarray = field(repr=False)

    def __post_init__(self):
        vectors = check_finite_matrix("vectors", self.vectors)
        scores = check_finite_vector("scores", self.scores)
        object.__setattr__(self, "vectors", vectors)
        object.__setattr__(self, "scores", scores)
        if len(self.ids) != vectors.shape[0] or len(self.ids) != scores.shape[0]:
            raise ContractError("ids, vectors, and scores disagree in length")
        if len(set(self.ids)) != len(self.ids):
            raise ContractError("embedding ids must be unique")

    def __len__(self) -> int:
        return len(self.ids)

    @property
    def dim(self) -> int:
        return self.vectors.shape[1]

    def subset(self, ids: Sequence[str]) -> "EmbeddingTable":
        index = {vid: i for i, vid in enumerate(self.ids)}
        missing = [vid for vid in ids if vid not in index]
        if missing:
            raise ContractError(f"ids missing from embedding table: {missing[:5]!r}")
        rows = [index[vid] for vid in ids]
        return EmbeddingTable(
            ids=tuple(ids), vectors=self.vectors[rows], scores=self.scores[rows]
        )


@dataclass(frozen=True)
class ProbeResult:
    """Fitted probe summary: selected hyperparameter and test rank correlation."""

    probe_kind: str
    spearman_rho: float
    selected_alpha: Optional[float] = None
    selected_k: Optional[int] = None
    fold_mses: tuple[float, ...] = ()
    degenerate: bool = False


def _standardize(X: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    mean = X.mean(axis=0)
    scale = X.std(axis=0)
    scale = np.where(scale == 0.0, 1.0, scale)  # constant features end up all-zero
    return (X - mean) / scale, mean, scale


def ridge_fit(X, y, alpha: float) -> np.ndarray:
    """Closed-form ridge weights in original feature space, intercept last.

    Features are standardized with training statistics before solving
    (X_s^T X_s + alpha I) w = X_s^T (y - mean(y)) via a symmetric
    positive-definite factorization; the weights are then folded back so
    that prediction is simply X @ w + b.
    """
    X = check_finite_matrix("X", X)
    y = check_finite_vector("y", y)
    check_positive("alpha", alpha)
    if X.shape[0] != y.shape[0]:
        raise ContractError("X and y disagree in sample count")
    if X.shape[0] < 2:
        raise ContractError("ridge_fit needs at least 2 samples")

    Xs, mean, scale = _standardize(X)
    y_mean = y.mean()
    A = Xs.T @ Xs + alpha * np.eye(X.shape[1])
    b = Xs.T @ (y - y_mean)
    w_std = scipy.linalg.solve(A, b, assume_a="pos")
    w = w_std / scale
    intercept = y_mean - mean @ w
    return np.concatenate([w, [intercept]])


def ridge_predict(weights: np.ndarray, X) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    return X @ weights[:-1] + weights[-1]


def cv_mean_mses(X, y, grid: Sequence[float] = ALPHA_GRID, folds: int = 5, seed: int = 0) -> list[float]:
    """Mean validation MSE per grid value under seeded fold assignment."""
    X = check_finite_matrix("X", X)
    y = check_finite_vector("y", y)
    n = X.shape[0]
    if n < folds:
        raise ContractError(f"need at least {folds} samples for {folds}-fold CV, got {n}")
    perm = np.random.default_rng(seed).permutation(n)
    assignments = np.array_split(perm, folds)

    means = []
    for alpha in grid:
        mses = []
        for fold in assignments:
            mask = np.ones(n, dtype=bool)
            mask[fold] = False
            weights = ridge_fit(X[mask], y[mask], alpha)
            pred = ridge_predict(weights, X[fold])
            mses.append(float(np.mean((pred - y[fold]) ** 2)))
        means.append(float(np.mean(mses)))
    return means


def cv_select_alpha(X, y, grid: Sequence[float] = ALPHA_GRID, folds: int = 5, seed: int = 0) -> float:
    """Grid value with the lowest mean CV MSE; ties broken toward larger alpha."""
    order = sorted(range(len(grid)), key=lambda i: grid[i])
    means = cv_mean_mses(X, y, grid, folds, seed)
    best_alpha = None
    best_mse = math.inf
    for i in order:
        if means[i] <= best_mse:
            best_mse = means[i]
            best_alpha = grid[i]
    return float(best_alpha)


def _ranks(values) -> np.ndarray:
    return rankdata(np.asarray(values, dtype=float), method="average")


def rank_degenerate(values) -> bool:
    """True when every entry ties, leaving rank correlation undefined."""
    r = _ranks(values)
    return bool(np.all(r == r[0]))


def spearman(x, y) -> float:
    """Pearson correlation of average-tied ranks; 0.0 when ranks are constant."""
    x = check_finite_vector("x", x)
    y = check_finite_vector("y", y)
    if x.shape[0] != y.shape[0]:
        raise ContractError("x and y disagree in length")
    if x.shape[0] < 2:
        raise ContractError("spearman needs at least 2 observations")
    rx, ry = _ranks(x), _ranks(y)
    if np.all(rx == rx[0]) or np.all(ry == ry[0]):
        return 0.0
    return float(np.corrcoef(rx, ry)[0, 1])


def knn_predict(train_X, train_y, query_X, k: int) -> np.ndarray:
    """Mean score of the k nearest training vectors (Euclidean, stable ties)."""
    train_X = np.asarray(train_X, dtype=float)
    train_y = np.asarray(train_y, dtype=float)
    query_X = np.asarray(query_X, dtype=float)
    if not 1 <= k <= train_X.shape[0]:
        raise ContractError(f"k={k} outside [1, {train_X.shape[0]}]")
    d2 = ((query_X[:, None, :] - train_X[None, :, :]) ** 2).sum(axis=2)
    nearest = np.argsort(d2, axis=1, kind="stable")[:, :k]
    return train_y[nearest].mean(axis=1)


def knn_probe(
    train: EmbeddingTable,
    val: EmbeddingTable,
    test: EmbeddingTable,
    k_grid: Sequence[int] = K_GRID,
) -> ProbeResult:
    """Sweep k on the validation partition, then report test rank correlation.

    Grid entries exceeding the training-set size are skipped; ties in
    validation correlation resolve to the smallest k.
    """
    usable = [k for k in k_grid if k <= len(train)]
    if not usable:
        raise ContractError(
            f"no usable k: grid {tuple(k_grid)} vs {len(train)} training points"
        )
    best_k, best_rho = None, -math.inf
    for k in usable:
        rho = spearman(knn_predict(train.vectors, train.scores, val.vectors, k), val.scores)
        if rho > best_rho:
            best_k, best_rho = k, rho
    pred = knn_predict(train.vectors, train.scores, test.vectors, best_k)
    degenerate = rank_degenerate(pred) or rank_degenerate(test.scores)
    rho = spearman(pred, test.scores)
    return ProbeResult(
        probe_kind="knn", spearman_rho=rho, selected_k=best_k, degenerate=degenerate
    )


def ridge_probe(
    train: EmbeddingTable,
    test: EmbeddingTable,
    grid: Sequence[float] = ALPHA_GRID,
    folds: int = 5,
    seed: int = 0,
) -> ProbeResult:
    """CV-select alpha on the training set, refit on all of it, score the test set."""
    means = cv_mean_mses(train.vectors, train.scores, grid, folds, seed)
    order = sorted(range(len(grid)), key=lambda i: grid[i])
    best_alpha, best_mse = None, math.inf
    for i in order:
        if means[i] <= best_mse:
            best_mse = means[i]
            best_alpha = grid[i]
    weights = ridge_fit(train.vectors, train.scores, best_alpha)
    pred = ridge_predict(weights, test.vectors)
    degenerate = rank_degenerate(pred) or rank_degenerate(test.scores)
    rho = spearman(pred, test.scores)
    return ProbeResult(
        probe_kind="ridge",
        spearman_rho=rho,
        selected_alpha=float(best_alpha),
        fold_mses=tuple(means),
        degenerate=degenerate,
    )


def selection_probe(
    table: EmbeddingTable,
    seed: int = 0,
    train_fraction: float = 0.8,
    grid: Sequence[float] = ALPHA_GRID,
    folds: int = 5,
) -> ProbeResult:
    """Checkpoint-style selection rho on a held-out slice of one table.

    The table is split train/test at ``train_fraction`` with the seed, alpha
    is cross-validated on the train side, and the refit model is scored on
    the held-out side.  The result is a *selection* correlation; reusing it
    as a final test metric leaks the held-out slice.
    """
    n = len(table)
    if n < 2:
        raise ContractError("selection probe needs at least 2 rows")
    perm = np.random.default_rng(seed).permutation(n)
    n_train = int(np.floor(train_fraction * n))
    if n_train < folds or n_train == n:
        raise ContractError("train fraction leaves too few rows on one side")
    train = table.subset([table.ids[i] for i in perm[:n_train]])
    held = table.subset([table.ids[i] for i in perm[n_train:]])
    return ridge_probe(train, held, grid=grid, folds=folds, seed=seed)


@dataclass(frozen=True)
class StratumResult:
    n: int
    rho: float
    low_n: bool
    degenerate: bool


def stratified_eval(
    predictions: Mapping[str, float],
    scores: Mapping[str, float],
    strata: Mapping[str, Sequence[str]],
    min_n: int = 10,
) -> dict[str, StratumResult]:
    """Rank correlation per stratum; empty strata are omitted, small ones flagged.

    Every prediction id must belong to exactly one stratum; ids present in a
    stratum but absent from the predictions are ignored.
    """
    owner: dict[str, str] = {}
    for label, ids in strata.items():
        for vid in ids:
            if vid in owner:
                raise ContractError(f"variant {vid!r} appears in strata {owner[vid]!r} and {label!r}")
            owner[vid] = label
    for vid in predictions:
        if vid not in owner:
            raise ContractError(f"prediction id {vid!r} not covered by any stratum")
        if vid not in scores:
            raise ContractError(f"no score for prediction id {vid!r}")

    out: dict[str, StratumResult] = {}
    for label, ids in strata.items():
        members = [vid for vid in ids if vid in predictions]
        if not members:
            continue
        pred = [predictions[vid] for vid in members]
        true = [scores[vid] for vid in members]
        if len(members) < 2:
            out[label] = StratumResult(n=len(members), rho=0.0, low_n=True, degenerate=True)
            continue
        degenerate = rank_degenerate(pred) or rank_degenerate(true)
        out[label] = StratumResult(
            n=len(members),
            rho=spearman(pred, true),
            low_n=len(members) < min_n,
            degenerate=degenerate,
        )
    return out


class RidgeProbe(BaseEstimator, RegressorMixin):
    """Estimator-style ridge probe; alpha is cross-validated when not given."""

    def __init__(self, alpha=None, alpha_grid=ALPHA_GRID, cv_folds=5, random_state=0):
        self.alpha = alpha
        self.alpha_grid = alpha_grid
        self.cv_folds = cv_folds
        self.random_state = random_state

    def fit(self, X, y):
        X = check_finite_matrix("X", X)
        y = check_finite_vector("y", y)
        if self.alpha is None:
            self.fold_mses_ = tuple(
                cv_mean_mses(X, y, self.alpha_grid, self.cv_folds, self.random_state)
            )
            self.alpha_ = cv_select_alpha(X, y, self.alpha_grid, self.cv_folds, self.random_state)
        else:
            self.fold_mses_ = ()
            self.alpha_ = float(self.alpha)
        weights = ridge_fit(X, y, self.alpha_)
        self.coef_ = weights[:-1]
        self.intercept_ = float(weights[-1])
        return self

    def predict(self, X):
        if not hasattr(self, "coef_"):
            raise ContractError("probe is not fitted")
        return np.asarray(X, dtype=float) @ self.coef_ + self.intercept_


class KNNProbe(BaseEstimator, RegressorMixin):
    """Estimator-style nearest-neighbor probe with a fixed k."""

    def __init__(self, k=5):
        self.k = k

    def fit(self, X, y):
        self.train_X_ = check_finite_matrix("X", X)
        self.train_y_ = check_finite_vector("y", y)
        if not 1 <= self.k <= self.train_X_.shape[0]:
            raise ContractError(f"k={self.k} outside [1, {self.train_X_.shape[0]}]")
        return self

    def predict(self, X):
        if not hasattr(self, "train_X_"):
            raise ContractError("probe is not fitted")
        return knn_predict(self.train_X_, self.train_y_, X, self.k)
