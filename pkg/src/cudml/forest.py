"""Random-forest learners for the outcome means and the propensity score.

Thin, contract-enforcing wrappers around scikit-learn's CART forest
ensembles. Regression forests minimize within-node squared error;
classification forests predict the average of per-tree leaf class
proportions, so their output is a probability in [0, 1]. All fits are
deterministic given the supplied random generator.

``tune_forest`` implements the cross-validation protocol used throughout the
simulations: for each replication a fresh fold partition is drawn, every
(max_depth, min_leaf) grid point is scored by CV loss (squared error for
regression, Brier score for classification), and the most frequently
selected grid point wins. Ties are broken toward stronger regularization:
smaller max_depth, then larger min_leaf.
"""

from __future__ import annotations

import hashlib
import math
from collections import Counter
from dataclasses import dataclass, replace

import numpy as np
from sklearn.ensemble import RandomForestClassifier, RandomForestRegressor

from .dataset import partition_folds
from .errors import DimensionMismatch, OutOfRange, SingleClass, TooFewRows

#: hyperparameter grid spanning weak to strong regularization
DEFAULT_GRID: tuple[tuple[int | None, int], ...] = tuple(
    (depth, leaf) for depth in (3, 5, 8, None) for leaf in (1, 5, 20, 50)
)


@dataclass(frozen=True)
class ForestParams:
    """Forest hyperparameters. ``max_depth=None`` means unbounded depth;
    ``mtry=None`` resolves at fit time to ceil(p/3) for regression and
    ceil(sqrt(p)) for classification."""

    n_trees: int = 500
    max_depth: int | None = None
    min_leaf: int = 1
    mtry: int | None = None
    bootstrap: bool = True

    def __post_init__(self) -> None:
        if self.n_trees < 1:
            raise OutOfRange(f"n_trees must be >= 1, got {self.n_trees}")
        if self.min_leaf < 1:
            raise OutOfRange(f"min_leaf must be >= 1, got {self.min_leaf}")
        if self.max_depth is not None and self.max_depth < 1:
            raise OutOfRange(f"max_depth must be >= 1 or None, got {self.max_depth}")
        if self.mtry is not None and self.mtry < 1:
            raise OutOfRange(f"mtry must be >= 1, got {self.mtry}")


@dataclass(frozen=True)
class FittedModel:
    """A fitted forest: prediction is a pure function of (model, input row)."""

    kind: str
    trees: RandomForestRegressor | RandomForestClassifier
    params: ForestParams
    n_features: int
    train_fingerprint: str


def _resolved_mtry(params: ForestParams, p: int, kind: str) -> int:
    if params.mtry is not None:
        if params.mtry > p:
            raise OutOfRange(f"mtry={params.mtry} exceeds feature count {p}")
        return params.mtry
    if kind == "regression":
        return math.ceil(p / 3)
    return math.ceil(math.sqrt(p))


def _fingerprint(x: np.ndarray, target: np.ndarray) -> str:
    digest = hashlib.sha256()
    digest.update(np.ascontiguousarray(x).tobytes())
    digest.update(np.ascontiguousarray(target).tobytes())
    return digest.hexdigest()[:16]


def fit_forest(
    x: np.ndarray,
    target: np.ndarray,
    kind: str,
    params: ForestParams,
    rng: np.random.Generator,
) -> FittedModel:
    """Fit a forest of CART-style trees with bootstrap resampling per tree.

    ``kind`` is "regression" or "classification"; classification targets
    must be binary with both classes present.
    """
    if kind not in ("regression", "classification"):
        raise OutOfRange(f"kind must be 'regression' or 'classification', got {kind!r}")
    x = np.asarray(x, dtype=np.float64)
    target = np.asarray(target, dtype=np.float64)
    if x.ndim != 2 or target.ndim != 1 or x.shape[0] != target.shape[0]:
        raise DimensionMismatch(
            f"x has shape {x.shape} but target has shape {target.shape}"
        )
    n, p = x.shape
    if n < 2 * params.min_leaf:
        raise TooFewRows(f"need at least {2 * params.min_leaf} rows, got {n}")
    mtry = _resolved_mtry(params, p, kind)
    seed = int(rng.integers(0, 2**31 - 1))
    common = dict(
        n_estimators=params.n_trees,
        max_depth=params.max_depth,
        min_samples_leaf=params.min_leaf,
        max_features=mtry,
        bootstrap=params.bootstrap,
        random_state=seed,
        n_jobs=1,
    )
    if kind == "classification":
        values = np.unique(target)
        if not np.isin(values, (0.0, 1.0)).all():
            raise OutOfRange("classification targets must be 0 or 1")
        if values.size < 2:
            raise SingleClass("classification training data has a single class")
        trees = RandomForestClassifier(**common)
        trees.fit(x, target.astype(np.int64))
    else:
        trees = RandomForestRegressor(criterion="squared_error", **common)
        trees.fit(x, target)
    return FittedModel(
        kind=kind,
        trees=trees,
        params=params,
        n_features=p,
        train_fingerprint=_fingerprint(x, target),
    )


def predict(model: FittedModel, x: np.ndarray) -> np.ndarray:
    """One prediction per row; probabilities of class 1 for classification."""
    x = np.asarray(x, dtype=np.float64)
    x = np.atleast_2d(x)
    if x.shape[1] != model.n_features:
        raise DimensionMismatch(
            f"model was trained on {model.n_features} features, input has {x.shape[1]}"
        )
    if model.kind == "classification":
        return model.trees.predict_proba(x)[:, 1]
    return model.trees.predict(x)


def _grid_key(point: tuple[int | None, int]) -> tuple[float, int]:
    depth, leaf = point
    return (math.inf if depth is None else float(depth), -leaf)


def _cv_argmin(
    x: np.ndarray,
    target: np.ndarray,
    kind: str,
    grid: tuple[tuple[int | None, int], ...],
    folds: int,
    base: ForestParams,
    rng: np.random.Generator,
) -> tuple[int | None, int]:
    """One cross-validation pass: CV loss per grid point, argmin with ties
    broken toward smaller max_depth then larger min_leaf."""
    partition = partition_folds(len(target), folds, rng)
    losses: dict[tuple[int | None, int], float] = {}
    for point in grid:
        depth, leaf = point
        params = replace(base, max_depth=depth, min_leaf=leaf)
        fold_losses = []
        for k in range(partition.k):
            train = partition.complement(k)
            test = partition.folds[k]
            model = fit_forest(x[train], target[train], kind, params, rng)
            pred = predict(model, x[test])
            fold_losses.append(float(np.mean((pred - target[test]) ** 2)))
        losses[point] = float(np.mean(fold_losses))
    return min(grid, key=lambda g: (losses[g], _grid_key(g)))


def tune_forest(
    x: np.ndarray,
    target: np.ndarray,
    kind: str,
    grid=DEFAULT_GRID,
    folds: int = 5,
    replications: int = 1,
    rng: np.random.Generator | None = None,
    base: ForestParams = ForestParams(),
) -> ForestParams:
    """Select (max_depth, min_leaf) by replicated cross-validation.

    Each replication draws a fresh fold partition and records the CV-loss
    argmin over the grid; the modal argmin across replications is returned,
    merged into ``base``.
    """
    grid = tuple(tuple(g) for g in grid)
    if not grid:
        raise OutOfRange("hyperparameter grid must be non-empty")
    if replications < 1:
        raise OutOfRange(f"replications must be >= 1, got {replications}")
    if rng is None:
        rng = np.random.default_rng(0)
    x = np.asarray(x, dtype=np.float64)
    target = np.asarray(target, dtype=np.float64)
    selections = [
        _cv_argmin(x, target, kind, grid, folds, base, rng)
        for _ in range(replications)
    ]
    counts = Counter(selections)
    winner = min(counts, key=lambda g: (-counts[g], _grid_key(g)))
    return replace(base, max_depth=winner[0], min_leaf=winner[1])
