"""Shallow comparators: logistic regression, KNN, Gaussian naive Bayes.

Logistic regression is a zero-hidden-layer sigmoid network trained with
the exact same Adam loop as the deep model.  KNN is exact brute-force
Euclidean search (desk-scale datasets make index structures pointless).
Gaussian NB fits per-class, per-dimension means and variances with a
variance floor.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import mlp
from .errors import DataError
from .features import LabeledFeatureSet
from .mlp import Mlp, TaskKind, TrainHistory, TrainSpec

GNB_VARIANCE_FLOOR = 1e-9


@dataclass(frozen=True)
class LogRegModel:
    """Sigmoid linear classifier; `net` is the underlying 0-hidden-layer Mlp."""

    net: Mlp

    @property
    def weights(self) -> np.ndarray:
        return self.net.weights[0][:, 0]

    @property
    def bias(self) -> float:
        return float(self.net.biases[0][0])


@dataclass(frozen=True)
class KnnModel:
    train_set: LabeledFeatureSet
    k: int

    def __post_init__(self):
        if self.k < 1:
            raise DataError(f"k must be >= 1, got {self.k}")
        if self.k > self.train_set.n_rows:
            raise DataError(
                f"k={self.k} exceeds the {self.train_set.n_rows} training rows"
            )


@dataclass(frozen=True)
class GaussianNbModel:
    means: np.ndarray  # (n_classes, dim)
    variances: np.ndarray  # (n_classes, dim), floored
    priors: np.ndarray  # (n_classes,)


def fit_logreg(
    train_set: LabeledFeatureSet,
    val_set: LabeledFeatureSet | None = None,
    spec: TrainSpec = TrainSpec(),
) -> tuple[LogRegModel, TrainHistory]:
    """Minimize mean binary cross-entropy of sigmoid(w.x + b) with Adam."""
    if train_set.n_classes != 2:
        raise DataError(
            f"logistic regression is binary-only, got {train_set.n_classes} classes"
        )
    cfg = mlp.MlpConfig(train_set.dim, (), 1, 0.0, TaskKind.BINARY)
    net = mlp.init(cfg, spec.seed)
    trained, history = mlp.train(net, train_set, val_set or train_set, spec)
    return LogRegModel(trained), history


def predict_logreg(model: LogRegModel, x: np.ndarray) -> np.ndarray:
    return mlp.predict(model.net, np.atleast_2d(np.asarray(x, dtype=np.float64)))


def _knn_vote(model: KnnModel, query: np.ndarray) -> int:
    diffs = model.train_set.features.astype(np.float64) - query
    distances = np.einsum("ij,ij->i", diffs, diffs)
    # stable sort: equal distances resolve to the lower training index
    nearest = np.argsort(distances, kind="stable")[: model.k]
    votes = np.bincount(
        model.train_set.labels[nearest], minlength=model.train_set.n_classes
    )
    return int(np.argmax(votes))  # vote ties resolve to the lower class id


def predict_knn(train_set: LabeledFeatureSet, k: int, query) -> int:
    """Majority vote over the k nearest training rows (Euclidean)."""
    model = KnnModel(train_set, k)
    return _knn_vote(model, np.asarray(query, dtype=np.float64))


def predict_knn_batch(model: KnnModel, x: np.ndarray) -> np.ndarray:
    x = np.atleast_2d(np.asarray(x, dtype=np.float64))
    return np.array([_knn_vote(model, row) for row in x], dtype=np.int64)


def fit_gnb(train_set: LabeledFeatureSet) -> GaussianNbModel:
    """Per-class Gaussian statistics; every class needs >= 2 samples."""
    counts = train_set.class_counts()
    if np.any(counts < 2):
        short = np.flatnonzero(counts < 2)
        raise DataError(
            f"Gaussian NB needs >= 2 samples per class, classes {short.tolist()} "
            "are short"
        )
    x = train_set.features.astype(np.float64)
    k = train_set.n_classes
    means = np.empty((k, train_set.dim))
    variances = np.empty((k, train_set.dim))
    for c in range(k):
        rows = x[train_set.labels == c]
        means[c] = rows.mean(axis=0)
        variances[c] = np.maximum(rows.var(axis=0), GNB_VARIANCE_FLOOR)
    return GaussianNbModel(means, variances, counts / counts.sum())


def predict_gnb(model: GaussianNbModel, query) -> np.ndarray | int:
    """Argmax of log prior + independent Gaussian log-densities."""
    x = np.asarray(query, dtype=np.float64)
    single = x.ndim == 1
    x = np.atleast_2d(x)
    # log N(x; mu, var) summed over dimensions, per class
    log_px = -0.5 * (
        ((x[:, None, :] - model.means) ** 2 / model.variances)
        + np.log(2.0 * np.pi * model.variances)
    ).sum(axis=2)
    scores = np.log(model.priors) + log_px
    pred = np.argmax(scores, axis=1)  # ties resolve to the lower class id
    return int(pred[0]) if single else pred
