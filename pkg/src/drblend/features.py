"""Labeled feature datasets and the FVEC binary container.

A feature vector is a 1-D array of finite floats (activations from a
pretrained ConvNet layer).  A :class:`LabeledFeatureSet` bundles a feature
matrix with one integer grade per row.

FVEC file layout (all integers little-endian):

    offset  size          field
    0       4             magic ``b"FVB1"``
    4       4             u32 n_rows
    8       4             u32 dim
    12      2             u16 n_classes
    14      n_rows        u8 labels
    ...     n_rows*dim*4  float32 features, row-major

Grades are stored as u8 (255 classes is far more than the five used
here); features are stored as float32, which carries the full precision
of ConvNet activations at half the size.
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DataError, FileFormatError, WriteError

FVEC_MAGIC = b"FVB1"
_HEADER = struct.Struct("<4sIIH")


def as_vector(values) -> np.ndarray:
    """Validate *values* as a feature vector: 1-D, nonempty, all finite."""
    v = np.asarray(values, dtype=np.float64)
    if v.ndim != 1 or v.size < 1:
        raise DataError(f"feature vector must be 1-D and nonempty, got shape {v.shape}")
    if not np.all(np.isfinite(v)):
        raise DataError("non-finite feature")
    return v


@dataclass(frozen=True)
class LabeledFeatureSet:
    """Feature matrix with one class label per row.

    Invariants enforced at construction: at least one row, one shared
    dimension, finite values, and every label in ``[0, n_classes)``.
    """

    features: np.ndarray  # (n_rows, dim) float32
    labels: np.ndarray  # (n_rows,) uint8
    n_classes: int

    def __post_init__(self):
        features = np.ascontiguousarray(self.features, dtype=np.float32)
        labels = np.ascontiguousarray(self.labels)
        if features.ndim != 2:
            raise DataError(f"features must be 2-D, got shape {features.shape}")
        n_rows, dim = features.shape
        if n_rows < 1 or dim < 1:
            raise DataError("feature set must have at least one row and one dimension")
        if not np.all(np.isfinite(features)):
            raise DataError("non-finite feature")
        if labels.ndim != 1 or labels.shape[0] != n_rows:
            raise DataError(
                f"labels must be 1-D with one entry per row, got shape {labels.shape}"
            )
        if self.n_classes < 1 or self.n_classes > 255:
            raise DataError(f"n_classes must be in [1, 255], got {self.n_classes}")
        if np.any(labels < 0) or np.any(labels >= self.n_classes):
            raise DataError(f"labels must lie in [0, {self.n_classes})")
        object.__setattr__(self, "features", features)
        object.__setattr__(self, "labels", labels.astype(np.uint8))

    @property
    def n_rows(self) -> int:
        return self.features.shape[0]

    @property
    def dim(self) -> int:
        return self.features.shape[1]

    def take(self, indices: np.ndarray) -> "LabeledFeatureSet":
        """Row subset in the order given by *indices*."""
        idx = np.asarray(indices, dtype=np.int64)
        return LabeledFeatureSet(self.features[idx], self.labels[idx], self.n_classes)

    def class_counts(self) -> np.ndarray:
        return np.bincount(self.labels, minlength=self.n_classes)


@dataclass(frozen=True)
class SplitSpec:
    """Train/test partition parameters.

    ``train_fraction`` of the rows (floored) go to the train part; the
    remainder to test.  ``stratified`` applies the floor per class
    instead of globally.  The partition is a pure function of ``seed``.
    """

    train_fraction: float = 0.8
    seed: int = 0
    stratified: bool = False

    def __post_init__(self):
        if not 0.0 < self.train_fraction < 1.0:
            raise DataError(
                f"train_fraction must be in (0, 1), got {self.train_fraction}"
            )
        if self.seed < 0:
            raise DataError(f"seed must be non-negative, got {self.seed}")


def split_indices(labels: np.ndarray, spec: SplitSpec) -> tuple[np.ndarray, np.ndarray]:
    """Disjoint (train, test) row indices covering ``0..N-1`` exactly once.

    Computed from labels alone so that the same partition can be applied
    to every modality of an aligned multi-modal dataset.
    """
    labels = np.asarray(labels)
    n = labels.shape[0]
    rng = np.random.default_rng(spec.seed)
    perm = rng.permutation(n)
    if spec.stratified:
        train_parts, test_parts = [], []
        for c in range(int(labels.max()) + 1):
            class_rows = perm[labels[perm] == c]
            n_train_c = math.floor(spec.train_fraction * class_rows.size)
            train_parts.append(class_rows[:n_train_c])
            test_parts.append(class_rows[n_train_c:])
        train = np.concatenate(train_parts)
        test = np.concatenate(test_parts)
    else:
        n_train = math.floor(spec.train_fraction * n)
        train, test = perm[:n_train], perm[n_train:]
    if train.size == 0 or test.size == 0:
        raise DataError(
            f"split of {n} rows at fraction {spec.train_fraction} "
            "left one part empty"
        )
    return train, test


def split(
    dataset: LabeledFeatureSet, spec: SplitSpec
) -> tuple[LabeledFeatureSet, LabeledFeatureSet]:
    """Partition *dataset* into (train, test) per *spec*."""
    train_idx, test_idx = split_indices(dataset.labels, spec)
    return dataset.take(train_idx), dataset.take(test_idx)


def binarize_labels(dataset: LabeledFeatureSet) -> LabeledFeatureSet:
    """Collapse the five severity grades to presence/absence of disease.

    Grade 0 (no disease) maps to 0; grades 1-4 map to 1.  Feature rows
    are untouched.
    """
    if dataset.n_classes != 5:
        raise DataError(
            f"binarize expects the 5-grade labeling, got n_classes={dataset.n_classes}"
        )
    return LabeledFeatureSet(
        dataset.features, (dataset.labels != 0).astype(np.uint8), 2
    )


def write_fvec(dataset: LabeledFeatureSet, path) -> None:
    """Serialize *dataset* to *path* in the FVEC layout (bit-exact)."""
    header = _HEADER.pack(FVEC_MAGIC, dataset.n_rows, dataset.dim, dataset.n_classes)
    payload = dataset.labels.tobytes() + dataset.features.astype("<f4").tobytes()
    try:
        Path(path).write_bytes(header + payload)
    except OSError as exc:
        raise WriteError(f"cannot write FVEC file {path}: {exc}") from exc


def read_fvec(path) -> LabeledFeatureSet:
    """Read an FVEC file, validating magic, counts, and finiteness."""
    try:
        raw = Path(path).read_bytes()
    except OSError as exc:
        raise WriteError(f"cannot read FVEC file {path}: {exc}") from exc
    if len(raw) < _HEADER.size or raw[:4] != FVEC_MAGIC:
        raise FileFormatError(f"not an FVEC file: {path}")
    _, n_rows, dim, n_classes = _HEADER.unpack_from(raw)
    expected = _HEADER.size + n_rows + n_rows * dim * 4
    if n_rows < 1 or dim < 1 or n_classes < 1 or len(raw) != expected:
        raise FileFormatError(f"corrupt FVEC: {path}")
    labels = np.frombuffer(raw, dtype=np.uint8, count=n_rows, offset=_HEADER.size)
    features = np.frombuffer(
        raw, dtype="<f4", count=n_rows * dim, offset=_HEADER.size + n_rows
    ).reshape(n_rows, dim)
    if np.any(labels >= n_classes):
        raise DataError(f"corrupt FVEC: label out of range in {path}")
    if not np.all(np.isfinite(features)):
        raise DataError(f"non-finite feature in {path}")
    return LabeledFeatureSet(features.copy(), labels.copy(), n_classes)
