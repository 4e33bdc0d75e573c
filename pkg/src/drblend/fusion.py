"""Pooling operators and the three-stage blend of multi-modal deep features.

Two families of operators:

* ``pool1d`` halves one vector by combining non-overlapping adjacent
  pairs ``(u[2i], u[2i+1])`` with max, min, mean, or sum.  An unpaired
  trailing element of an odd-length input is dropped, so the output
  dimension is always ``floor(d / 2)``.
* ``cross_pool`` combines two equal-length vectors element-wise with the
  same four reducers.

``blend`` chains them: 1-D pooling of the two fully-connected modalities,
cross pooling of the pooled pair, then cross pooling with the third
(already half-dimensional) modality.  The default configuration is
max for stage 1 and average for stages 2 and 3.

All arithmetic runs in float64; results are stored as float32 to match
the on-disk feature format.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import AlignmentError, DataError
from .features import LabeledFeatureSet


class PoolMode(Enum):
    MAX = "max"
    MIN = "min"
    AVG = "avg"
    SUM = "sum"


_REDUCERS = {
    PoolMode.MAX: np.max,
    PoolMode.MIN: np.min,
    PoolMode.AVG: np.mean,
    PoolMode.SUM: np.sum,
}


@dataclass(frozen=True)
class BlendConfig:
    """Pool mode for each fusion stage (1-D, pair cross, third cross)."""

    stage1: PoolMode = PoolMode.MAX
    stage2: PoolMode = PoolMode.AVG
    stage3: PoolMode = PoolMode.AVG


DEFAULT_BLEND = BlendConfig()


def _pool1d_matrix(x: np.ndarray, mode: PoolMode) -> np.ndarray:
    d = x.shape[-1]
    paired = x[..., : 2 * (d // 2)].astype(np.float64).reshape(*x.shape[:-1], d // 2, 2)
    return _REDUCERS[mode](paired, axis=-1)


def _cross_matrix(x: np.ndarray, y: np.ndarray, mode: PoolMode) -> np.ndarray:
    stacked = np.stack([x, y]).astype(np.float64)
    return _REDUCERS[mode](stacked, axis=0)


def pool1d(u, mode: PoolMode) -> np.ndarray:
    """Halve *u* by pooling adjacent non-overlapping pairs."""
    u = np.asarray(u, dtype=np.float64)
    if u.ndim != 1 or u.size < 2:
        raise DataError(f"pool1d needs a 1-D vector of dim >= 2, got shape {u.shape}")
    return _pool1d_matrix(u, mode).astype(np.float32)


def cross_pool(x, y, mode: PoolMode) -> np.ndarray:
    """Element-wise pooling of two equal-length vectors."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape or x.ndim != 1:
        raise DataError(
            f"cross_pool needs two equal-length vectors, got dims {x.shape} and {y.shape}"
        )
    return _cross_matrix(x, y, mode).astype(np.float32)


def _check_blend_dims(d_fc1: int, d_fc2: int, d_third: int | None) -> None:
    if d_fc1 != d_fc2:
        raise DataError(f"fc1/fc2 dims must match, got {d_fc1} and {d_fc2}")
    if d_fc1 < 2:
        raise DataError(f"fc dims must be >= 2 to pool, got {d_fc1}")
    if d_third is not None and d_third != d_fc1 // 2:
        raise DataError(
            f"third modality dim must equal floor(fc dim / 2) = {d_fc1 // 2}, "
            f"got {d_third}"
        )


def blend(v_fc1, u_fc2, w_third, cfg: BlendConfig = DEFAULT_BLEND) -> np.ndarray:
    """Fuse one row of each modality into a single blended vector.

    With ``w_third=None`` the blend stops after stage 2 (two-modality
    variant); otherwise the output has the third modality's dimension.
    """
    v = np.asarray(v_fc1, dtype=np.float64)
    u = np.asarray(u_fc2, dtype=np.float64)
    w = None if w_third is None else np.asarray(w_third, dtype=np.float64)
    _check_blend_dims(v.shape[-1], u.shape[-1], None if w is None else w.shape[-1])
    pooled = _cross_matrix(
        _pool1d_matrix(v, cfg.stage1), _pool1d_matrix(u, cfg.stage1), cfg.stage2
    )
    if w is not None:
        pooled = _cross_matrix(pooled, w, cfg.stage3)
    return pooled.astype(np.float32)


def blend_dataset(
    fc1: LabeledFeatureSet,
    fc2: LabeledFeatureSet,
    third: LabeledFeatureSet | None,
    cfg: BlendConfig = DEFAULT_BLEND,
) -> LabeledFeatureSet:
    """Row-wise blend of aligned modality datasets; labels pass through.

    The modalities must have been extracted from the same image ordering:
    equal row counts and identical labels row-for-row.
    """
    sets = [fc1, fc2] + ([] if third is None else [third])
    counts = {s.n_rows for s in sets}
    if len(counts) != 1:
        raise AlignmentError(f"modality row counts differ: {[s.n_rows for s in sets]}")
    if len({s.n_classes for s in sets}) != 1:
        raise AlignmentError(
            f"modality n_classes differ: {[s.n_classes for s in sets]}"
        )
    for i, other in enumerate(sets[1:], start=2):
        if not np.array_equal(fc1.labels, other.labels):
            raise AlignmentError(
                f"labels of modality 1 and modality {i} disagree; the feature "
                "files were not extracted from the same image ordering"
            )
    _check_blend_dims(fc1.dim, fc2.dim, None if third is None else third.dim)
    pooled = _cross_matrix(
        _pool1d_matrix(fc1.features, cfg.stage1),
        _pool1d_matrix(fc2.features, cfg.stage1),
        cfg.stage2,
    )
    if third is not None:
        pooled = _cross_matrix(pooled, third.features.astype(np.float64), cfg.stage3)
    return LabeledFeatureSet(pooled.astype(np.float32), fc1.labels, fc1.n_classes)
