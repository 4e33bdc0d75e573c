"""FVEC writer/reader: the binary container the training pipeline consumes.

Layout (little-endian):

    offset  size          field
    0       4             magic "FVB1"
    4       4             u32 n_rows
    8       4             u32 dim
    12      2             u16 n_classes
    14      n_rows        u8 labels
    ...     n_rows*dim*4  float32 features, row-major

This must stay bit-exact with the consumer side; a 1-row, 1-dim file is
exactly 19 bytes.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from .errors import DataError, WriteError

FVEC_MAGIC = b"FVB1"
_HEADER = struct.Struct("<4sIIH")


def write_fvec(features: np.ndarray, labels: np.ndarray, n_classes: int, path) -> None:
    features = np.ascontiguousarray(features, dtype="<f4")
    labels = np.ascontiguousarray(labels, dtype=np.uint8)
    if features.ndim != 2 or features.shape[0] < 1 or features.shape[1] < 1:
        raise DataError(f"features must be a non-empty 2-D matrix, got {features.shape}")
    if labels.shape != (features.shape[0],):
        raise DataError(
            f"{labels.shape[0] if labels.ndim == 1 else labels.shape} labels "
            f"for {features.shape[0]} rows"
        )
    if not 1 <= n_classes <= 255:
        raise DataError(f"n_classes must be in [1, 255], got {n_classes}")
    if labels.size and labels.max() >= n_classes:
        raise DataError(f"label {labels.max()} out of range for {n_classes} classes")
    if not np.all(np.isfinite(features)):
        raise DataError("non-finite feature value")
    header = _HEADER.pack(FVEC_MAGIC, features.shape[0], features.shape[1], n_classes)
    try:
        Path(path).write_bytes(header + labels.tobytes() + features.tobytes())
    except OSError as exc:
        raise WriteError(f"cannot write {path}: {exc}") from exc


def read_fvec(path) -> tuple[np.ndarray, np.ndarray, int]:
    """(features, labels, n_classes) back from an FVEC file."""
    try:
        raw = Path(path).read_bytes()
    except OSError as exc:
        raise WriteError(f"cannot read {path}: {exc}") from exc
    if len(raw) < _HEADER.size or raw[:4] != FVEC_MAGIC:
        raise DataError(f"not an FVEC file: {path}")
    _, n_rows, dim, n_classes = _HEADER.unpack_from(raw)
    expected = _HEADER.size + n_rows + n_rows * dim * 4
    if n_rows < 1 or dim < 1 or n_classes < 1 or len(raw) != expected:
        raise DataError(f"corrupt FVEC: {path}")
    labels = np.frombuffer(raw, dtype=np.uint8, count=n_rows, offset=_HEADER.size)
    features = np.frombuffer(
        raw, dtype="<f4", count=n_rows * dim, offset=_HEADER.size + n_rows
    ).reshape(n_rows, dim)
    if labels.max() >= n_classes:
        raise DataError(f"label out of range in {path}")
    return features.copy(), labels.copy(), n_classes
