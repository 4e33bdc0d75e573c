"""Run a directory of retinal images through one feature source.

Images are processed in filename-sorted order, which is the alignment
contract between modalities: extracting the same directory with two
different models yields row-aligned FVEC files that the training
pipeline may blend.  Alongside the FVEC file a ``<output>.json`` sidecar
records the model, the preprocessing applied, and the row order.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DataError, WriteError
from .fvec import write_fvec
from .labels import N_GRADES, read_labels_csv
from .models import build_model, model_info, preprocess_batch

IMAGE_EXTENSIONS = (".png", ".jpg", ".jpeg", ".bmp", ".tif", ".tiff")


@dataclass(frozen=True)
class ExtractSpec:
    model_name: str
    image_dir: Path
    labels_csv: Path
    output: Path
    weights: str | None = "imagenet"
    batch_size: int = 16

    def __post_init__(self):
        model_info(self.model_name)  # fail fast on unknown names
        if self.batch_size < 1:
            raise DataError(f"batch size must be >= 1, got {self.batch_size}")


def list_images(image_dir) -> list[Path]:
    image_dir = Path(image_dir)
    if not image_dir.is_dir():
        raise DataError(f"not a directory: {image_dir}")
    paths = sorted(
        p for p in image_dir.iterdir()
        if p.is_file() and p.suffix.lower() in IMAGE_EXTENSIONS
    )
    if not paths:
        raise DataError(f"no images ({'/'.join(IMAGE_EXTENSIONS)}) in {image_dir}")
    return paths


def load_batch(paths: list[Path], size: int) -> np.ndarray:
    """(n, size, size, 3) float32 RGB batch in [0, 255]."""
    from PIL import Image

    rows = np.empty((len(paths), size, size, 3), dtype=np.float32)
    for i, path in enumerate(paths):
        try:
            with Image.open(path) as img:
                resized = img.convert("RGB").resize((size, size), Image.BILINEAR)
        except OSError as exc:
            raise DataError(f"cannot decode image {path}: {exc}") from exc
        rows[i] = np.asarray(resized, dtype=np.float32)
    return rows


def extract(spec: ExtractSpec, model=None) -> Path:
    """Write activations + labels for every image; returns the output path."""
    info = model_info(spec.model_name)
    images = list_images(spec.image_dir)
    labels_map = read_labels_csv(spec.labels_csv)
    missing = [p.name for p in images if p.stem not in labels_map]
    if missing:
        raise DataError(
            f"no label for {len(missing)} image(s), first: {missing[0]!r}"
        )
    labels = np.array([labels_map[p.stem] for p in images], dtype=np.uint8)
    if model is None:
        model = build_model(spec.model_name, spec.weights)
    features = np.empty((len(images), info.dim), dtype=np.float32)
    for start in range(0, len(images), spec.batch_size):
        chunk = images[start : start + spec.batch_size]
        batch = preprocess_batch(spec.model_name, load_batch(chunk, info.input_size))
        activations = np.asarray(model.predict(batch, verbose=0))
        if activations.shape != (len(chunk), info.dim):
            raise DataError(
                f"{spec.model_name} produced shape {activations.shape}, "
                f"expected ({len(chunk)}, {info.dim})"
            )
        features[start : start + len(chunk)] = activations
    write_fvec(features, labels, N_GRADES, spec.output)
    _write_sidecar(spec, info, [p.stem for p in images])
    return Path(spec.output)


def _write_sidecar(spec: ExtractSpec, info, order: list[str]) -> None:
    payload = {
        "model": info.name,
        "dim": info.dim,
        "input_size": info.input_size,
        "preprocessing": info.preprocessing,
        "weights": spec.weights or "random (seeded)",
        "n_rows": len(order),
        "n_classes": N_GRADES,
        "row_order": order,
    }
    sidecar = Path(str(spec.output) + ".json")
    try:
        sidecar.write_text(json.dumps(payload, indent=2) + "\n")
    except OSError as exc:
        raise WriteError(f"cannot write sidecar {sidecar}: {exc}") from exc
