"""Penultimate-layer feature extraction for retinal images.

Turns a directory of fundus photographs into FVEC feature files — one per
pretrained model — row-aligned by filename sort so the training pipeline
can blend them.
"""

from .errors import ConfigError, DataError, ExtractError, WriteError
from .extract import IMAGE_EXTENSIONS, ExtractSpec, extract, list_images, load_batch
from .fvec import FVEC_MAGIC, read_fvec, write_fvec
from .labels import N_GRADES, read_labels_csv
from .models import MODEL_NAMES, ModelInfo, build_model, model_info, preprocess_batch

__version__ = "0.1.0"

__all__ = [
    "ConfigError",
    "DataError",
    "ExtractError",
    "WriteError",
    "IMAGE_EXTENSIONS",
    "ExtractSpec",
    "extract",
    "list_images",
    "load_batch",
    "FVEC_MAGIC",
    "read_fvec",
    "write_fvec",
    "N_GRADES",
    "read_labels_csv",
    "MODEL_NAMES",
    "ModelInfo",
    "build_model",
    "model_info",
    "preprocess_batch",
    "__version__",
]
