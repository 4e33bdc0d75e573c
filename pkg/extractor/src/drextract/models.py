"""The pretrained-model registry: five penultimate-layer feature sources.

Each entry fixes the square input size, the activation width, and the
input preprocessing that ships with the network.  VGG16 contributes its
two fully-connected layers as separate sources; the other three expose
the global-average pool feeding their classifier head, obtained with
``include_top=False, pooling="avg"``.

TensorFlow imports lazily so that label parsing, FVEC handling, and
``--help`` never pay its startup cost.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError

_TF = None


def _tf():
    global _TF
    if _TF is None:
        import os

        os.environ.setdefault("TF_CPP_MIN_LOG_LEVEL", "2")
        import tensorflow as tf

        # Same inputs must yield byte-identical outputs across invocations.
        tf.config.experimental.enable_op_determinism()
        _TF = tf
    return _TF


@dataclass(frozen=True)
class ModelInfo:
    name: str
    input_size: int  # square side; networks see (size, size, 3)
    dim: int  # activation width written to the FVEC file
    preprocessing: str  # recorded in the sidecar report


_REGISTRY = {
    "vgg16_fc1": ModelInfo(
        "vgg16_fc1", 224, 4096, "keras vgg16 preprocess_input (RGB->BGR, ImageNet mean subtraction)"
    ),
    "vgg16_fc2": ModelInfo(
        "vgg16_fc2", 224, 4096, "keras vgg16 preprocess_input (RGB->BGR, ImageNet mean subtraction)"
    ),
    "xception": ModelInfo(
        "xception", 299, 2048, "keras xception preprocess_input (scale to [-1, 1])"
    ),
    "nasnet": ModelInfo(
        "nasnet", 331, 4032, "keras nasnet preprocess_input (scale to [-1, 1])"
    ),
    "inception_resnet_v2": ModelInfo(
        "inception_resnet_v2", 299, 1536, "keras inception_resnet_v2 preprocess_input (scale to [-1, 1])"
    ),
}

MODEL_NAMES = tuple(_REGISTRY)


def model_info(name: str) -> ModelInfo:
    try:
        return _REGISTRY[name]
    except KeyError:
        raise ConfigError(
            f"unknown model {name!r}; expected one of {', '.join(MODEL_NAMES)}"
        ) from None


def build_model(name: str, weights: str | None = "imagenet"):
    """Headless feature model with frozen weights.

    ``weights=None`` builds randomly initialized architectures (seeded, so
    repeated builds agree) — useful where the ImageNet weights cannot be
    downloaded; output widths are architecture-determined either way.
    """
    info = model_info(name)
    tf = _tf()
    if weights is None:
        tf.keras.utils.set_random_seed(0)
    apps = tf.keras.applications
    shape = (info.input_size, info.input_size, 3)
    if name in ("vgg16_fc1", "vgg16_fc2"):
        base = apps.VGG16(weights=weights, include_top=True)
        layer = "fc1" if name == "vgg16_fc1" else "fc2"
        model = tf.keras.Model(base.input, base.get_layer(layer).output)
    elif name == "xception":
        model = apps.Xception(weights=weights, include_top=False, pooling="avg", input_shape=shape)
    elif name == "nasnet":
        model = apps.NASNetLarge(weights=weights, include_top=False, pooling="avg", input_shape=shape)
    else:
        model = apps.InceptionResNetV2(
            weights=weights, include_top=False, pooling="avg", input_shape=shape
        )
    model.trainable = False
    return model


def preprocess_batch(name: str, batch: np.ndarray) -> np.ndarray:
    """Apply the network's own input preprocessing to a [0, 255] RGB batch."""
    model_info(name)
    apps = _tf().keras.applications
    module = {
        "vgg16_fc1": apps.vgg16,
        "vgg16_fc2": apps.vgg16,
        "xception": apps.xception,
        "nasnet": apps.nasnet,
        "inception_resnet_v2": apps.inception_resnet_v2,
    }[name]
    return module.preprocess_input(np.asarray(batch, dtype=np.float32))
