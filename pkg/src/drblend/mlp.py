"""From-scratch multilayer perceptron with dropout at the input layer.

Architecture: inverted dropout on the raw input, ReLU hidden layers, and
a sigmoid (binary) or softmax (multiclass) head.  Training is mini-batch
Adam on hand-derived backpropagation gradients, with optional early
stopping on validation loss.  Everything is deterministic in the seed.

The binary head is a single sigmoid unit trained with binary
cross-entropy; the multiclass head is a softmax trained with categorical
cross-entropy.  Probabilities are clamped to ``[1e-12, 1 - 1e-12]``
before logs so the loss stays finite.

Checkpoint layout (little-endian): magic ``b"MLP1"``; u32 task kind
(0 binary, 1 multiclass); u32 input dim; u32 output count; u32 input
dropout rate in parts per million; u32 hidden layer count; u32 per
hidden size; then float64 parameters per layer, weights row-major
followed by the bias vector.
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

import numpy as np

from .errors import DataError, FileFormatError, WriteError
from .features import LabeledFeatureSet

CHECKPOINT_MAGIC = b"MLP1"
PROB_CLAMP = 1e-12

# Hidden-layer presets: two layers for the binary identification task,
# three for severity grading; both with 0.2 input dropout.
IDENTIFY_HIDDEN = (256, 128)
SEVERITY_HIDDEN = (512, 256, 128)
DEFAULT_INPUT_DROPOUT = 0.2


class TaskKind(Enum):
    BINARY = "binary"
    MULTICLASS = "multiclass"


@dataclass(frozen=True)
class MlpConfig:
    input_dim: int
    hidden_sizes: tuple[int, ...]
    n_outputs: int
    input_dropout: float
    task: TaskKind

    def __post_init__(self):
        object.__setattr__(self, "hidden_sizes", tuple(int(h) for h in self.hidden_sizes))
        if self.input_dim < 1:
            raise DataError(f"input_dim must be positive, got {self.input_dim}")
        if any(h < 1 for h in self.hidden_sizes):
            raise DataError(f"hidden sizes must be positive, got {self.hidden_sizes}")
        if not 0.0 <= self.input_dropout < 1.0:
            raise DataError(
                f"input dropout rate must be in [0, 1), got {self.input_dropout}"
            )
        if self.task is TaskKind.BINARY and self.n_outputs != 1:
            raise DataError("binary task uses a single sigmoid output unit")
        if self.task is TaskKind.MULTICLASS and self.n_outputs < 2:
            raise DataError(
                f"multiclass task needs >= 2 outputs, got {self.n_outputs}"
            )

    @property
    def layer_sizes(self) -> tuple[int, ...]:
        return (self.input_dim, *self.hidden_sizes, self.n_outputs)


def config_for_task(
    task: TaskKind,
    input_dim: int,
    n_classes: int,
    hidden_sizes: tuple[int, ...] | None = None,
    input_dropout: float = DEFAULT_INPUT_DROPOUT,
) -> MlpConfig:
    """Build an MlpConfig with the per-task hidden-layer preset."""
    if task is TaskKind.BINARY:
        if n_classes != 2:
            raise DataError(f"binary task needs 2 classes, got {n_classes}")
        hidden = IDENTIFY_HIDDEN if hidden_sizes is None else tuple(hidden_sizes)
        return MlpConfig(input_dim, hidden, 1, input_dropout, task)
    hidden = SEVERITY_HIDDEN if hidden_sizes is None else tuple(hidden_sizes)
    return MlpConfig(input_dim, hidden, n_classes, input_dropout, task)


@dataclass
class Mlp:
    """Per-layer weights/biases plus the config they were built for.

    Treated as immutable once training returns it; ``train`` works on a
    private copy.
    """

    weights: list[np.ndarray]
    biases: list[np.ndarray]
    config: MlpConfig

    def copy(self) -> "Mlp":
        return Mlp([w.copy() for w in self.weights], [b.copy() for b in self.biases], self.config)

    def parameters(self) -> list[np.ndarray]:
        return self.weights + self.biases


def init(cfg: MlpConfig, seed: int) -> Mlp:
    """He-initialized weights (std sqrt(2/fan_in)) and zero biases."""
    rng = np.random.default_rng(seed)
    sizes = cfg.layer_sizes
    weights, biases = [], []
    for fan_in, fan_out in zip(sizes[:-1], sizes[1:]):
        weights.append(rng.normal(0.0, math.sqrt(2.0 / fan_in), (fan_in, fan_out)))
        biases.append(np.zeros(fan_out))
    return Mlp(weights, biases, cfg)


def _sigmoid(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def _softmax(z: np.ndarray) -> np.ndarray:
    shifted = z - z.max(axis=1, keepdims=True)
    ez = np.exp(shifted)
    return ez / ez.sum(axis=1, keepdims=True)


def sample_dropout_mask(
    rng: np.random.Generator, n_rows: int, cfg: MlpConfig
) -> np.ndarray | None:
    """Boolean keep-mask over input coordinates; None when the rate is 0."""
    if cfg.input_dropout == 0.0:
        return None
    return rng.random((n_rows, cfg.input_dim)) >= cfg.input_dropout


@dataclass
class ForwardCache:
    """Activations recorded by the forward pass, consumed by backprop."""

    x_dropped: np.ndarray
    hidden_pre: list[np.ndarray]
    hidden_act: list[np.ndarray]
    probs: np.ndarray


def forward(
    m: Mlp, x: np.ndarray, dropout_mask: np.ndarray | None = None
) -> tuple[np.ndarray, ForwardCache]:
    """Probabilities for a batch.  A mask enables inverted input dropout.

    Evaluation mode is simply ``dropout_mask=None``; survivors are scaled
    by ``1/(1 - rate)`` at train time so inference needs no correction.
    """
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 2 or x.shape[1] != m.config.input_dim:
        raise DataError(
            f"batch must be (n, {m.config.input_dim}), got shape {x.shape}"
        )
    if dropout_mask is not None:
        if dropout_mask.shape != x.shape:
            raise DataError(
                f"dropout mask shape {dropout_mask.shape} != batch shape {x.shape}"
            )
        x = x * dropout_mask / (1.0 - m.config.input_dropout)
    a = x
    hidden_pre, hidden_act = [], []
    for w, b in zip(m.weights[:-1], m.biases[:-1]):
        z = a @ w + b
        a = np.maximum(z, 0.0)
        hidden_pre.append(z)
        hidden_act.append(a)
    z_out = a @ m.weights[-1] + m.biases[-1]
    probs = _sigmoid(z_out) if m.config.task is TaskKind.BINARY else _softmax(z_out)
    return probs, ForwardCache(x, hidden_pre, hidden_act, probs)


def loss_value(probs: np.ndarray, labels: np.ndarray, task: TaskKind) -> float:
    """Mean cross-entropy of the true class, with probability clamping."""
    labels = np.asarray(labels)
    if probs.shape[0] != labels.shape[0]:
        raise DataError(
            f"{probs.shape[0]} probability rows for {labels.shape[0]} labels"
        )
    if task is TaskKind.BINARY:
        if np.any(labels > 1):
            raise DataError("binary loss expects labels in {0, 1}")
        p = np.clip(probs[:, 0], PROB_CLAMP, 1.0 - PROB_CLAMP)
        y = labels.astype(np.float64)
        return float(-np.mean(y * np.log(p) + (1.0 - y) * np.log(1.0 - p)))
    if np.any(labels >= probs.shape[1]):
        raise DataError(f"label out of range for {probs.shape[1]} classes")
    p_true = np.clip(probs[np.arange(len(labels)), labels], PROB_CLAMP, 1.0 - PROB_CLAMP)
    return float(-np.mean(np.log(p_true)))


def backward(m: Mlp, cache: ForwardCache, labels: np.ndarray) -> tuple[list[np.ndarray], list[np.ndarray]]:
    """Exact gradients of mean cross-entropy w.r.t. every weight and bias.

    Uses the softmax/sigmoid + cross-entropy cancellation, so the output
    delta is ``(p - y) / batch``.  The dropout mask is honored implicitly
    through the cached (already dropped) input.
    """
    n = cache.probs.shape[0]
    if m.config.task is TaskKind.BINARY:
        delta = (cache.probs - np.asarray(labels, dtype=np.float64)[:, None]) / n
    else:
        delta = cache.probs.copy()
        delta[np.arange(n), labels] -= 1.0
        delta /= n
    grads_w = [np.empty(0)] * len(m.weights)
    grads_b = [np.empty(0)] * len(m.biases)
    activations = [cache.x_dropped, *cache.hidden_act]
    for layer in reversed(range(len(m.weights))):
        grads_w[layer] = activations[layer].T @ delta
        grads_b[layer] = delta.sum(axis=0)
        if layer > 0:
            delta = (delta @ m.weights[layer].T) * (cache.hidden_pre[layer - 1] > 0)
    return grads_w, grads_b


def grad(
    m: Mlp,
    x: np.ndarray,
    labels: np.ndarray,
    dropout_mask: np.ndarray | None = None,
) -> tuple[list[np.ndarray], list[np.ndarray]]:
    """Gradients of ``loss(forward(x))`` honoring a fixed dropout mask."""
    _, cache = forward(m, x, dropout_mask)
    return backward(m, cache, labels)


@dataclass(frozen=True)
class TrainSpec:
    """Adam hyperparameters, batching, stopping rule, and the seed."""

    learning_rate: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8
    batch_size: int = 32
    max_epochs: int = 100
    patience: int = 10
    seed: int = 0

    def __post_init__(self):
        if self.learning_rate <= 0:
            raise DataError(f"learning rate must be positive, got {self.learning_rate}")
        if not (0 < self.beta1 < 1 and 0 < self.beta2 < 1):
            raise DataError(
                f"Adam betas must lie in (0, 1), got {self.beta1}, {self.beta2}"
            )
        if self.epsilon <= 0:
            raise DataError(f"epsilon must be positive, got {self.epsilon}")
        if self.batch_size < 1 or self.max_epochs < 1 or self.patience < 0:
            raise DataError("batch_size/max_epochs must be >= 1 and patience >= 0")


class AdamState:
    """First/second moment accumulators and the shared step counter."""

    def __init__(self, params: list[np.ndarray]):
        self.m = [np.zeros_like(p) for p in params]
        self.v = [np.zeros_like(p) for p in params]
        self.t = 0

    def step(self, params: list[np.ndarray], grads: list[np.ndarray], spec: TrainSpec) -> None:
        self.t += 1
        bc1 = 1.0 - spec.beta1**self.t
        bc2 = 1.0 - spec.beta2**self.t
        for p, g, m1, v2 in zip(params, grads, self.m, self.v):
            m1 *= spec.beta1
            m1 += (1.0 - spec.beta1) * g
            v2 *= spec.beta2
            v2 += (1.0 - spec.beta2) * g * g
            p -= spec.learning_rate * (m1 / bc1) / (np.sqrt(v2 / bc2) + spec.epsilon)


@dataclass
class TrainHistory:
    train_loss: list[float] = field(default_factory=list)
    val_loss: list[float] = field(default_factory=list)
    val_accuracy: list[float] = field(default_factory=list)
    epochs_run: int = 0
    best_epoch: int = 0  # 0-based index into the lists


def _check_task_labels(dataset: LabeledFeatureSet, cfg: MlpConfig) -> None:
    if dataset.dim != cfg.input_dim:
        raise DataError(
            f"feature dim {dataset.dim} does not match model input {cfg.input_dim}"
        )
    if cfg.task is TaskKind.BINARY and dataset.n_classes != 2:
        raise DataError("binary model requires a 2-class dataset")
    if cfg.task is TaskKind.MULTICLASS and dataset.n_classes != cfg.n_outputs:
        raise DataError(
            f"model has {cfg.n_outputs} outputs but dataset has "
            f"{dataset.n_classes} classes"
        )


def train(
    m: Mlp,
    train_set: LabeledFeatureSet,
    val_set: LabeledFeatureSet,
    spec: TrainSpec,
) -> tuple[Mlp, TrainHistory]:
    """Mini-batch Adam with per-epoch reshuffling and early stopping.

    Stops at ``max_epochs`` or once validation loss has failed to improve
    for ``patience`` consecutive epochs (``patience=0`` disables early
    stopping).  Returns the parameters of the best validation-loss epoch.
    """
    _check_task_labels(train_set, m.config)
    _check_task_labels(val_set, m.config)
    model = m.copy()
    rng = np.random.default_rng(spec.seed)
    x_train = train_set.features.astype(np.float64)
    y_train = train_set.labels
    x_val = val_set.features.astype(np.float64)
    y_val = val_set.labels
    n = x_train.shape[0]
    adam = AdamState(model.parameters())
    history = TrainHistory()
    best_val = math.inf
    best_params: list[np.ndarray] = model.parameters()
    bad_epochs = 0
    for _ in range(spec.max_epochs):
        perm = rng.permutation(n)
        total = 0.0
        for start in range(0, n, spec.batch_size):
            batch = perm[start : start + spec.batch_size]
            xb, yb = x_train[batch], y_train[batch]
            mask = sample_dropout_mask(rng, xb.shape[0], model.config)
            probs, cache = forward(model, xb, mask)
            total += loss_value(probs, yb, model.config.task) * batch.size
            grads_w, grads_b = backward(model, cache, yb)
            adam.step(model.parameters(), grads_w + grads_b, spec)
        history.train_loss.append(total / n)
        val_probs, _ = forward(model, x_val)
        val_loss = loss_value(val_probs, y_val, model.config.task)
        val_acc = float(np.mean(_decide(val_probs, model.config.task) == y_val))
        history.val_loss.append(val_loss)
        history.val_accuracy.append(val_acc)
        history.epochs_run += 1
        if val_loss < best_val:
            best_val = val_loss
            history.best_epoch = history.epochs_run - 1
            best_params = [p.copy() for p in model.parameters()]
            bad_epochs = 0
        else:
            bad_epochs += 1
            if spec.patience > 0 and bad_epochs >= spec.patience:
                break
    n_w = len(model.weights)
    model.weights = best_params[:n_w]
    model.biases = best_params[n_w:]
    return model, history


def _decide(probs: np.ndarray, task: TaskKind) -> np.ndarray:
    if task is TaskKind.BINARY:
        return (probs[:, 0] >= 0.5).astype(np.int64)
    return np.argmax(probs, axis=1)  # ties resolve to the lowest class index


def predict_proba(m: Mlp, x: np.ndarray) -> np.ndarray:
    """Evaluation-mode class probabilities (dropout disabled)."""
    probs, _ = forward(m, x)
    return probs


def predict(m: Mlp, data: LabeledFeatureSet | np.ndarray) -> np.ndarray:
    """Predicted class ids; binary thresholds at 0.5, multiclass argmax."""
    x = data.features if isinstance(data, LabeledFeatureSet) else np.asarray(data)
    return _decide(predict_proba(m, x), m.config.task)


def save_checkpoint(m: Mlp, path) -> None:
    """Write the checkpoint layout documented in the module docstring."""
    cfg = m.config
    kind = 0 if cfg.task is TaskKind.BINARY else 1
    header = CHECKPOINT_MAGIC + struct.pack(
        f"<IIIII{len(cfg.hidden_sizes)}I",
        kind,
        cfg.input_dim,
        cfg.n_outputs,
        round(cfg.input_dropout * 1_000_000),
        len(cfg.hidden_sizes),
        *cfg.hidden_sizes,
    )
    blobs = []
    for w, b in zip(m.weights, m.biases):
        blobs.append(np.ascontiguousarray(w, dtype="<f8").tobytes())
        blobs.append(np.ascontiguousarray(b, dtype="<f8").tobytes())
    try:
        Path(path).write_bytes(header + b"".join(blobs))
    except OSError as exc:
        raise WriteError(f"cannot write checkpoint {path}: {exc}") from exc


def load_checkpoint(path) -> Mlp:
    try:
        raw = Path(path).read_bytes()
    except OSError as exc:
        raise WriteError(f"cannot read checkpoint {path}: {exc}") from exc
    if len(raw) < 4 + 20 or raw[:4] != CHECKPOINT_MAGIC:
        raise FileFormatError(f"not an MLP checkpoint: {path}")
    kind, input_dim, n_outputs, dropout_ppm, n_hidden = struct.unpack_from("<IIIII", raw, 4)
    offset = 24
    if len(raw) < offset + 4 * n_hidden:
        raise FileFormatError(f"corrupt checkpoint: {path}")
    hidden = struct.unpack_from(f"<{n_hidden}I", raw, offset)
    offset += 4 * n_hidden
    cfg = MlpConfig(
        input_dim,
        hidden,
        n_outputs,
        dropout_ppm / 1_000_000,
        TaskKind.BINARY if kind == 0 else TaskKind.MULTICLASS,
    )
    sizes = cfg.layer_sizes
    n_params = sum(i * o + o for i, o in zip(sizes[:-1], sizes[1:]))
    if len(raw) != offset + 8 * n_params:
        raise FileFormatError(f"corrupt checkpoint: {path}")
    flat = np.frombuffer(raw, dtype="<f8", offset=offset)
    if not np.all(np.isfinite(flat)):
        raise DataError(f"non-finite parameter in checkpoint {path}")
    weights, biases = [], []
    pos = 0
    for fan_in, fan_out in zip(sizes[:-1], sizes[1:]):
        weights.append(flat[pos : pos + fan_in * fan_out].reshape(fan_in, fan_out).copy())
        pos += fan_in * fan_out
        biases.append(flat[pos : pos + fan_out].copy())
        pos += fan_out
    return Mlp(weights, biases, cfg)
