"""One-shot experiment harness: config, pipeline, and synthetic fixtures.

A run follows the same sequence for every model: load the per-modality
FVEC files, optionally collapse labels to the binary identification
task, compute one train/test split on row indices shared by all
modalities, blend (or select one modality), fit the configured model,
and score the held-out part.  The whole run is a pure function of the
config and its seeds.

Configs are flat ``key=value`` text files (``#`` comments allowed) with
dotted keys such as ``train.lr=0.001``; the CLI can override any key.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import baselines, mlp
from .errors import ConfigError, DataError
from .features import (
    LabeledFeatureSet,
    SplitSpec,
    binarize_labels,
    read_fvec,
    split_indices,
    write_fvec,
)
from .figures import render_figures
from .fusion import BlendConfig, PoolMode, blend_dataset
from .metrics import AVERAGINGS, EvalReport, evaluate
from .mlp import TaskKind, TrainHistory, TrainSpec
from .report import emit_report, report_to_json

MODALITIES = ("fc1", "fc2", "third")
TASKS = ("identify", "severity")
MODELS = ("dnn", "logreg", "knn", "gnb")


@dataclass(frozen=True)
class ExperimentConfig:
    features: dict[str, Path]  # modality name -> FVEC path
    task: str = "identify"
    blend: BlendConfig | None = None
    modality: str | None = None  # uni-modal source when blend is None
    model: str = "dnn"
    knn_k: int = 5
    hidden_sizes: tuple[int, ...] | None = None  # None -> per-task preset
    input_dropout: float = mlp.DEFAULT_INPUT_DROPOUT
    averaging: str = "weighted"
    split: SplitSpec = field(default_factory=SplitSpec)
    train: TrainSpec = field(default_factory=TrainSpec)
    csv_path: Path | None = None
    text_path: Path | None = None
    json_path: Path | None = None
    figures_dir: Path | None = None
    checkpoint_path: Path | None = None

    def __post_init__(self):
        if self.task not in TASKS:
            raise ConfigError(f"task must be one of {TASKS}, got {self.task!r}")
        if self.model not in MODELS:
            raise ConfigError(f"model must be one of {MODELS}, got {self.model!r}")
        if self.averaging not in AVERAGINGS:
            raise ConfigError(
                f"averaging must be one of {AVERAGINGS}, got {self.averaging!r}"
            )
        unknown = set(self.features) - set(MODALITIES)
        if unknown:
            raise ConfigError(f"unknown modalities {sorted(unknown)}")
        if self.blend is not None:
            missing = {"fc1", "fc2"} - set(self.features)
            if missing:
                raise ConfigError(
                    f"blended runs need fc1 and fc2 feature files; missing {sorted(missing)}"
                )
        else:
            if self.modality is None and len(self.features) == 1:
                object.__setattr__(self, "modality", next(iter(self.features)))
            if self.modality not in self.features:
                raise ConfigError(
                    "uni-modal runs must name exactly one configured modality "
                    f"(modality={self.modality!r}, files={sorted(self.features)})"
                )
        if self.model == "logreg" and self.task != "identify":
            raise ConfigError("logistic regression is binary-only; use task=identify")
        if self.model == "knn" and self.knn_k < 1:
            raise ConfigError(f"knn k must be >= 1, got {self.knn_k}")

    def used_modalities(self) -> list[str]:
        if self.blend is None:
            return [self.modality]
        return [m for m in ("fc1", "fc2", "third") if m in self.features]


@dataclass
class ExperimentResult:
    report: EvalReport
    history: TrainHistory | None
    train_indices: np.ndarray
    test_indices: np.ndarray


def _fit_and_predict(
    cfg: ExperimentConfig,
    train_set: LabeledFeatureSet,
    test_set: LabeledFeatureSet,
) -> tuple[np.ndarray, TrainHistory | None, mlp.Mlp | None]:
    if cfg.model == "dnn":
        task = TaskKind.BINARY if cfg.task == "identify" else TaskKind.MULTICLASS
        net_cfg = mlp.config_for_task(
            task, train_set.dim, train_set.n_classes, cfg.hidden_sizes, cfg.input_dropout
        )
        net = mlp.init(net_cfg, cfg.train.seed)
        trained, history = mlp.train(net, train_set, test_set, cfg.train)
        return mlp.predict(trained, test_set), history, trained
    if cfg.model == "logreg":
        model, history = baselines.fit_logreg(train_set, test_set, cfg.train)
        return baselines.predict_logreg(model, test_set.features), history, model.net
    if cfg.model == "knn":
        knn = baselines.KnnModel(train_set, cfg.knn_k)
        return baselines.predict_knn_batch(knn, test_set.features), None, None
    gnb = baselines.fit_gnb(train_set)
    return baselines.predict_gnb(gnb, test_set.features), None, None


def run_experiment(cfg: ExperimentConfig) -> ExperimentResult:
    """Execute the full pipeline and write any configured outputs."""
    sets = {name: read_fvec(cfg.features[name]) for name in cfg.used_modalities()}
    if cfg.task == "identify":
        sets = {name: binarize_labels(s) for name, s in sets.items()}
    first = next(iter(sets.values()))
    # One index partition shared by all modalities: no train/test leakage
    # and paired comparisons between uni-modal and blended runs.
    train_idx, test_idx = split_indices(first.labels, cfg.split)
    if cfg.blend is not None:
        train_set = blend_dataset(
            sets["fc1"].take(train_idx),
            sets["fc2"].take(train_idx),
            sets["third"].take(train_idx) if "third" in sets else None,
            cfg.blend,
        )
        test_set = blend_dataset(
            sets["fc1"].take(test_idx),
            sets["fc2"].take(test_idx),
            sets["third"].take(test_idx) if "third" in sets else None,
            cfg.blend,
        )
    else:
        train_set = first.take(train_idx)
        test_set = first.take(test_idx)
    predictions, history, net = _fit_and_predict(cfg, train_set, test_set)
    epochs = history.epochs_run if history else 0
    final_loss = history.train_loss[history.best_epoch] if history else 0.0
    report = evaluate(
        test_set.labels,
        predictions,
        test_set.n_classes,
        epochs_run=epochs,
        final_loss=final_loss,
        averaging=cfg.averaging,
    )
    if cfg.csv_path is not None:
        emit_report(report, "csv", cfg.csv_path)
    if cfg.text_path is not None:
        emit_report(report, "text", cfg.text_path)
    if cfg.json_path is not None:
        Path(cfg.json_path).write_text(report_to_json(report, history))
    if cfg.figures_dir is not None:
        render_figures(report, history, cfg.figures_dir)
    if cfg.checkpoint_path is not None and net is not None:
        mlp.save_checkpoint(net, cfg.checkpoint_path)
    return ExperimentResult(report, history, train_idx, test_idx)


# --- config file parsing -------------------------------------------------

_POOL_NAMES = {m.value: m for m in PoolMode}


def _parse_pool(value: str) -> PoolMode:
    if value not in _POOL_NAMES:
        raise ConfigError(
            f"unknown pool mode {value!r}; expected one of {sorted(_POOL_NAMES)}"
        )
    return _POOL_NAMES[value]


def _parse_bool(value: str) -> bool:
    if value.lower() in ("true", "1", "yes"):
        return True
    if value.lower() in ("false", "0", "no"):
        return False
    raise ConfigError(f"expected a boolean, got {value!r}")


def _parse_int_tuple(value: str) -> tuple[int, ...]:
    try:
        return tuple(int(part) for part in value.split(",") if part.strip())
    except ValueError as exc:
        raise ConfigError(f"expected comma-separated integers, got {value!r}") from exc


def parse_config_text(text: str) -> dict[str, str]:
    """Flat key=value mapping from config-file text."""
    mapping: dict[str, str] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise ConfigError(f"line {lineno}: expected key=value, got {line!r}")
        key, value = stripped.split("=", 1)
        mapping[key.strip()] = value.strip()
    return mapping


def _num(kind, key: str, value: str):
    try:
        return kind(value)
    except ValueError as exc:
        raise ConfigError(f"{key}: expected {kind.__name__}, got {value!r}") from exc


def config_from_mapping(mapping: dict[str, str]) -> ExperimentConfig:
    """Typed ExperimentConfig from a flat string mapping; rejects unknown keys."""
    m = dict(mapping)

    def pop(key, default=None):
        return m.pop(key, default)

    features = {
        name: Path(m.pop(f"features.{name}"))
        for name in MODALITIES
        if f"features.{name}" in m
    }
    if not features:
        raise ConfigError("no feature files configured (features.fc1= ...)")
    blend = None
    stage_keys = [k for k in ("blend.stage1", "blend.stage2", "blend.stage3") if k in m]
    if stage_keys:
        blend = BlendConfig(
            stage1=_parse_pool(pop("blend.stage1", "max")),
            stage2=_parse_pool(pop("blend.stage2", "avg")),
            stage3=_parse_pool(pop("blend.stage3", "avg")),
        )
    split = SplitSpec(
        train_fraction=_num(float, "split.train_fraction", pop("split.train_fraction", "0.8")),
        seed=_num(int, "split.seed", pop("split.seed", "0")),
        stratified=_parse_bool(pop("split.stratified", "false")),
    )
    train = TrainSpec(
        learning_rate=_num(float, "train.lr", pop("train.lr", "0.001")),
        beta1=_num(float, "train.beta1", pop("train.beta1", "0.9")),
        beta2=_num(float, "train.beta2", pop("train.beta2", "0.999")),
        epsilon=_num(float, "train.epsilon", pop("train.epsilon", "1e-8")),
        batch_size=_num(int, "train.batch_size", pop("train.batch_size", "32")),
        max_epochs=_num(int, "train.max_epochs", pop("train.max_epochs", "100")),
        patience=_num(int, "train.patience", pop("train.patience", "10")),
        seed=_num(int, "train.seed", pop("train.seed", "0")),
    )
    hidden = pop("dnn.hidden")
    dropout = pop("dnn.dropout")
    cfg = ExperimentConfig(
        features=features,
        task=pop("task", "identify"),
        blend=blend,
        modality=pop("modality"),
        model=pop("model", "dnn"),
        knn_k=_num(int, "model.knn_k", pop("model.knn_k", "5")),
        hidden_sizes=None if hidden is None else _parse_int_tuple(hidden),
        input_dropout=(
            mlp.DEFAULT_INPUT_DROPOUT
            if dropout is None
            else _num(float, "dnn.dropout", dropout)
        ),
        averaging=pop("averaging", "weighted"),
        split=split,
        train=train,
        csv_path=_opt_path(pop("report.csv")),
        text_path=_opt_path(pop("report.text")),
        json_path=_opt_path(pop("report.json")),
        figures_dir=_opt_path(pop("report.figures")),
        checkpoint_path=_opt_path(pop("checkpoint")),
    )
    if m:
        raise ConfigError(f"unknown config keys: {sorted(m)}")
    return cfg


def _opt_path(value: str | None) -> Path | None:
    return None if value is None else Path(value)


def load_config(path, overrides: dict[str, str] | None = None) -> ExperimentConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    mapping = parse_config_text(text)
    if overrides:
        mapping.update(overrides)
    return config_from_mapping(mapping)


# --- synthetic fixtures --------------------------------------------------


def make_synthetic_fixture(
    out_dir,
    n_per_class: int = 50,
    n_classes: int = 5,
    dims: tuple[int, int, int] = (64, 64, 32),
    separation: float = 10.0,
    seed: int = 0,
) -> dict[str, Path]:
    """Three aligned FVEC files of Gaussian class blobs, one per modality.

    Class means are random directions scaled so that any two class
    centers sit roughly ``separation`` apart (per modality, unit noise).
    Rows are permuted identically across modalities, so the files honor
    the blend alignment contract.
    """
    d1, d2, d3 = dims
    if d1 != d2 or d3 != d1 // 2 or d1 < 2:
        raise DataError(
            f"fixture dims must satisfy d_fc1 == d_fc2 and d_third == d_fc1/2, got {dims}"
        )
    if n_per_class < 1 or not 1 <= n_classes <= 255:
        raise DataError(
            f"need n_per_class >= 1 and 1 <= n_classes <= 255, got "
            f"{n_per_class}/{n_classes}"
        )
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(seed)
    n_total = n_per_class * n_classes
    ordered = np.repeat(np.arange(n_classes, dtype=np.uint8), n_per_class)
    perm = rng.permutation(n_total)
    labels = ordered[perm]
    paths: dict[str, Path] = {}
    for name, dim in zip(MODALITIES, dims):
        directions = rng.normal(size=(n_classes, dim))
        directions /= np.linalg.norm(directions, axis=1, keepdims=True)
        means = directions * (separation / np.sqrt(2.0))
        rows = means[ordered] + rng.normal(size=(n_total, dim))
        path = out_dir / f"{name}.fvec"
        write_fvec(
            LabeledFeatureSet(rows[perm].astype(np.float32), labels, n_classes), path
        )
        paths[name] = path
    return paths
