"""Blended multi-modal deep-feature pipeline for diabetic retinopathy
recognition: FVEC feature containers, pooling-based fusion, a from-scratch
MLP with input dropout, shallow baselines, evaluation metrics, and an
experiment harness."""

from .baselines import (
    GaussianNbModel,
    KnnModel,
    LogRegModel,
    fit_gnb,
    fit_logreg,
    predict_gnb,
    predict_knn,
    predict_knn_batch,
    predict_logreg,
)
from .errors import (
    AlignmentError,
    ConfigError,
    DataError,
    FileFormatError,
    PipelineError,
    WriteError,
)
from .experiment import (
    ExperimentConfig,
    ExperimentResult,
    load_config,
    make_synthetic_fixture,
    run_experiment,
)
from .features import (
    LabeledFeatureSet,
    SplitSpec,
    binarize_labels,
    read_fvec,
    split,
    split_indices,
    write_fvec,
)
from .figures import render_figures
from .fusion import BlendConfig, PoolMode, blend, blend_dataset, cross_pool, pool1d
from .metrics import (
    EvalReport,
    accuracy,
    classification_metrics,
    confusion_matrix,
    evaluate,
    kappa,
)
from .mlp import (
    Mlp,
    MlpConfig,
    TaskKind,
    TrainHistory,
    TrainSpec,
    init,
    load_checkpoint,
    predict,
    predict_proba,
    save_checkpoint,
    train,
)
from .report import emit_report, load_report_json, report_to_csv, report_to_json, report_to_text

__version__ = "0.1.0"
