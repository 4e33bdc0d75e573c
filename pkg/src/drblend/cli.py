"""Command-line harness.

Verbs:

* ``fixture``    generate three aligned synthetic FVEC files
* ``fuse``       blend two or three FVEC files into one
* ``train``      split one FVEC file and train the network
* ``eval``       score a checkpoint against an FVEC file
* ``experiment`` the one-shot pipeline driven by a config file
* ``report``     re-render a saved JSON report as text/CSV/figures

Exit codes: 0 success, 2 config error, 3 data/alignment error, 4 I/O
error.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import experiment as exp
from . import mlp
from .errors import ConfigError, DataError, PipelineError, WriteError
from .features import SplitSpec, binarize_labels, read_fvec, split_indices, write_fvec
from .figures import render_figures
from .fusion import BlendConfig, PoolMode, blend_dataset
from .metrics import evaluate
from .mlp import TaskKind, TrainSpec
from .report import emit_report, load_report_json, report_to_json


def _split_spec(args) -> SplitSpec:
    return SplitSpec(args.train_fraction, args.split_seed, args.stratified)


def _train_spec(args) -> TrainSpec:
    return TrainSpec(
        learning_rate=args.lr,
        beta1=args.beta1,
        beta2=args.beta2,
        epsilon=args.epsilon,
        batch_size=args.batch_size,
        max_epochs=args.max_epochs,
        patience=args.patience,
        seed=args.seed,
    )


def _add_split_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--train-fraction", type=float, default=0.8)
    p.add_argument("--split-seed", type=int, default=0)
    p.add_argument("--stratified", action="store_true")


def _add_train_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--lr", type=float, default=1e-3)
    p.add_argument("--beta1", type=float, default=0.9)
    p.add_argument("--beta2", type=float, default=0.999)
    p.add_argument("--epsilon", type=float, default=1e-8)
    p.add_argument("--batch-size", type=int, default=32)
    p.add_argument("--max-epochs", type=int, default=100)
    p.add_argument("--patience", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)


def _add_report_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--csv", type=Path, help="write the CSV report here")
    p.add_argument("--text", type=Path, help="write the aligned text report here")
    p.add_argument("--json", type=Path, help="write the JSON report here")
    p.add_argument("--figures", type=Path, help="render figures into this directory")


def _dims(value: str) -> tuple[int, ...]:
    try:
        parts = tuple(int(p) for p in value.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers: {value!r}")
    return parts


def cmd_fixture(args) -> int:
    dims = args.dims
    if len(dims) != 3:
        raise ConfigError(f"--dims needs three values d_fc1,d_fc2,d_third, got {dims}")
    paths = exp.make_synthetic_fixture(
        args.out,
        n_per_class=args.n_per_class,
        n_classes=args.n_classes,
        dims=dims,
        separation=args.separation,
        seed=args.seed,
    )
    for name, path in paths.items():
        print(f"{name}: {path}")
    return 0


def cmd_fuse(args) -> int:
    cfg = BlendConfig(
        PoolMode(args.stage1), PoolMode(args.stage2), PoolMode(args.stage3)
    )
    fc1 = read_fvec(args.fc1)
    fc2 = read_fvec(args.fc2)
    third = read_fvec(args.third) if args.third else None
    blended = blend_dataset(fc1, fc2, third, cfg)
    write_fvec(blended, args.out)
    print(f"blended {blended.n_rows} rows -> dim {blended.dim}: {args.out}")
    return 0


def _load_task_set(path, task: str):
    dataset = read_fvec(path)
    if task == "identify":
        dataset = binarize_labels(dataset)
    return dataset


def cmd_train(args) -> int:
    dataset = _load_task_set(args.features, args.task)
    train_idx, test_idx = split_indices(dataset.labels, _split_spec(args))
    train_set, val_set = dataset.take(train_idx), dataset.take(test_idx)
    task = TaskKind.BINARY if args.task == "identify" else TaskKind.MULTICLASS
    cfg = mlp.config_for_task(
        task, dataset.dim, dataset.n_classes, args.hidden, args.dropout
    )
    net = mlp.init(cfg, args.seed)
    trained, history = mlp.train(net, train_set, val_set, _train_spec(args))
    mlp.save_checkpoint(trained, args.checkpoint)
    if args.history:
        preds = mlp.predict(trained, val_set)
        report = evaluate(
            val_set.labels,
            preds,
            val_set.n_classes,
            epochs_run=history.epochs_run,
            final_loss=history.train_loss[history.best_epoch],
        )
        Path(args.history).write_text(report_to_json(report, history))
    print(
        f"trained {history.epochs_run} epochs "
        f"(best epoch {history.best_epoch + 1}, "
        f"val loss {history.val_loss[history.best_epoch]:.4f}); "
        f"checkpoint: {args.checkpoint}"
    )
    return 0


def cmd_eval(args) -> int:
    net = mlp.load_checkpoint(args.checkpoint)
    task = "identify" if net.config.task is TaskKind.BINARY else "severity"
    dataset = _load_task_set(args.features, task)
    if args.test_only:
        _, test_idx = split_indices(dataset.labels, _split_spec(args))
        dataset = dataset.take(test_idx)
    probs = mlp.predict_proba(net, dataset.features.astype(float))
    loss = mlp.loss_value(probs, dataset.labels, net.config.task)
    preds = mlp.predict(net, dataset)
    report = evaluate(dataset.labels, preds, dataset.n_classes, final_loss=loss)
    _emit_requested(report, None, args)
    print(f"accuracy {100 * report.accuracy:.2f}%  kappa {100 * report.kappa:.2f}%")
    return 0


def cmd_experiment(args) -> int:
    overrides = {}
    for item in args.set or []:
        if "=" not in item:
            raise ConfigError(f"--set expects key=value, got {item!r}")
        key, value = item.split("=", 1)
        overrides[key.strip()] = value.strip()
    cfg = exp.load_config(args.config, overrides)
    result = exp.run_experiment(cfg)
    report = result.report
    print(
        f"task={cfg.task} model={cfg.model} "
        f"accuracy {100 * report.accuracy:.2f}%  kappa {100 * report.kappa:.2f}%  "
        f"epochs {report.epochs_run}  loss {report.final_loss:.4f}"
    )
    return 0


def cmd_report(args) -> int:
    report, history = load_report_json(args.report)
    _emit_requested(report, history, args)
    return 0


def _emit_requested(report, history, args) -> None:
    if args.csv:
        emit_report(report, "csv", args.csv)
    if args.text:
        emit_report(report, "text", args.text)
    if getattr(args, "json", None):
        Path(args.json).write_text(report_to_json(report, history))
    if args.figures:
        render_figures(report, history, args.figures)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="drblend",
        description="Blended multi-modal deep-feature pipeline for "
        "diabetic retinopathy recognition",
    )
    sub = parser.add_subparsers(dest="verb", required=True)

    p = sub.add_parser("fixture", help="generate aligned synthetic FVEC files")
    p.add_argument("--out", type=Path, required=True, help="output directory")
    p.add_argument("--n-per-class", type=int, default=50)
    p.add_argument("--n-classes", type=int, default=5)
    p.add_argument("--dims", type=_dims, default=(64, 64, 32))
    p.add_argument("--separation", type=float, default=10.0)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_fixture)

    p = sub.add_parser("fuse", help="blend FVEC files into one")
    p.add_argument("--fc1", type=Path, required=True)
    p.add_argument("--fc2", type=Path, required=True)
    p.add_argument("--third", type=Path)
    p.add_argument("--stage1", default="max", choices=["max", "min", "avg", "sum"])
    p.add_argument("--stage2", default="avg", choices=["max", "min", "avg", "sum"])
    p.add_argument("--stage3", default="avg", choices=["max", "min", "avg", "sum"])
    p.add_argument("--out", type=Path, required=True)
    p.set_defaults(func=cmd_fuse)

    p = sub.add_parser("train", help="split one FVEC file and train the network")
    p.add_argument("--features", type=Path, required=True)
    p.add_argument("--task", required=True, choices=["identify", "severity"])
    p.add_argument("--hidden", type=_dims, help="hidden sizes, e.g. 512,256,128")
    p.add_argument("--dropout", type=float, default=mlp.DEFAULT_INPUT_DROPOUT)
    p.add_argument("--checkpoint", type=Path, required=True)
    p.add_argument("--history", type=Path, help="write JSON report + history here")
    _add_split_args(p)
    _add_train_args(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval", help="score a checkpoint against an FVEC file")
    p.add_argument("--checkpoint", type=Path, required=True)
    p.add_argument("--features", type=Path, required=True)
    p.add_argument(
        "--test-only",
        action="store_true",
        help="evaluate only the test part of the split instead of the whole file",
    )
    _add_split_args(p)
    _add_report_args(p)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("experiment", help="one-shot pipeline from a config file")
    p.add_argument("--config", type=Path, required=True)
    p.add_argument(
        "--set",
        action="append",
        metavar="KEY=VALUE",
        help="override one config key (repeatable)",
    )
    p.set_defaults(func=cmd_experiment)

    p = sub.add_parser("report", help="re-render a saved JSON report")
    p.add_argument("--report", type=Path, required=True)
    _add_report_args(p)
    p.set_defaults(func=cmd_report)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 3
    except (WriteError, OSError) as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 4
    except PipelineError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
