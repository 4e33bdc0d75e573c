"""Release gate: one test per headline guarantee, one PASS/FAIL line each.

Run with ``pytest tests/test_acceptance.py -s`` to see the verdict lines.
Every oracle here is independent of the library code it checks: pooling
is re-derived with pure-Python loops, gradients with central finite
differences, and kappa from hand-computed values.
"""

import os
import time
from contextlib import contextmanager

import numpy as np
import pytest

from drblend.cli import main
from drblend.experiment import ExperimentConfig, make_synthetic_fixture, run_experiment
from drblend.features import SplitSpec
from drblend.fusion import DEFAULT_BLEND, PoolMode, blend, cross_pool, pool1d
from drblend.metrics import accuracy, kappa
from drblend.mlp import (
    MlpConfig,
    TaskKind,
    TrainSpec,
    forward,
    grad,
    init,
    loss_value,
    sample_dropout_mask,
)

SCALAR_OPS = {
    PoolMode.MAX: max,
    PoolMode.MIN: min,
    PoolMode.AVG: lambda a, b: (a + b) / 2.0,
    PoolMode.SUM: lambda a, b: a + b,
}

FIXTURE_KW = dict(n_per_class=50, n_classes=5, dims=(64, 64, 32), seed=7)
RUN_KW = dict(
    task="severity",
    blend=DEFAULT_BLEND,
    hidden_sizes=(64, 32, 16),  # severity preset halved down to the 32-wide input
    split=SplitSpec(0.8, seed=3),
    train=TrainSpec(seed=11),
)


@contextmanager
def verdict(name):
    try:
        yield
    except BaseException:
        print(f"FAIL: {name}")
        raise
    print(f"PASS: {name}")


def test_fusion_oracle_equivalence():
    with verdict("fusion oracle equivalence (1000 vectors per mode, dims 2-64)"):
        rng = np.random.default_rng(2024)
        start = time.perf_counter()
        for mode, op in SCALAR_OPS.items():
            for _ in range(1000):
                d = int(rng.integers(2, 65))
                u = rng.normal(scale=5.0, size=d)
                got = pool1d(u, mode).astype(np.float64)
                want = np.array(
                    [op(u[2 * i], u[2 * i + 1]) for i in range(d // 2)]
                )
                x, y = rng.normal(scale=5.0, size=(2, d))
                got_x = cross_pool(x, y, mode).astype(np.float64)
                want_x = np.array([op(a, b) for a, b in zip(x, y)])
                if mode in (PoolMode.MAX, PoolMode.MIN):
                    assert np.array_equal(got, want.astype(np.float32))
                    assert np.array_equal(got_x, want_x.astype(np.float32))
                else:
                    np.testing.assert_allclose(got, want, rtol=1e-6)
                    np.testing.assert_allclose(got_x, want_x, rtol=1e-6)
        elapsed = time.perf_counter() - start
        assert elapsed < 5.0, f"oracle sweep took {elapsed:.1f}s (budget 5s)"


def test_blend_trace_and_dimension_law():
    with verdict("blend trace [2.75, 3.75, 4.75, 5.75] and 4096/4096/2048 -> 2048"):
        out = blend(
            [1, 3, 5, 7, 2, 4, 6, 8],
            [8, 6, 4, 2, 7, 5, 3, 1],
            [0, 2, 4, 6],
            DEFAULT_BLEND,
        )
        assert out.tolist() == [2.75, 3.75, 4.75, 5.75]
        rng = np.random.default_rng(0)
        full = blend(
            rng.normal(size=4096), rng.normal(size=4096), rng.normal(size=2048)
        )
        assert full.shape == (2048,)


def test_gradient_correctness():
    with verdict("analytic gradients vs central differences (< 1e-4, both losses)"):
        start = time.perf_counter()
        cases = [
            (TaskKind.BINARY, 1, 0.2, 21),
            (TaskKind.BINARY, 1, 0.0, 22),
            (TaskKind.MULTICLASS, 3, 0.2, 23),
            (TaskKind.MULTICLASS, 3, 0.0, 24),
        ]
        for task, n_outputs, dropout, seed in cases:
            cfg = MlpConfig(8, (4,), n_outputs, dropout, task)
            net = init(cfg, seed)
            rng = np.random.default_rng(seed)
            x = rng.normal(size=(6, 8))
            y = rng.integers(0, max(n_outputs, 2), 6).astype(np.uint8)
            mask = sample_dropout_mask(rng, 6, cfg)
            gw, gb = grad(net, x, y, mask)
            analytic = np.concatenate([g.ravel() for g in gw + gb])
            numeric = []
            h = 1e-6
            for p in net.parameters():
                it = np.nditer(p, flags=["multi_index"])
                for _ in it:
                    idx = it.multi_index
                    orig = p[idx]
                    p[idx] = orig + h
                    hi = loss_value(forward(net, x, mask)[0], y, task)
                    p[idx] = orig - h
                    lo = loss_value(forward(net, x, mask)[0], y, task)
                    p[idx] = orig
                    numeric.append((hi - lo) / (2.0 * h))
            numeric = np.array(numeric)
            denom = max(np.linalg.norm(analytic) + np.linalg.norm(numeric), 1e-12)
            rel = np.linalg.norm(analytic - numeric) / denom
            assert rel < 1e-4, f"{task} dropout={dropout}: rel err {rel:.2e}"
        elapsed = time.perf_counter() - start
        assert elapsed < 10.0, f"gradcheck took {elapsed:.1f}s (budget 10s)"


def test_kappa_hand_values_and_bound():
    with verdict("kappa equals 1.0 / 0.0 / 0.7 hand values; kappa <= accuracy x1000"):
        assert abs(kappa(np.diag([5, 5])) - 1.0) < 1e-12
        assert abs(kappa(np.array([[5, 0], [5, 0]])) - 0.0) < 1e-12
        assert abs(kappa(np.array([[40, 10], [5, 45]])) - 0.7) < 1e-12
        rng = np.random.default_rng(99)
        checked = 0
        while checked < 1000:
            k = int(rng.integers(2, 7))
            cm = rng.integers(0, 40, size=(k, k))
            if cm.sum() == 0:
                continue
            try:
                value = kappa(cm)
            except Exception:
                continue  # degenerate expected-accuracy-1 matrices
            assert value <= accuracy(cm) + 1e-12
            checked += 1


def test_end_to_end_synthetic_run(tmp_path):
    with verdict("synthetic 5-class run: accuracy >= 0.95 in <= 100 epochs, < 60 s"):
        start = time.perf_counter()
        paths = make_synthetic_fixture(tmp_path / "sep10", separation=10.0, **FIXTURE_KW)
        result = run_experiment(ExperimentConfig(features=paths, **RUN_KW))
        elapsed = time.perf_counter() - start
        assert result.report.accuracy >= 0.95, f"accuracy {result.report.accuracy}"
        assert result.report.epochs_run <= 100
        assert elapsed < 60.0, f"run took {elapsed:.1f}s (budget 60s)"
    with verdict("separation-0 control: accuracy within 0.2 +/- 0.1"):
        paths = make_synthetic_fixture(tmp_path / "sep0", separation=0.0, **FIXTURE_KW)
        control = run_experiment(ExperimentConfig(features=paths, **RUN_KW))
        assert 0.1 <= control.report.accuracy <= 0.3, (
            f"control accuracy {control.report.accuracy}"
        )


def test_deterministic_outputs(tmp_path):
    with verdict("two identical invocations: bitwise-equal CSV and checkpoint"):
        fixture_dir = tmp_path / "fvecs"
        assert main([
            "fixture", "--out", str(fixture_dir),
            "--n-per-class", "50", "--n-classes", "5", "--dims", "64,64,32",
            "--separation", "10", "--seed", "7",
        ]) == 0
        outputs = []
        for name in ("first", "second"):
            csv = tmp_path / f"{name}.csv"
            ckpt = tmp_path / f"{name}.ckpt"
            config = tmp_path / f"{name}.cfg"
            config.write_text(
                "\n".join(
                    [
                        f"features.fc1={fixture_dir / 'fc1.fvec'}",
                        f"features.fc2={fixture_dir / 'fc2.fvec'}",
                        f"features.third={fixture_dir / 'third.fvec'}",
                        "blend.stage1=max",
                        "task=severity",
                        "dnn.hidden=64,32,16",
                        "split.seed=3",
                        "train.seed=11",
                        "train.max_epochs=25",
                        f"report.csv={csv}",
                        f"checkpoint={ckpt}",
                    ]
                )
                + "\n"
            )
            assert main(["experiment", "--config", str(config)]) == 0
            outputs.append((csv.read_bytes(), ckpt.read_bytes()))
        assert outputs[0][0] == outputs[1][0], "CSV reports differ between runs"
        assert outputs[0][1] == outputs[1][1], "checkpoints differ between runs"


def test_headline_reproduction_is_optional(tmp_path):
    """Reproducing the reference 97.92% / 80.96% accuracies needs the real

    APTOS 2019 images run through pretrained extractors; that is beyond a
    desk-scale suite, so this criterion reports instead of gating.  Point
    ``DRBLEND_APTOS_DIR`` at a directory of extracted fc1/fc2/third FVEC
    files to score them here.
    """
    data_dir = os.environ.get("DRBLEND_APTOS_DIR")
    if not data_dir:
        print(
            "SKIP: headline-number reproduction is optional; set "
            "DRBLEND_APTOS_DIR to extracted APTOS FVEC files to attempt it"
        )
        pytest.skip("real-data reproduction not attempted (documented optional)")
    features = {
        name: os.path.join(data_dir, f"{name}.fvec")
        for name in ("fc1", "fc2", "third")
        if os.path.exists(os.path.join(data_dir, f"{name}.fvec"))
    }
    for task, target in (("identify", 0.9792), ("severity", 0.8096)):
        cfg = ExperimentConfig(
            features=features, task=task, blend=DEFAULT_BLEND,
            split=SplitSpec(0.8, seed=3), train=TrainSpec(seed=11),
        )
        result = run_experiment(cfg)
        print(
            f"INFO: {task} accuracy {100 * result.report.accuracy:.2f}% "
            f"(reference {100 * target:.2f}%)"
        )
