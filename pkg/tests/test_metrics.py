import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from drblend.errors import DataError
from drblend.metrics import (
    EvalReport,
    accuracy,
    classification_metrics,
    confusion_matrix,
    evaluate,
    kappa,
)

# Worked example reused across tests: 100 samples, binary.
# true 0: 40 right, 10 wrong; true 1: 5 wrong, 45 right.
CM_70 = np.array([[40, 10], [5, 45]])


def random_confusion(rng, max_k=6, max_count=50):
    k = int(rng.integers(2, max_k + 1))
    cm = rng.integers(0, max_count, size=(k, k))
    if cm.sum() == 0:
        cm[0, 0] = 1
    return cm


class TestConfusionMatrix:
    def test_orientation_true_rows_predicted_columns(self):
        cm = confusion_matrix([0, 0, 1], [0, 1, 1], 2)
        assert cm.tolist() == [[1, 1], [0, 1]]

    def test_total_preserved(self):
        rng = np.random.default_rng(0)
        y_true = rng.integers(0, 4, 200)
        y_pred = rng.integers(0, 4, 200)
        assert confusion_matrix(y_true, y_pred, 4).sum() == 200

    def test_diagonal_counts_agreement(self):
        y = np.array([0, 1, 2, 2, 1])
        cm = confusion_matrix(y, y, 3)
        assert np.trace(cm) == 5 and cm.sum() == 5

    def test_length_mismatch(self):
        with pytest.raises(DataError):
            confusion_matrix([0, 1], [0], 2)

    def test_label_out_of_range(self):
        with pytest.raises(DataError):
            confusion_matrix([0, 2], [0, 1], 2)


class TestKappa:
    def test_perfect_agreement(self):
        assert kappa(np.diag([5, 5])) == pytest.approx(1.0, abs=1e-12)

    def test_single_column_collapse_is_zero(self):
        assert kappa([[5, 0], [5, 0]]) == pytest.approx(0.0, abs=1e-12)

    def test_hand_computed_seventy(self):
        # observed 85/100; expected (50*45 + 50*55)/100^2 = 0.5
        assert kappa(CM_70) == pytest.approx(0.7, abs=1e-12)

    def test_degenerate_single_cell(self):
        with pytest.raises(DataError, match="kappa undefined"):
            kappa([[7, 0], [0, 0]])

    def test_never_exceeds_accuracy(self):
        rng = np.random.default_rng(123)
        for _ in range(1000):
            cm = random_confusion(rng)
            try:
                k = kappa(cm)
            except DataError:
                continue
            assert k <= accuracy(cm) + 1e-12

    def test_count_scaling_invariance(self):
        rng = np.random.default_rng(5)
        for _ in range(50):
            cm = random_confusion(rng)
            try:
                base = kappa(cm)
            except DataError:
                continue
            assert kappa(cm * 7) == pytest.approx(base, abs=1e-12)

    def test_permutation_invariance(self):
        rng = np.random.default_rng(6)
        cm = random_confusion(rng, max_k=4)
        perm = rng.permutation(cm.shape[0])
        relabeled = cm[np.ix_(perm, perm)]
        assert kappa(relabeled) == pytest.approx(kappa(cm), abs=1e-12)


class TestClassificationMetrics:
    def test_hand_values_weighted(self):
        precision, recall, f1 = classification_metrics(CM_70, "weighted")
        p0, r0 = 40 / 45, 0.8
        p1, r1 = 45 / 55, 0.9
        f0 = 2 * p0 * r0 / (p0 + r0)
        f11 = 2 * p1 * r1 / (p1 + r1)
        assert precision == pytest.approx(0.5 * p0 + 0.5 * p1, abs=1e-12)
        assert recall == pytest.approx(0.85, abs=1e-12)
        assert f1 == pytest.approx(0.5 * f0 + 0.5 * f11, abs=1e-12)

    def test_hand_values_macro_equal_support(self):
        # class supports are equal (50/50) so macro == weighted here
        assert classification_metrics(CM_70, "macro") == pytest.approx(
            classification_metrics(CM_70, "weighted"), abs=1e-12
        )

    def test_macro_differs_with_unequal_support(self):
        cm = np.array([[90, 0], [5, 5]])
        macro = classification_metrics(cm, "macro")
        weighted = classification_metrics(cm, "weighted")
        assert macro[1] == pytest.approx((1.0 + 0.5) / 2, abs=1e-12)
        assert weighted[1] == pytest.approx(0.95, abs=1e-12)

    def test_empty_predicted_column_counts_zero_precision(self):
        # nothing ever predicted as class 1
        cm = np.array([[6, 0], [2, 0]])
        precision, recall, f1 = classification_metrics(cm, "macro")
        assert precision == pytest.approx(0.5 * (6 / 8), abs=1e-12)
        assert recall == pytest.approx(0.5 * 1.0, abs=1e-12)

    def test_empty_true_row_counts_zero_recall(self):
        cm = np.array([[3, 1], [0, 0]])
        _, recall, f1 = classification_metrics(cm, "macro")
        assert recall == pytest.approx(0.5 * (3 / 4), abs=1e-12)
        assert np.isfinite(f1)

    def test_perfect_matrix(self):
        assert classification_metrics(np.diag([3, 4, 5])) == (1.0, 1.0, 1.0)

    def test_unknown_averaging(self):
        with pytest.raises(DataError):
            classification_metrics(CM_70, "micro")

    @given(st.integers(0, 2**31 - 1))
    def test_weighted_recall_equals_accuracy(self, seed):
        cm = random_confusion(np.random.default_rng(seed))
        _, recall, _ = classification_metrics(cm, "weighted")
        assert recall == pytest.approx(accuracy(cm), abs=1e-12)

    @given(st.integers(0, 2**31 - 1))
    def test_all_metrics_in_unit_interval(self, seed):
        cm = random_confusion(np.random.default_rng(seed))
        for averaging in ("weighted", "macro"):
            for value in classification_metrics(cm, averaging):
                assert 0.0 <= value <= 1.0

    def test_rejects_non_square(self):
        with pytest.raises(DataError):
            classification_metrics(np.ones((2, 3)))

    def test_rejects_negative_counts(self):
        with pytest.raises(DataError):
            classification_metrics(np.array([[1, -1], [0, 2]]))


class TestEvalReport:
    def test_evaluate_wires_everything(self):
        y_true = [0] * 50 + [1] * 50
        y_pred = [0] * 40 + [1] * 10 + [0] * 5 + [1] * 45
        report = evaluate(y_true, y_pred, 2, epochs_run=12, final_loss=0.3)
        assert report.accuracy == pytest.approx(0.85, abs=1e-12)
        assert report.kappa == pytest.approx(0.7, abs=1e-12)
        assert report.confusion.tolist() == CM_70.tolist()
        assert report.epochs_run == 12 and report.final_loss == 0.3
        assert report.averaging == "weighted"

    def test_macro_averaging_flows_through(self):
        report = evaluate([0, 0, 1], [0, 0, 0], 2, averaging="macro")
        assert report.averaging == "macro"
        assert report.recall == pytest.approx(0.5, abs=1e-12)

    def test_rejects_kappa_above_accuracy(self):
        with pytest.raises(DataError):
            EvalReport(
                accuracy=0.5, precision=0.5, recall=0.5, f1=0.5, kappa=0.9,
                confusion=CM_70,
            )

    def test_rejects_negative_loss(self):
        with pytest.raises(DataError):
            EvalReport(
                accuracy=0.85, precision=0.85, recall=0.85, f1=0.85, kappa=0.7,
                confusion=CM_70, final_loss=-0.1,
            )

    def test_rejects_non_finite(self):
        with pytest.raises(DataError):
            EvalReport(
                accuracy=float("nan"), precision=0.5, recall=0.5, f1=0.5,
                kappa=0.1, confusion=CM_70,
            )
