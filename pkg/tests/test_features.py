import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from drblend.errors import DataError, FileFormatError
from drblend.features import (
    LabeledFeatureSet,
    SplitSpec,
    binarize_labels,
    read_fvec,
    split,
    split_indices,
    write_fvec,
)

HEADER_BYTES = 14  # magic(4) + n_rows(4) + dim(4) + n_classes(2)


def make_set(n_rows=4, dim=3, n_classes=2, seed=0):
    rng = np.random.default_rng(seed)
    return LabeledFeatureSet(
        rng.normal(size=(n_rows, dim)).astype(np.float32),
        rng.integers(0, n_classes, n_rows).astype(np.uint8),
        n_classes,
    )


class TestInvariants:
    def test_rejects_empty_rows(self):
        with pytest.raises(DataError):
            LabeledFeatureSet(np.empty((0, 3), dtype=np.float32), np.empty(0), 1)

    def test_rejects_label_out_of_range(self):
        with pytest.raises(DataError):
            LabeledFeatureSet(np.zeros((2, 1), dtype=np.float32), np.array([0, 2]), 2)

    def test_rejects_non_finite(self):
        with pytest.raises(DataError, match="non-finite"):
            LabeledFeatureSet(np.array([[np.nan]], dtype=np.float32), np.array([0]), 1)

    def test_rejects_label_count_mismatch(self):
        with pytest.raises(DataError):
            LabeledFeatureSet(np.zeros((3, 1), dtype=np.float32), np.array([0, 0]), 1)


class TestFvec:
    def test_single_row_file_is_19_bytes(self, tmp_path):
        dataset = LabeledFeatureSet(
            np.array([[0.0]], dtype=np.float32), np.array([0]), 1
        )
        path = tmp_path / "one.fvec"
        write_fvec(dataset, path)
        assert path.stat().st_size == HEADER_BYTES + 1 + 4 == 19

    def test_round_trip_is_exact(self, tmp_path):
        dataset = make_set(n_rows=7, dim=5, n_classes=3)
        path = tmp_path / "set.fvec"
        write_fvec(dataset, path)
        back = read_fvec(path)
        assert back.n_classes == dataset.n_classes
        assert np.array_equal(back.labels, dataset.labels)
        assert np.array_equal(back.features, dataset.features)

    @settings(max_examples=30, deadline=None)
    @given(
        n_rows=st.integers(1, 8),
        dim=st.integers(1, 6),
        n_classes=st.integers(1, 5),
        seed=st.integers(0, 1000),
    )
    def test_round_trip_property(self, tmp_path_factory, n_rows, dim, n_classes, seed):
        dataset = make_set(n_rows, dim, n_classes, seed)
        path = tmp_path_factory.mktemp("fvec") / "p.fvec"
        write_fvec(dataset, path)
        back = read_fvec(path)
        assert np.array_equal(back.features, dataset.features)
        assert np.array_equal(back.labels, dataset.labels)

    def test_wrong_magic(self, tmp_path):
        path = tmp_path / "bad.fvec"
        path.write_bytes(b"XXXX" + b"\x00" * 32)
        with pytest.raises(FileFormatError, match="not an FVEC file"):
            read_fvec(path)

    def test_truncated_payload(self, tmp_path):
        dataset = make_set(n_rows=10, dim=2)
        path = tmp_path / "full.fvec"
        write_fvec(dataset, path)
        raw = bytearray(path.read_bytes())
        # keep the header's n_rows=10 but drop the last 5 rows of floats
        truncated = raw[: len(raw) - 5 * 2 * 4]
        bad = tmp_path / "cut.fvec"
        bad.write_bytes(bytes(truncated))
        with pytest.raises(FileFormatError, match="corrupt FVEC"):
            read_fvec(bad)

    def test_non_finite_payload(self, tmp_path):
        dataset = make_set(n_rows=2, dim=2)
        path = tmp_path / "nan.fvec"
        write_fvec(dataset, path)
        raw = bytearray(path.read_bytes())
        raw[-4:] = np.array([np.inf], dtype="<f4").tobytes()
        path.write_bytes(bytes(raw))
        with pytest.raises(DataError, match="non-finite feature"):
            read_fvec(path)

    def test_missing_file(self, tmp_path):
        with pytest.raises(Exception, match="cannot read"):
            read_fvec(tmp_path / "absent.fvec")


class TestSplit:
    def test_aptos_sized_split(self):
        labels = np.zeros(3662, dtype=np.uint8)
        train, test = split_indices(labels, SplitSpec(0.8, seed=5))
        assert train.size == 2929
        assert test.size == 733

    def test_same_seed_same_partition(self):
        labels = np.arange(50) % 3
        a = split_indices(labels, SplitSpec(0.7, seed=9))
        b = split_indices(labels, SplitSpec(0.7, seed=9))
        assert np.array_equal(a[0], b[0]) and np.array_equal(a[1], b[1])

    def test_partition_covers_all_rows_exactly_once(self):
        labels = np.arange(101) % 4
        for seed in range(10):
            train, test = split_indices(labels, SplitSpec(0.8, seed=seed))
            combined = np.sort(np.concatenate([train, test]))
            assert np.array_equal(combined, np.arange(101))

    def test_stratified_balanced_binary(self):
        labels = np.array([0] * 5 + [1] * 5, dtype=np.uint8)
        train, test = split_indices(labels, SplitSpec(0.8, seed=2, stratified=True))
        train_labels = labels[train]
        assert (train_labels == 0).sum() == 4
        assert (train_labels == 1).sum() == 4
        assert test.size == 2

    def test_empty_part_rejected(self):
        labels = np.array([0, 1], dtype=np.uint8)
        with pytest.raises(DataError, match="empty"):
            split_indices(labels, SplitSpec(0.2, seed=0))

    def test_split_returns_sets(self):
        dataset = make_set(n_rows=20, dim=2, n_classes=2)
        train, test = split(dataset, SplitSpec(0.75, seed=1))
        assert train.n_rows == 15 and test.n_rows == 5
        assert train.dim == test.dim == 2

    def test_bad_fraction(self):
        with pytest.raises(DataError):
            SplitSpec(1.0)
        with pytest.raises(DataError):
            SplitSpec(0.0)


class TestBinarize:
    def test_aptos_histogram(self):
        # grade histogram of the benchmark dataset: 1805 healthy, rest graded 1-4
        counts = [1805, 370, 999, 193, 295]
        labels = np.concatenate(
            [np.full(c, grade, dtype=np.uint8) for grade, c in enumerate(counts)]
        )
        dataset = LabeledFeatureSet(
            np.zeros((labels.size, 1), dtype=np.float32), labels, 5
        )
        binary = binarize_labels(dataset)
        assert binary.n_classes == 2
        assert (binary.labels == 0).sum() == 1805
        assert (binary.labels == 1).sum() == 1857

    def test_all_zero_labels(self):
        dataset = LabeledFeatureSet(
            np.zeros((4, 1), dtype=np.float32), np.zeros(4, dtype=np.uint8), 5
        )
        assert np.array_equal(binarize_labels(dataset).labels, np.zeros(4))

    def test_single_row_grade_three(self):
        dataset = LabeledFeatureSet(
            np.ones((1, 2), dtype=np.float32), np.array([3], dtype=np.uint8), 5
        )
        binary = binarize_labels(dataset)
        assert binary.labels[0] == 1
        assert np.array_equal(binary.features, dataset.features)

    def test_requires_five_grades(self):
        dataset = make_set(n_classes=2)
        with pytest.raises(DataError):
            binarize_labels(dataset)

    def test_preserves_rows_and_positive_count(self):
        rng = np.random.default_rng(3)
        labels = rng.integers(0, 5, 200).astype(np.uint8)
        dataset = LabeledFeatureSet(
            rng.normal(size=(200, 4)).astype(np.float32), labels, 5
        )
        binary = binarize_labels(dataset)
        assert binary.n_rows == 200
        assert (binary.labels == 1).sum() == 200 - (labels == 0).sum()
