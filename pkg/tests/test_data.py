import numpy as np
import pytest

from qflsim.data import (
    PartitionKind,
    PartitionStrategy,
    load_csv,
    partition,
    save_csv,
    synth_genomic,
    train_test_split,
)
from qflsim.errors import DatasetParseError
from qflsim.model import LabeledDataset


def write(tmp_path, text, name="data.csv"):
    path = tmp_path / name
    path.write_text(text, encoding="utf-8")
    return path


class TestLoadCsv:
    def test_basic_parse(self, tmp_path):
        path = write(tmp_path, "f0,f1,label\n1.5,-2.0,0\n0.25,3.0,1\n")
        data = load_csv(path)
        assert data.n_samples == 2
        assert data.n_features == 2
        assert np.allclose(data.features, [[1.5, -2.0], [0.25, 3.0]])
        assert np.array_equal(data.labels, [0, 1])

    def test_empty_file(self, tmp_path):
        with pytest.raises(DatasetParseError):
            load_csv(write(tmp_path, ""))

    def test_header_only(self, tmp_path):
        with pytest.raises(DatasetParseError):
            load_csv(write(tmp_path, "f0,label\n"))

    def test_missing_label_column(self, tmp_path):
        with pytest.raises(DatasetParseError) as exc_info:
            load_csv(write(tmp_path, "f0,f1\n1,2\n"))
        assert exc_info.value.line == 1

    def test_wrong_feature_names(self, tmp_path):
        with pytest.raises(DatasetParseError):
            load_csv(write(tmp_path, "a,b,label\n1,2,0\n"))

    def test_ragged_row_reports_line(self, tmp_path):
        path = write(tmp_path, "f0,f1,label\n1,2,0\n1,2\n")
        with pytest.raises(DatasetParseError) as exc_info:
            load_csv(path)
        assert exc_info.value.line == 3

    def test_non_numeric_cell_reports_line(self, tmp_path):
        path = write(tmp_path, "f0,label\nfoo,0\n")
        with pytest.raises(DatasetParseError) as exc_info:
            load_csv(path)
        assert exc_info.value.line == 2

    def test_non_integer_label(self, tmp_path):
        with pytest.raises(DatasetParseError):
            load_csv(write(tmp_path, "f0,label\n1.0,0.5\n"))

    def test_out_of_range_label_loads_fine(self, tmp_path):
        # range checking belongs to model-config validation, not parsing
        data = load_csv(write(tmp_path, "f0,label\n1.0,2\n"))
        assert data.labels[0] == 2

    def test_round_trip(self, tmp_path, rng):
        data = LabeledDataset(rng.standard_normal((7, 3)),
                              rng.integers(0, 3, 7))
        path = tmp_path / "rt.csv"
        save_csv(data, path)
        loaded = load_csv(path)
        assert np.array_equal(loaded.features, data.features)
        assert np.array_equal(loaded.labels, data.labels)


class TestSynth:
    def test_deterministic(self):
        a = synth_genomic(50, 10, 2, 3.0, seed=4)
        b = synth_genomic(50, 10, 2, 3.0, seed=4)
        assert np.array_equal(a.features, b.features)
        assert np.array_equal(a.labels, b.labels)

    def test_labels_balanced_within_one(self):
        data = synth_genomic(101, 5, 3, 1.0, seed=0)
        counts = np.bincount(data.labels)
        assert counts.max() - counts.min() <= 1

    def test_separable_data_admits_linear_probe(self):
        data = synth_genomic(200, 200, 2, 4.0, seed=1)
        # Independent check: least-squares linear classifier on +-1 targets.
        targets = 2.0 * data.labels - 1.0
        design = np.hstack([data.features, np.ones((200, 1))])
        coef, *_ = np.linalg.lstsq(design, targets, rcond=None)
        predicted = (design @ coef > 0).astype(int)
        assert (predicted == data.labels).mean() >= 0.95

    def test_zero_separation_has_no_signal(self):
        data = synth_genomic(400, 20, 2, 0.0, seed=5)
        targets = 2.0 * data.labels - 1.0
        design = np.hstack([data.features, np.ones((400, 1))])
        coef, *_ = np.linalg.lstsq(design, targets, rcond=None)
        holdout = synth_genomic(400, 20, 2, 0.0, seed=6)
        ho_design = np.hstack([holdout.features, np.ones((400, 1))])
        predicted = (ho_design @ coef > 0).astype(int)
        accuracy = (predicted == holdout.labels).mean()
        assert 0.35 < accuracy < 0.65

    def test_validation(self):
        with pytest.raises(ValueError):
            synth_genomic(1, 4, 2, 1.0, seed=0)
        with pytest.raises(ValueError):
            synth_genomic(10, 0, 2, 1.0, seed=0)
        with pytest.raises(ValueError):
            synth_genomic(10, 4, 2, -1.0, seed=0)


class TestPartition:
    def test_single_client_gets_everything(self):
        data = synth_genomic(20, 4, 2, 1.0, seed=2)
        shards = partition(data, 1, PartitionStrategy(), seed=0)
        assert len(shards) == 1
        assert shards[0].n_samples == 20

    def test_iid_equal_splits_evenly(self):
        data = synth_genomic(10, 4, 2, 1.0, seed=2)
        shards = partition(data, 2, PartitionStrategy(), seed=0)
        assert [s.n_samples for s in shards] == [5, 5]

    def test_disjoint_union_covers_input(self, rng):
        data = synth_genomic(53, 6, 3, 1.0, seed=3)
        for strategy in (PartitionStrategy(),
                         PartitionStrategy(PartitionKind.DIRICHLET, 0.5)):
            for seed in range(5):
                shards = partition(data, 4, strategy, seed=seed)
                rows = [tuple(f) + (l,) for s in shards
                        for f, l in zip(s.features, s.labels)]
                assert len(rows) == 53
                original = sorted(tuple(f) + (l,) for f, l
                                  in zip(data.features, data.labels))
                assert sorted(rows) == original

    def test_iid_sizes_within_one(self):
        data = synth_genomic(241, 4, 2, 1.0, seed=9)
        shards = partition(data, 3, PartitionStrategy(), seed=1)
        sizes = [s.n_samples for s in shards]
        assert max(sizes) - min(sizes) <= 1

    def test_iid_stratified(self):
        data = synth_genomic(240, 4, 2, 1.0, seed=9)
        shards = partition(data, 3, PartitionStrategy(), seed=1)
        for shard in shards:
            counts = np.bincount(shard.labels, minlength=2)
            assert abs(counts[0] - counts[1]) <= 2

    def test_dirichlet_high_concentration_near_uniform(self):
        # At concentration 100 the shard label mix should hug the global
        # mix: the draw's own standard deviation is about 3 points, so the
        # typical deviation stays under 5 points while single shards may
        # stray a little further.
        data = synth_genomic(600, 4, 2, 1.0, seed=10)
        global_fraction = np.bincount(data.labels)[1] / 600
        strategy = PartitionStrategy(PartitionKind.DIRICHLET, 100.0)
        deviations = []
        for seed in range(20):
            for shard in partition(data, 3, strategy, seed=seed):
                frac = np.bincount(shard.labels, minlength=2)[1] / shard.n_samples
                deviations.append(abs(frac - global_fraction))
        assert np.mean(deviations) < 0.05
        assert max(deviations) < 0.10

    def test_dirichlet_low_concentration_skews(self):
        data = synth_genomic(600, 4, 2, 1.0, seed=10)
        strategy = PartitionStrategy(PartitionKind.DIRICHLET, 0.1)
        spreads = []
        for seed in range(10):
            fractions = [np.bincount(s.labels, minlength=2)[1] / s.n_samples
                         for s in partition(data, 3, strategy, seed=seed)]
            spreads.append(max(fractions) - min(fractions))
        assert np.mean(spreads) > 0.2

    def test_more_clients_than_samples_rejected(self):
        data = synth_genomic(4, 3, 2, 1.0, seed=0)
        with pytest.raises(ValueError):
            partition(data, 5, PartitionStrategy(), seed=0)

    def test_strategy_validation(self):
        with pytest.raises(ValueError):
            PartitionStrategy(PartitionKind.DIRICHLET)
        with pytest.raises(ValueError):
            PartitionStrategy(PartitionKind.IID_EQUAL, 1.0)


class TestTrainTestSplit:
    def test_half_split_of_ten(self):
        data = synth_genomic(10, 4, 2, 1.0, seed=11)
        train, test = train_test_split(data, 0.5, seed=0)
        assert train.n_samples == 5
        assert test.n_samples == 5

    def test_union_is_input_and_disjoint(self):
        data = synth_genomic(37, 4, 2, 1.0, seed=12)
        train, test = train_test_split(data, 0.3, seed=0)
        assert train.n_samples + test.n_samples == 37
        rows = sorted(tuple(f) + (l,) for part in (train, test)
                      for f, l in zip(part.features, part.labels))
        original = sorted(tuple(f) + (l,) for f, l
                          in zip(data.features, data.labels))
        assert rows == original

    def test_deterministic(self):
        data = synth_genomic(30, 4, 2, 1.0, seed=13)
        a = train_test_split(data, 0.25, seed=7)
        b = train_test_split(data, 0.25, seed=7)
        assert np.array_equal(a[0].features, b[0].features)
        assert np.array_equal(a[1].features, b[1].features)

    def test_stratification(self):
        data = synth_genomic(100, 4, 2, 1.0, seed=14)
        _, test = train_test_split(data, 0.2, seed=3)
        counts = np.bincount(test.labels, minlength=2)
        assert abs(counts[0] - counts[1]) <= 1

    def test_degenerate_fractions_rejected(self):
        data = synth_genomic(4, 3, 2, 1.0, seed=0)
        with pytest.raises(ValueError):
            train_test_split(data, 0.01, seed=0)
        with pytest.raises(ValueError):
            train_test_split(data, 0.99, seed=0)
        with pytest.raises(ValueError):
            train_test_split(data, 1.5, seed=0)
