import numpy as np
import pytest

from pixelplate.errors import ConfigError
from pixelplate.geometry import assemble_plate, random_genome
from pixelplate.oracle import synthetic_em
from pixelplate.surrogate import (
    SurrogateConfig,
    TrainConfig,
    history_to_csv,
    train,
)
from pixelplate.surrogate.train import split_indices

TINY = SurrogateConfig(stem_channels=2, stage_channels=(2, 2, 2, 2), blocks_per_stage=1)


def oracle_samples(n, seed0=0):
    out = []
    for i in range(n):
        plate = assemble_plate(random_genome(seed0 + i))
        point = synthetic_em(plate)
        out.append((plate, point.f_res_ghz, point.s21_db))
    return out


class TestTrainConfig:
    def test_defaults(self):
        cfg = TrainConfig()
        assert cfg.learning_rate == 0.001
        assert cfg.momentum == 0.9
        assert cfg.batch_size is None  # resolves to min(256, train size)
        assert cfg.epochs == 200
        assert cfg.split == (0.6, 0.2, 0.2)

    def test_invalid_values_rejected(self):
        with pytest.raises(ConfigError):
            TrainConfig(learning_rate=0.0)
        with pytest.raises(ConfigError):
            TrainConfig(momentum=1.0)
        with pytest.raises(ConfigError):
            TrainConfig(split=(0.5, 0.3, 0.3))


class TestSplitIndices:
    def test_floor_arithmetic(self):
        rng = np.random.default_rng(0)
        tr, va, te = split_indices(10, (0.6, 0.2, 0.2), rng)
        assert (len(tr), len(va), len(te)) == (6, 2, 2)
        assert sorted(np.concatenate([tr, va, te]).tolist()) == list(range(10))

    def test_remainder_goes_to_test(self):
        rng = np.random.default_rng(0)
        tr, va, te = split_indices(7, (0.6, 0.2, 0.2), rng)
        assert (len(tr), len(va), len(te)) == (4, 1, 2)


class TestTrain:
    def test_degenerate_single_sample_run(self):
        result = train(oracle_samples(1), TINY, TrainConfig(epochs=1, seed=0))
        assert result.degenerate
        assert len(result.history) == 1
        assert np.isnan(result.history[0].val_mae_f_ghz)
        assert result.best_epoch == 0
        assert result.split_sizes == (1, 0, 0)

    def test_five_samples_split_three_ways(self):
        result = train(oracle_samples(5), TINY, TrainConfig(epochs=1, seed=0))
        assert not result.degenerate
        assert result.split_sizes == (3, 1, 1)
        assert np.isfinite(result.history[0].val_mae_f_ghz)

    def test_empty_dataset_rejected(self):
        with pytest.raises(ConfigError):
            train([], TINY, TrainConfig(epochs=1, seed=0))

    def test_unpopulatable_split_rejected(self):
        with pytest.raises(ConfigError, match="empty"):
            train(
                oracle_samples(10),
                TINY,
                TrainConfig(epochs=1, seed=0, split=(0.98, 0.01, 0.01)),
            )

    def test_bit_identical_across_runs(self):
        samples = oracle_samples(12)
        cfg = TrainConfig(epochs=3, seed=9, batch_size=4)
        r1 = train(samples, TINY, cfg)
        r2 = train(samples, TINY, cfg)
        assert r1.history == r2.history
        for name in r1.model.tensors:
            assert np.array_equal(r1.model.tensors[name], r2.model.tensors[name])

    def test_returns_minimum_validation_epoch(self):
        samples = oracle_samples(20)
        result = train(samples, TINY, TrainConfig(epochs=4, seed=3, batch_size=8))
        sums = [rec.val_mae_f_ghz + rec.val_mae_s21_db for rec in result.history]
        assert result.best_epoch == int(np.argmin(sums))

    def test_loss_decreases_from_cold_start(self):
        samples = oracle_samples(30)
        result = train(samples, TINY, TrainConfig(epochs=6, seed=1, batch_size=8, learning_rate=0.005))
        assert result.history[-1].train_loss < result.history[0].train_loss

    def test_history_csv_shape(self):
        result = train(oracle_samples(8), TINY, TrainConfig(epochs=2, seed=0))
        text = history_to_csv(result.history)
        lines = text.strip().split("\n")
        assert lines[0] == "epoch,train_loss,val_mae_f_ghz,val_mae_s21_db"
        assert len(lines) == 3

    def test_diverged_run_returns_finite_snapshot(self):
        import warnings

        samples = oracle_samples(12)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            result = train(
                samples, TINY, TrainConfig(epochs=4, seed=0, batch_size=4, learning_rate=1e4)
            )
        for tensor in result.model.tensors.values():
            assert np.isfinite(tensor).all()
