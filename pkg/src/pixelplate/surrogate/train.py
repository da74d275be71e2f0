"""SGD-with-momentum training loop with validation-MAE model selection.

The dataset is shuffled once with the run seed and split 60/20/20 in shuffled
order. Every epoch revisits the train split in a fresh seeded order, and the
returned weights are the snapshot with the lowest validation MAE sum
(frequency MAE + |S21| MAE, both in physical units).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import ConfigError
from ..geometry import PlateMatrix
from .model import (
    ModelWeights,
    SurrogateConfig,
    TargetNormalizer,
    _loss_and_gradients_encoded,
    build_model,
    encode_plates,
    forward_many_encoded,
    mae,
    sgd_step,
)


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 0.001
    momentum: float = 0.9
    batch_size: int | None = None  # None resolves to min(256, train-set size)
    epochs: int = 200
    seed: int = 0
    split: tuple[float, float, float] = (0.6, 0.2, 0.2)

    def __post_init__(self):
        if self.learning_rate <= 0:
            raise ConfigError("learning_rate must be positive")
        if not 0.0 <= self.momentum < 1.0:
            raise ConfigError("momentum must lie in [0, 1)")
        if self.batch_size is not None and self.batch_size < 1:
            raise ConfigError("batch_size must be positive")
        if self.epochs < 1:
            raise ConfigError("epochs must be >= 1")
        if len(self.split) != 3 or abs(sum(self.split) - 1.0) > 1e-9:
            raise ConfigError("split fractions must sum to 1")
        if any(f < 0 for f in self.split):
            raise ConfigError("split fractions must be nonnegative")


@dataclass(frozen=True)
class EpochRecord:
    epoch: int
    train_loss: float  # normalized-unit L1 over the epoch
    val_mae_f_ghz: float  # physical units; NaN in degenerate train-only runs
    val_mae_s21_db: float


@dataclass
class TrainResult:
    model: ModelWeights
    history: list[EpochRecord] = field(default_factory=list)
    best_epoch: int = 0
    degenerate: bool = False  # dataset too small for a 3-way split; trained on everything
    split_sizes: tuple[int, int, int] = (0, 0, 0)


def split_indices(n: int, fractions, rng: np.random.Generator):
    """Seeded shuffle then contiguous floor-sized slices (train, val, test)."""
    order = rng.permutation(n)
    n_train = int(np.floor(fractions[0] * n))
    n_val = int(np.floor(fractions[1] * n))
    return order[:n_train], order[n_train : n_train + n_val], order[n_train + n_val :]


def _validation_mae(
    model: ModelWeights, x: np.ndarray, y_phys: np.ndarray, normalizer: TargetNormalizer
) -> tuple[float, float]:
    pred = forward_many_encoded(model, x)
    f_span = normalizer.f_max - normalizer.f_min
    s_span = normalizer.s_max - normalizer.s_min
    f_pred = normalizer.f_min + np.clip(pred[:, 0], 0.0, 1.0) * f_span
    s_pred = normalizer.s_min + np.clip(pred[:, 1], 0.0, 1.0) * s_span
    return mae(f_pred, y_phys[:, 0]), mae(s_pred, y_phys[:, 1])


def train(
    samples,
    sconfig: SurrogateConfig,
    tconfig: TrainConfig,
    normalizer: TargetNormalizer | None = None,
) -> TrainResult:
    """Train on (plate, f_res_ghz, s21_db) samples; labels are normalized internally.

    Deterministic for a fixed (seed, dataset, config) in this single-threaded
    implementation. Datasets too small to populate all three splits fall back
    to training on everything, flagged via TrainResult.degenerate.
    """
    normalizer = normalizer or TargetNormalizer()
    samples = list(samples)
    if not samples:
        raise ConfigError("dataset must not be empty")

    plates = np.stack(
        [s[0].cells if isinstance(s[0], PlateMatrix) else np.asarray(s[0]) for s in samples]
    )
    labels = np.array([(float(s[1]), float(s[2])) for s in samples], dtype=np.float64)

    x_all = encode_plates(plates, sconfig.input_encoding)
    f_span = normalizer.f_max - normalizer.f_min
    s_span = normalizer.s_max - normalizer.s_min
    y_all = np.column_stack(
        [(labels[:, 0] - normalizer.f_min) / f_span, (labels[:, 1] - normalizer.s_min) / s_span]
    )

    n = len(samples)
    split_rng = np.random.default_rng([tconfig.seed, 0])
    batch_rng = np.random.default_rng([tconfig.seed, 1])

    degenerate = n < 5
    if degenerate:
        idx_train = np.arange(n)
        idx_val = np.array([], dtype=int)
        idx_test = np.array([], dtype=int)
    else:
        idx_train, idx_val, idx_test = split_indices(n, tconfig.split, split_rng)
        if min(len(idx_train), len(idx_val), len(idx_test)) == 0:
            raise ConfigError(
                f"split {tconfig.split} leaves an empty subset for {n} samples"
            )

    batch_size = tconfig.batch_size or min(256, len(idx_train))
    model = build_model(sconfig, tconfig.seed)
    velocity = model.zeros_like()

    history: list[EpochRecord] = []
    best_model = model.copy()
    best_epoch = 0
    best_score = np.inf

    x_val = x_all[idx_val] if len(idx_val) else None
    y_val_phys = labels[idx_val] if len(idx_val) else None

    for epoch in range(tconfig.epochs):
        order = idx_train[batch_rng.permutation(len(idx_train))]
        loss_sum = 0.0
        for lo in range(0, len(order), batch_size):
            batch_idx = order[lo : lo + batch_size]
            loss, grads = _loss_and_gradients_encoded(model, x_all[batch_idx], y_all[batch_idx])
            sgd_step(model, grads, velocity, tconfig.learning_rate, tconfig.momentum)
            loss_sum += loss * len(batch_idx)
        train_loss = loss_sum / len(order)

        if x_val is not None:
            mae_f, mae_s = _validation_mae(model, x_val, y_val_phys, normalizer)
            score = mae_f + mae_s
        else:
            mae_f = mae_s = float("nan")
            score = np.inf
        history.append(EpochRecord(epoch, train_loss, mae_f, mae_s))

        if score < best_score:
            best_score = score
            best_model = model.copy()
            best_epoch = epoch

    if not np.isfinite(best_score):
        # no validation split (degenerate run) or the run diverged: keep the
        # final snapshot when it is finite, else the last finite best
        if all(np.isfinite(t).all() for t in model.tensors.values()):
            best_model = model.copy()
            best_epoch = tconfig.epochs - 1

    return TrainResult(
        model=best_model,
        history=history,
        best_epoch=best_epoch,
        degenerate=degenerate,
        split_sizes=(len(idx_train), len(idx_val), len(idx_test)),
    )


def history_to_csv(history) -> str:
    lines = ["epoch,train_loss,val_mae_f_ghz,val_mae_s21_db"]
    for rec in history:
        lines.append(f"{rec.epoch},{rec.train_loss!r},{rec.val_mae_f_ghz!r},{rec.val_mae_s21_db!r}")
    return "\n".join(lines) + "\n"
