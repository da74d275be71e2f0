from .model import (
    ModelWeights,
    SurrogateConfig,
    TargetNormalizer,
    build_model,
    forward,
    forward_many,
    loss_and_gradients,
    mae,
    manifest_shapes,
    predict_physical,
    sgd_step,
    spatial_sizes,
)
from .pxsm import load_model, model_from_bytes, model_to_bytes, save_model
from .train import EpochRecord, TrainConfig, TrainResult, history_to_csv, split_indices, train

__all__ = [
    "EpochRecord",
    "ModelWeights",
    "SurrogateConfig",
    "TargetNormalizer",
    "TrainConfig",
    "TrainResult",
    "build_model",
    "forward",
    "forward_many",
    "history_to_csv",
    "load_model",
    "loss_and_gradients",
    "mae",
    "manifest_shapes",
    "model_from_bytes",
    "model_to_bytes",
    "predict_physical",
    "save_model",
    "sgd_step",
    "spatial_sizes",
    "split_indices",
    "train",
]
