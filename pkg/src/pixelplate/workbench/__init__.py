from .dataset import (
    Dataset,
    IngestResult,
    RowError,
    Sample,
    filter_gap,
    generate_dataset,
    ingest_touchstone_dir,
    load_dataset,
    save_dataset,
    split_dataset,
    training_samples,
)
from .design import DesignRun, run_design
from .evaluators import KNOWN_EVALUATORS, build_evaluator

__all__ = [
    "Dataset",
    "DesignRun",
    "IngestResult",
    "KNOWN_EVALUATORS",
    "RowError",
    "Sample",
    "build_evaluator",
    "filter_gap",
    "generate_dataset",
    "ingest_touchstone_dir",
    "load_dataset",
    "run_design",
    "save_dataset",
    "split_dataset",
    "training_samples",
]
