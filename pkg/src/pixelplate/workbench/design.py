"""End-to-end design runs: optimize against an evaluator and write artifacts.

Outputs under a literal path prefix: ``<prefix>plate.csv``, ``<prefix>plate.pbm``,
``<prefix>history.csv``, and ``<prefix>report.json``. Everything except the
report's wall_clock_seconds field is byte-reproducible for a fixed seed.
"""

from __future__ import annotations

import json
import time
from dataclasses import asdict, dataclass
from pathlib import Path

from .. import bpso
from ..bpso import BpsoConfig, DesignTarget, OptimizeResult
from ..geometry import assemble_plate, genome_to_hex, plate_to_csv, plate_to_pbm
from .evaluators import build_evaluator


@dataclass
class DesignRun:
    result: OptimizeResult
    report: dict
    paths: dict[str, Path]


def _prefixed(prefix: str, name: str) -> Path:
    path = Path(str(prefix) + name)
    path.parent.mkdir(parents=True, exist_ok=True)
    return path


def run_design(
    target: DesignTarget,
    evaluator_name: str,
    config: BpsoConfig,
    out_prefix: str,
    model_path=None,
    table_path=None,
) -> DesignRun:
    evaluator = build_evaluator(evaluator_name, model_path=model_path, table_path=table_path)

    started = time.perf_counter()
    result = bpso.optimize(evaluator, target, config)
    wall_seconds = time.perf_counter() - started

    plate = assemble_plate(result.best_genome)
    report = {
        "target": asdict(target),
        "evaluator": evaluator_name,
        "best_fitness": result.best_fitness,
        "best_genome_hex": genome_to_hex(result.best_genome),
        "predicted": {"f_ghz": result.best_point.f_res_ghz, "s21_db": result.best_point.s21_db},
        "iterations_run": result.history[-1].iteration,
        "evaluations": result.evaluations,
        "config": asdict(config),
        "wall_clock_seconds": wall_seconds,
    }

    paths = {
        "plate_csv": _prefixed(out_prefix, "plate.csv"),
        "plate_pbm": _prefixed(out_prefix, "plate.pbm"),
        "history_csv": _prefixed(out_prefix, "history.csv"),
        "report_json": _prefixed(out_prefix, "report.json"),
    }
    paths["plate_csv"].write_text(plate_to_csv(plate), encoding="utf-8")
    paths["plate_pbm"].write_text(plate_to_pbm(plate), encoding="utf-8")
    paths["history_csv"].write_text(bpso.history_to_csv(result.history), encoding="utf-8")
    paths["report_json"].write_text(
        json.dumps(report, sort_keys=True, indent=2) + "\n", encoding="utf-8"
    )
    return DesignRun(result, report, paths)
