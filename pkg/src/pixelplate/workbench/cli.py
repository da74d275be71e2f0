"""Command-line entry point.

Subcommands string the pipeline together: generate labeled datasets, inspect
their statistics, train the surrogate, predict single genomes, run the BPSO
design loop, ingest external Touchstone exports, and export plates.

Exit codes: 0 success, 2 argument error, 3 data/parse error, 4 evaluator or
model error.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from ..bpso import BpsoConfig, DesignTarget
from ..errors import (
    ConfigError,
    DatasetError,
    EncodingError,
    EvaluatorError,
    ModelError,
    TouchstoneError,
)
from ..geometry import assemble_plate, genome_from_hex, plate_to_csv, plate_to_pbm
from ..stats import (
    cdf_from_histogram,
    empirical_histogram,
    histogram_to_csv,
    joint_histogram,
    joint_histogram_to_csv,
    summary,
    summary_to_csv,
)
from ..surrogate import (
    SurrogateConfig,
    TargetNormalizer,
    TrainConfig,
    history_to_csv,
    load_model,
    predict_physical,
    save_model,
    train,
)
from . import dataset as ds_module
from .dataset import filter_gap, generate_dataset, ingest_touchstone_dir, load_dataset, save_dataset
from .design import run_design
from .evaluators import KNOWN_EVALUATORS, build_evaluator

EXIT_OK = 0
EXIT_ARGS = 2
EXIT_DATA = 3
EXIT_MODEL = 4


def _parse_gap(text: str) -> tuple[float, float]:
    try:
        lo, hi = (float(v) for v in text.split(":"))
    except ValueError:
        raise ConfigError(f"--gap expects lo:hi, got {text!r}")
    if not lo < hi:
        raise ConfigError("--gap expects lo < hi")
    return lo, hi


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pixelplate",
        description="Surrogate-assisted BPSO design of pixelated coupling plates.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="label random genomes with an evaluator")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--evaluator", default="oracle", choices=KNOWN_EVALUATORS)
    p.add_argument("--model", default=None, help="PXSM weights (surrogate evaluator)")
    p.add_argument("--out", required=True)

    p = sub.add_parser("stats", help="summaries, PDFs/CDFs, and the joint histogram")
    p.add_argument("--in", dest="in_path", required=True)
    p.add_argument("--bins", type=int, default=50)
    p.add_argument("--gap", default=None, help="drop samples inside lo:hi GHz before analysis")
    p.add_argument("--out-prefix", required=True)

    p = sub.add_parser("train", help="train the surrogate on a labeled dataset")
    p.add_argument("--in", dest="in_path", required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--preset", choices=("desk", "paper"), default="desk")
    p.add_argument("--epochs", type=int, default=None)
    p.add_argument("--lr", type=float, default=0.001)
    p.add_argument("--momentum", type=float, default=0.9)
    p.add_argument("--batch", type=int, default=None)
    p.add_argument("--gap", default=None)
    p.add_argument("--out", required=True)
    p.add_argument("--history", required=True)

    p = sub.add_parser("predict", help="predict (f, |S21|) for one genome")
    p.add_argument("--model", required=True)
    p.add_argument("--genome", required=True, help="38-hex-char packed genome")

    p = sub.add_parser("optimize", help="BPSO toward a frequency/coupling target")
    p.add_argument("--target-f", type=float, required=True)
    p.add_argument("--target-s21", type=float, required=True)
    p.add_argument("--lambda", dest="weight_s21", type=float, default=1.0)
    p.add_argument("--evaluator", default="surrogate", choices=KNOWN_EVALUATORS)
    p.add_argument("--model", default=None)
    p.add_argument("--table", default=None, help="dataset for the lookup evaluator")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--iters", type=int, default=1000)
    p.add_argument("--swarm", type=int, default=30)
    p.add_argument("--out-prefix", required=True)

    p = sub.add_parser("ingest", help="build a dataset from Touchstone exports")
    p.add_argument("--dir", dest="directory", required=True)
    p.add_argument("--manifest", required=True)
    p.add_argument("--permissive", action="store_true")
    p.add_argument("--out", required=True)

    p = sub.add_parser("export", help="write one plate as CSV or PBM")
    p.add_argument("--genome", required=True)
    p.add_argument("--format", choices=("csv", "pbm"), required=True)
    p.add_argument("--out", required=True)

    return parser


def _cmd_generate(args) -> int:
    evaluator = build_evaluator(args.evaluator, model_path=args.model)
    ds = generate_dataset(args.n, args.seed, evaluator)
    save_dataset(ds, args.out)
    print(f"wrote {len(ds)} samples to {args.out}")
    return EXIT_OK


def _cmd_stats(args) -> int:
    ds = load_dataset(args.in_path)
    if args.gap:
        ds = filter_gap(ds, *_parse_gap(args.gap))
    if len(ds) < 2:
        raise DatasetError("need at least 2 samples for statistics")
    f = [s.f_res_ghz for s in ds.samples]
    s21 = [s.s21_db for s in ds.samples]

    outputs = {
        "summary.csv": summary_to_csv(
            {"f_res_ghz": summary(f, args.bins), "s21_db": summary(s21, args.bins)}
        ),
        "pdf_freq.csv": histogram_to_csv(empirical_histogram(f, args.bins, normalized=True)),
        "pdf_s21.csv": histogram_to_csv(empirical_histogram(s21, args.bins, normalized=True)),
        "cdf_freq.csv": histogram_to_csv(
            cdf_from_histogram(empirical_histogram(f, args.bins, normalized=True))
        ),
        "cdf_s21.csv": histogram_to_csv(
            cdf_from_histogram(empirical_histogram(s21, args.bins, normalized=True))
        ),
        "joint.csv": joint_histogram_to_csv(joint_histogram(zip(f, s21), args.bins, args.bins)),
    }
    for name, text in outputs.items():
        path = Path(str(args.out_prefix) + name)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text, encoding="utf-8")
    print(f"wrote {len(outputs)} stats files under {args.out_prefix}")
    return EXIT_OK


def _cmd_train(args) -> int:
    ds = load_dataset(args.in_path)
    if args.gap:
        ds = filter_gap(ds, *_parse_gap(args.gap))
    samples = ds_module.training_samples(ds)

    sconfig = SurrogateConfig() if args.preset == "desk" else SurrogateConfig.paper_preset()
    tconfig = TrainConfig(
        learning_rate=args.lr,
        momentum=args.momentum,
        batch_size=args.batch,
        epochs=args.epochs if args.epochs is not None else 200,
        seed=args.seed,
    )
    result = train(samples, sconfig, tconfig)
    save_model(args.out, result.model, TargetNormalizer())
    Path(args.history).parent.mkdir(parents=True, exist_ok=True)
    Path(args.history).write_text(history_to_csv(result.history), encoding="utf-8")
    best = result.history[result.best_epoch]
    if result.degenerate:
        print("warning: dataset too small for a 60/20/20 split; trained on everything")
    print(
        f"trained {tconfig.epochs} epochs on {result.split_sizes[0]} samples; "
        f"best epoch {result.best_epoch}: val MAE f={best.val_mae_f_ghz!r} GHz, "
        f"s21={best.val_mae_s21_db!r} dB"
    )
    return EXIT_OK


def _cmd_predict(args) -> int:
    model, normalizer = load_model(args.model)
    plate = assemble_plate(genome_from_hex(args.genome))
    point = predict_physical(model, normalizer, plate)
    print(f"f_ghz={point.f_res_ghz!r} s21_db={point.s21_db!r}")
    return EXIT_OK


def _cmd_optimize(args) -> int:
    target = DesignTarget(args.target_f, args.target_s21, args.weight_s21)
    config = BpsoConfig(swarm_size=args.swarm, max_iterations=args.iters, seed=args.seed)
    run = run_design(
        target,
        args.evaluator,
        config,
        args.out_prefix,
        model_path=args.model,
        table_path=args.table,
    )
    print(
        f"best fitness {run.report['best_fitness']!r} at "
        f"f={run.report['predicted']['f_ghz']!r} GHz, "
        f"s21={run.report['predicted']['s21_db']!r} dB "
        f"({run.report['iterations_run']} iterations, {run.report['wall_clock_seconds']:.1f}s)"
    )
    return EXIT_OK


def _cmd_ingest(args) -> int:
    result = ingest_touchstone_dir(args.directory, args.manifest, permissive=args.permissive)
    save_dataset(result.dataset, args.out)
    print(f"ingested {len(result.dataset)} samples to {args.out}")
    for err in result.errors:
        print(f"skipped row {err.row} ({err.filename}): {err.reason}", file=sys.stderr)
    return EXIT_OK


def _cmd_export(args) -> int:
    plate = assemble_plate(genome_from_hex(args.genome))
    text = plate_to_csv(plate) if args.format == "csv" else plate_to_pbm(plate)
    path = Path(args.out)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8")
    print(f"wrote {args.format} plate to {args.out}")
    return EXIT_OK


_COMMANDS = {
    "generate": _cmd_generate,
    "stats": _cmd_stats,
    "train": _cmd_train,
    "predict": _cmd_predict,
    "optimize": _cmd_optimize,
    "ingest": _cmd_ingest,
    "export": _cmd_export,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ARGS
    except (EncodingError, TouchstoneError, DatasetError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (ModelError, EvaluatorError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_MODEL


if __name__ == "__main__":
    sys.exit(main())
