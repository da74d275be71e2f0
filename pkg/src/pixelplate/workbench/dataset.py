"""Labeled-sample datasets: generation, Touchstone ingestion, JSONL persistence.

A sample is a packed genome plus its (f_res_ghz, s21_db) label and provenance.
Files are JSON Lines (one sample per line, fixed keys) with a sidecar
``*.meta.json`` carrying the creation seed, evaluator name, and tool version.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .. import __version__
from ..errors import ConfigError, DatasetError, EncodingError, PixelplateError
from ..geometry import assemble_plate, genome_from_hex, genome_to_hex, random_genome
from ..sparams import extract_main_resonance, parse_touchstone

SOURCES = ("oracle", "touchstone", "surrogate")

_ORACLE_F_RANGE = (1.0, 5.0)


@dataclass(frozen=True)
class Sample:
    genome_hex: str
    f_res_ghz: float
    s21_db: float
    source: str

    def __post_init__(self):
        genome_from_hex(self.genome_hex)  # rejects malformed encodings
        if self.source not in SOURCES:
            raise DatasetError(f"unknown sample source {self.source!r}")
        if self.source == "oracle" and not (
            _ORACLE_F_RANGE[0] <= self.f_res_ghz <= _ORACLE_F_RANGE[1]
        ):
            raise DatasetError(
                f"oracle-sourced frequency {self.f_res_ghz} outside {_ORACLE_F_RANGE}"
            )


@dataclass
class Dataset:
    samples: list[Sample] = field(default_factory=list)
    meta: dict = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.samples)


def _make_meta(seed, evaluator_name: str) -> dict:
    return {"creation_seed": seed, "evaluator": evaluator_name, "tool_version": __version__}


def generate_dataset(n: int, seed: int, evaluator) -> Dataset:
    """Label n random genomes (per-row seeds seed+index) with the evaluator."""
    if n < 1:
        raise ConfigError("n must be >= 1")
    genomes = [random_genome(seed + i) for i in range(n)]
    evaluate_many = getattr(evaluator, "evaluate_many", None)
    try:
        if evaluate_many is not None:
            points = list(evaluate_many(genomes))
        else:
            points = [evaluator(g) for g in genomes]
    except PixelplateError:
        for i, genome in enumerate(genomes):
            try:
                evaluator(genome)
            except PixelplateError as exc:
                raise DatasetError(f"evaluator failed at sample index {i}: {exc}") from exc
        raise
    name = getattr(evaluator, "name", "oracle")
    samples = [
        Sample(genome_to_hex(g), p.f_res_ghz, p.s21_db, name if name in SOURCES else "oracle")
        for g, p in zip(genomes, points)
    ]
    return Dataset(samples, _make_meta(seed, name))


@dataclass(frozen=True)
class RowError:
    row: int  # 1-based manifest data row
    genome_hex: str
    filename: str
    reason: str


@dataclass
class IngestResult:
    dataset: Dataset
    errors: list[RowError] = field(default_factory=list)


def read_manifest(path) -> list[tuple[str, str]]:
    """Manifest CSV with a genome_hex,filename header; returns rows in file order."""
    path = Path(path)
    if not path.exists():
        raise DatasetError(f"manifest not found: {path}")
    with path.open(newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or not {"genome_hex", "filename"} <= set(reader.fieldnames):
            raise DatasetError("manifest needs genome_hex and filename columns")
        return [(row["genome_hex"].strip(), row["filename"].strip()) for row in reader]


def ingest_touchstone_dir(directory, manifest_path, permissive: bool = False) -> IngestResult:
    """One sample per manifest row: parse the sweep, take its |S21| peak.

    Strict mode aborts on the first broken row; permissive mode skips broken
    rows and reports them.
    """
    directory = Path(directory)
    rows = read_manifest(manifest_path)
    samples: list[Sample] = []
    errors: list[RowError] = []
    for i, (genome_hex, filename) in enumerate(rows, start=1):
        try:
            genome_from_hex(genome_hex)
            file_path = directory / filename
            if not file_path.exists():
                raise DatasetError(f"file not found: {file_path}")
            sweep = parse_touchstone(file_path.read_bytes())
            peak = extract_main_resonance(sweep)
            samples.append(Sample(genome_hex, peak.f_res_ghz, peak.s21_db, "touchstone"))
        except (PixelplateError, OSError) as exc:
            if not permissive:
                raise DatasetError(f"manifest row {i} ({filename}): {exc}") from exc
            errors.append(RowError(i, genome_hex, filename, str(exc)))
    return IngestResult(Dataset(samples, _make_meta(None, "touchstone")), errors)


def split_dataset(ds: Dataset, fractions, seed: int) -> tuple[Dataset, Dataset, Dataset]:
    """Seeded shuffle, then contiguous floor-sized train/val/test slices."""
    if len(fractions) != 3 or abs(sum(fractions) - 1.0) > 1e-9:
        raise ConfigError("fractions must be three values summing to 1")
    n = len(ds)
    order = np.random.default_rng(seed).permutation(n)
    n_train = int(np.floor(fractions[0] * n))
    n_val = int(np.floor(fractions[1] * n))
    cuts = (order[:n_train], order[n_train : n_train + n_val], order[n_train + n_val :])
    if any(len(c) == 0 for c in cuts):
        raise ConfigError(f"split {tuple(fractions)} leaves an empty subset for {n} samples")
    make = lambda idx: Dataset([ds.samples[i] for i in idx], dict(ds.meta))
    return make(cuts[0]), make(cuts[1]), make(cuts[2])


def filter_gap(ds: Dataset, gap_lo_ghz: float, gap_hi_ghz: float) -> Dataset:
    """Drop samples whose resonance lies strictly inside the (lo, hi) gap."""
    if not gap_lo_ghz < gap_hi_ghz:
        raise ConfigError("gap_lo must be below gap_hi")
    kept = [s for s in ds.samples if not (gap_lo_ghz < s.f_res_ghz < gap_hi_ghz)]
    return Dataset(kept, dict(ds.meta))


# ---------------------------------------------------------------------------
# persistence


def meta_path_for(path) -> Path:
    path = Path(path)
    return path.with_suffix(".meta.json") if path.suffix == ".jsonl" else Path(str(path) + ".meta.json")


def save_dataset(ds: Dataset, path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = []
    for s in ds.samples:
        lines.append(
            json.dumps(
                {
                    "genome_hex": s.genome_hex,
                    "f_res_ghz": s.f_res_ghz,
                    "s21_db": s.s21_db,
                    "source": s.source,
                },
                separators=(",", ":"),
            )
        )
    path.write_text("".join(line + "\n" for line in lines), encoding="utf-8")
    meta_path_for(path).write_text(
        json.dumps(ds.meta, sort_keys=True, indent=2) + "\n", encoding="utf-8"
    )


def load_dataset(path) -> Dataset:
    path = Path(path)
    if not path.exists():
        raise DatasetError(f"dataset not found: {path}")
    samples = []
    for line_no, line in enumerate(path.read_text(encoding="utf-8").splitlines(), start=1):
        if not line.strip():
            continue
        try:
            row = json.loads(line)
            samples.append(
                Sample(row["genome_hex"], float(row["f_res_ghz"]), float(row["s21_db"]), row["source"])
            )
        except (KeyError, TypeError, ValueError, EncodingError, DatasetError) as exc:
            raise DatasetError(f"{path}:{line_no}: bad sample row: {exc}") from exc
    meta = {}
    mp = meta_path_for(path)
    if mp.exists():
        try:
            meta = json.loads(mp.read_text(encoding="utf-8"))
        except ValueError as exc:
            raise DatasetError(f"unreadable meta sidecar {mp}: {exc}") from exc
    return Dataset(samples, meta)


def training_samples(ds: Dataset) -> list[tuple]:
    """Decode every sample into (plate, f_res_ghz, s21_db) for the trainer."""
    out = []
    for s in ds.samples:
        plate = assemble_plate(genome_from_hex(s.genome_hex))
        out.append((plate, s.f_res_ghz, s.s21_db))
    return out
