"""Pixelated plate geometry: tiles, genomes, assembled plates, and design-rule checks.

A plate is a 43x43 binary grid (1 = copper). It is fully determined by three
7x7 tiles: a 3x3 tile layout [[T1,T2,T1],[T2,T3,T2],[T1,T2,T1]] forms one
21x21 quadrant, the quadrant is mirrored into the other three, and the center
row/column (the feed cross) is forced to copper. The 147 tile bits are the
search variable everywhere else in the toolkit.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, EncodingError

PLATE_SIZE = 43
TILE_SIZE = 7
GENOME_BITS = 3 * TILE_SIZE * TILE_SIZE  # 147
GENOME_BYTES = 19  # 147 bits packed MSB-first, low 5 bits of the last byte zero
CROSS_INDEX = 21  # fixed feed row/column
QUADRANT_SIZE = 21

SPEED_OF_LIGHT_MM_GHZ = 299.792458  # mm * GHz


def _as_bit_grid(cells, side: int) -> np.ndarray:
    arr = np.asarray(cells, dtype=np.uint8)
    if arr.shape != (side, side):
        raise EncodingError(f"expected a {side}x{side} grid, got shape {arr.shape}")
    if not np.isin(arr, (0, 1)).all():
        raise EncodingError("grid cells must be 0 or 1")
    return arr


@dataclass(frozen=True, eq=False)
class Tile:
    """One 7x7 binary sub-block (1 = copper)."""

    cells: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "cells", _as_bit_grid(self.cells, TILE_SIZE))

    def __eq__(self, other):
        return isinstance(other, Tile) and np.array_equal(self.cells, other.cells)

    def ones(self) -> int:
        return int(self.cells.sum())


@dataclass(frozen=True, eq=False)
class PlateGenome:
    """Three tiles; bijective with a 147-bit string (t1, t2, t3, row-major)."""

    t1: Tile
    t2: Tile
    t3: Tile

    def __eq__(self, other):
        return (
            isinstance(other, PlateGenome)
            and self.t1 == other.t1
            and self.t2 == other.t2
            and self.t3 == other.t3
        )

    @property
    def tiles(self) -> tuple[Tile, Tile, Tile]:
        return (self.t1, self.t2, self.t3)


@dataclass(frozen=True, eq=False)
class PlateMatrix:
    """Assembled 43x43 plate. Validates the fixed cross and mirror symmetry."""

    cells: np.ndarray

    def __post_init__(self):
        cells = _as_bit_grid(self.cells, PLATE_SIZE)
        if not cells[CROSS_INDEX, :].all() or not cells[:, CROSS_INDEX].all():
            raise EncodingError("feed cross (row/column 21) must be all copper")
        if not np.array_equal(cells, cells[::-1, :]) or not np.array_equal(cells, cells[:, ::-1]):
            raise EncodingError("plate must be mirror-symmetric about both axes")
        object.__setattr__(self, "cells", cells)

    def __eq__(self, other):
        return isinstance(other, PlateMatrix) and np.array_equal(self.cells, other.cells)

    def ones(self) -> int:
        return int(self.cells.sum())


@dataclass(frozen=True)
class GeometryConfig:
    """Physical plate parameters; defaults follow the fabricated FR-4 prototype."""

    plate_side_mm: float = 62.0
    pixel_side_mm: float = 1.4
    substrate_permittivity: float = 4.3
    substrate_height_mm: float = 1.6
    loss_tangent: float = 0.025
    plate_gap_mm: float = 5.0
    copper_thickness_mm: float = 0.035
    band_min_ghz: float = 1.0
    band_max_ghz: float = 5.0

    def __post_init__(self):
        lengths = (
            self.plate_side_mm,
            self.pixel_side_mm,
            self.substrate_height_mm,
            self.plate_gap_mm,
            self.copper_thickness_mm,
        )
        if any(v <= 0 for v in lengths):
            raise ConfigError("all lengths must be positive")
        if not (0 < self.band_min_ghz < self.band_max_ghz):
            raise ConfigError("band_min_ghz must be positive and below band_max_ghz")


def assemble_plate(genome: PlateGenome) -> PlateMatrix:
    """Build the full 43x43 plate from a genome.

    The quadrant is the 3x3 tile layout [[T1,T2,T1],[T2,T3,T2],[T1,T2,T1]],
    placed unreflected in rows/cols 0..20; the other quadrants are mirror
    images; the feed cross is forced to copper last.
    """
    t1, t2, t3 = genome.t1.cells, genome.t2.cells, genome.t3.cells
    quadrant = np.block([[t1, t2, t1], [t2, t3, t2], [t1, t2, t1]])

    cells = np.zeros((PLATE_SIZE, PLATE_SIZE), dtype=np.uint8)
    cells[:QUADRANT_SIZE, :QUADRANT_SIZE] = quadrant
    cells[:QUADRANT_SIZE, CROSS_INDEX + 1 :] = quadrant[:, ::-1]
    cells[CROSS_INDEX + 1 :, :QUADRANT_SIZE] = quadrant[::-1, :]
    cells[CROSS_INDEX + 1 :, CROSS_INDEX + 1 :] = quadrant[::-1, ::-1]
    cells[CROSS_INDEX, :] = 1
    cells[:, CROSS_INDEX] = 1
    return PlateMatrix(cells)


def genome_from_bits(bits) -> PlateGenome:
    """Decode 147 bits (t1 row-major, then t2, then t3) into a genome."""
    arr = np.asarray(bits, dtype=np.uint8).ravel()
    if arr.size != GENOME_BITS:
        raise EncodingError(f"genome needs exactly {GENOME_BITS} bits, got {arr.size}")
    if not np.isin(arr, (0, 1)).all():
        raise EncodingError("genome bits must be 0 or 1")
    per = TILE_SIZE * TILE_SIZE
    tiles = [Tile(arr[i * per : (i + 1) * per].reshape(TILE_SIZE, TILE_SIZE)) for i in range(3)]
    return PlateGenome(*tiles)


def genome_to_bits(genome: PlateGenome) -> np.ndarray:
    """Inverse of genome_from_bits; returns a length-147 uint8 array."""
    return np.concatenate([t.cells.ravel() for t in genome.tiles]).astype(np.uint8)


def genome_to_hex(genome: PlateGenome) -> str:
    """Pack the 147 bits MSB-first into 19 bytes; render as 38 lowercase hex chars."""
    packed = np.packbits(genome_to_bits(genome))  # pads the tail with zeros
    return packed.tobytes().hex()


def genome_from_hex(text: str) -> PlateGenome:
    """Decode the 38-hex-char packed form, rejecting bad lengths and nonzero padding."""
    text = text.strip().lower()
    if len(text) != 2 * GENOME_BYTES:
        raise EncodingError(f"genome hex must be {2 * GENOME_BYTES} characters, got {len(text)}")
    try:
        raw = bytes.fromhex(text)
    except ValueError as exc:
        raise EncodingError(f"invalid genome hex: {exc}") from exc
    bits = np.unpackbits(np.frombuffer(raw, dtype=np.uint8))
    if bits[GENOME_BITS:].any():
        raise EncodingError("padding bits after the 147 genome bits must be zero")
    return genome_from_bits(bits[:GENOME_BITS])


def random_genome(seed: int) -> PlateGenome:
    """Seeded uniform genome: each of the 147 bits is an independent fair coin."""
    rng = np.random.default_rng(seed)
    return genome_from_bits(rng.integers(0, 2, size=GENOME_BITS, dtype=np.uint8))


def design_space_size() -> str:
    """Exact count of distinct genomes, 2^147, as a decimal string."""
    return str(2**GENOME_BITS)


def tile_space_size() -> int:
    """Exact count of distinct tiles, 2^49."""
    return 2 ** (TILE_SIZE * TILE_SIZE)


def guided_wavelength(freq_ghz: float, permittivity: float) -> float:
    """Wavelength in mm inside the substrate, approximated as lambda0 / sqrt(eps_r)."""
    if freq_ghz <= 0:
        raise ValueError("frequency must be positive")
    if permittivity < 1:
        raise ValueError("relative permittivity must be >= 1")
    return SPEED_OF_LIGHT_MM_GHZ / (freq_ghz * np.sqrt(permittivity))


@dataclass(frozen=True)
class ConstraintCheck:
    name: str
    passed: bool
    actual: float
    limit: float
    relation: str  # human-readable, e.g. "<"

    def describe(self) -> str:
        verdict = "pass" if self.passed else "FAIL"
        return f"{self.name}: {self.actual:.4f} {self.relation} {self.limit:.4f} [{verdict}]"


@dataclass(frozen=True)
class ConstraintReport:
    checks: tuple[ConstraintCheck, ...] = field(default_factory=tuple)

    @property
    def all_pass(self) -> bool:
        return all(c.passed for c in self.checks)

    def check(self, name: str) -> ConstraintCheck:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)


def validate_constraints(config: GeometryConfig) -> ConstraintReport:
    """Design-rule report: pixel electrically small, grid fits, plate below one wavelength.

    Failures are report entries, never exceptions.
    """
    eps = config.substrate_permittivity
    lam_hi = guided_wavelength(config.band_max_ghz, eps)
    lam_lo = guided_wavelength(config.band_min_ghz, eps)
    grid_span = PLATE_SIZE * config.pixel_side_mm
    checks = (
        ConstraintCheck(
            "pixel_electrically_small",
            config.pixel_side_mm < lam_hi / 20.0,
            config.pixel_side_mm,
            lam_hi / 20.0,
            "<",
        ),
        ConstraintCheck(
            "grid_fits_plate",
            config.plate_side_mm >= grid_span,
            config.plate_side_mm,
            grid_span,
            ">=",
        ),
        ConstraintCheck(
            "plate_below_lowest_wavelength",
            config.plate_side_mm < lam_lo,
            config.plate_side_mm,
            lam_lo,
            "<",
        ),
    )
    return ConstraintReport(checks)


def plate_to_csv(plate: PlateMatrix) -> str:
    """43 rows of 43 comma-separated 0/1 characters."""
    return "\n".join(",".join(str(int(v)) for v in row) for row in plate.cells) + "\n"


def plate_to_pbm(plate: PlateMatrix) -> str:
    """Plain PBM (P1) image, one plate per file; 1 renders as copper."""
    rows = "\n".join(" ".join(str(int(v)) for v in row) for row in plate.cells)
    return f"P1\n{PLATE_SIZE} {PLATE_SIZE}\n{rows}\n"
