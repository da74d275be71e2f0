"""Binary particle swarm optimization over 147-bit plate genomes.

Canonical sigmoid-transfer BPSO: real velocities steer per-bit flip
probabilities, inertia decays linearly, and personal/global bests update under
a strict-improvement rule. Any evaluator mapping a genome to a
(frequency, |S21|) point can sit in the simulator's seat: the closed-form
oracle, a trained surrogate, or a lookup table of ingested sweeps.

All random draws happen in one pinned order (initialization first, then per
step: particle-major, dimension-minor, r1 r2 r3), so runs are reproducible
for a fixed seed even if fitness evaluation is parallelized.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, EvaluatorError
from .geometry import (
    GENOME_BITS,
    PlateGenome,
    PlateMatrix,
    assemble_plate,
    genome_from_bits,
    genome_to_bits,
    genome_to_hex,
)
from .oracle import F_MIN_GHZ, F_SPAN_GHZ, S_SPAN_DB, synthetic_em
from .sparams import ResonancePoint
from .surrogate.model import ModelWeights, TargetNormalizer, forward_many


@dataclass(frozen=True)
class BpsoConfig:
    swarm_size: int = 30
    max_iterations: int = 1000
    inertia_start: float = 0.9
    inertia_end: float = 0.4
    c1: float = 2.0
    c2: float = 2.0
    v_max: float = 4.0
    seed: int = 0
    stop_fitness: float = 0.0  # gbest at or below this stops the run early

    def __post_init__(self):
        if self.swarm_size < 2:
            raise ConfigError("swarm_size must be >= 2")
        if self.max_iterations < 1:
            raise ConfigError("max_iterations must be >= 1")
        if self.v_max <= 0:
            raise ConfigError("v_max must be positive")
        if not 0 <= self.inertia_end <= self.inertia_start:
            raise ConfigError("need 0 <= inertia_end <= inertia_start")
        if self.c1 < 0 or self.c2 < 0:
            raise ConfigError("acceleration coefficients must be nonnegative")


@dataclass(frozen=True)
class DesignTarget:
    """Goal: hit f_target and reach at least s21_target coupling."""

    f_target_ghz: float
    s21_target_db: float
    weight_s21: float = 1.0

    def __post_init__(self):
        if self.f_target_ghz <= 0:
            raise ConfigError("target frequency must be positive")
        if self.weight_s21 < 0:
            raise ConfigError("weight_s21 must be nonnegative")


def fitness(point: ResonancePoint, target: DesignTarget) -> float:
    """Scalar objective, lower is better; 0 iff frequency exact and coupling at target.

    Frequency error is normalized by the 4 GHz band, the one-sided coupling
    shortfall by the 13 dB span; exceeding the coupling target costs nothing.
    """
    f_term = abs(point.f_res_ghz - target.f_target_ghz) / F_SPAN_GHZ
    s_term = max(0.0, target.s21_target_db - point.s21_db) / S_SPAN_DB
    return f_term + target.weight_s21 * s_term


def sigmoid(v):
    return 1.0 / (1.0 + np.exp(-np.asarray(v, dtype=np.float64)))


# ---------------------------------------------------------------------------
# evaluators


class Evaluator:
    """Genome -> ResonancePoint, memoized by genome bits.

    Subclasses implement _evaluate_plates on (N, 43, 43) bit grids;
    backend_evaluations counts how many plates actually reached the backend
    (memoization hits cost one dictionary lookup).
    """

    name = "evaluator"

    def __init__(self):
        self._cache: dict[bytes, ResonancePoint] = {}
        self.backend_evaluations = 0

    def _evaluate_plates(self, plates: np.ndarray) -> list[ResonancePoint]:
        raise NotImplementedError

    def __call__(self, genome: PlateGenome) -> ResonancePoint:
        return self.evaluate_many([genome])[0]

    def evaluate_many(self, genomes) -> list[ResonancePoint]:
        genomes = list(genomes)
        keys = [np.packbits(genome_to_bits(g)).tobytes() for g in genomes]
        miss_keys: list[bytes] = []
        miss_genomes: list[PlateGenome] = []
        for key, genome in zip(keys, genomes):
            if key not in self._cache and key not in miss_keys:
                miss_keys.append(key)
                miss_genomes.append(genome)
        if miss_genomes:
            plates = np.stack([assemble_plate(g).cells for g in miss_genomes])
            points = self._evaluate_plates(plates)
            self.backend_evaluations += len(miss_genomes)
            for key, point in zip(miss_keys, points):
                self._cache[key] = point
        return [self._cache[key] for key in keys]


class OracleEvaluator(Evaluator):
    """The closed-form synthetic-EM stand-in."""

    name = "oracle"

    def _evaluate_plates(self, plates: np.ndarray) -> list[ResonancePoint]:
        return [synthetic_em(PlateMatrix(cells)) for cells in plates]


class SurrogateEvaluator(Evaluator):
    """A trained residual-CNN regressor plus its target normalizer."""

    name = "surrogate"

    def __init__(self, model: ModelWeights, normalizer: TargetNormalizer):
        super().__init__()
        self.model = model
        self.normalizer = normalizer

    def _evaluate_plates(self, plates: np.ndarray) -> list[ResonancePoint]:
        out = forward_many(self.model, plates)
        return [
            ResonancePoint(*self.normalizer.denormalize(float(f), float(s)))
            for f, s in out
        ]


class LookupTableEvaluator(Evaluator):
    """Genome-hex -> point table (e.g. from ingested Touchstone data); misses error."""

    name = "lookup"

    def __init__(self, table: dict[str, ResonancePoint]):
        super().__init__()
        self.table = dict(table)

    def __call__(self, genome: PlateGenome) -> ResonancePoint:
        key = genome_to_hex(genome)
        try:
            return self.table[key]
        except KeyError:
            raise EvaluatorError(f"lookup table has no entry for genome {key}") from None

    def evaluate_many(self, genomes) -> list[ResonancePoint]:
        return [self(g) for g in genomes]


class FunctionEvaluator(Evaluator):
    """Wrap a plain genome -> ResonancePoint callable (niche/testing use)."""

    name = "function"

    def __init__(self, func):
        super().__init__()
        self._func = func

    def _evaluate_plates(self, plates: np.ndarray) -> list[ResonancePoint]:
        raise NotImplementedError

    def evaluate_many(self, genomes) -> list[ResonancePoint]:
        self.backend_evaluations += len(list(genomes))
        return [self._func(g) for g in genomes]


def evaluator_adapter(kind: str, **kwargs) -> Evaluator:
    """Uniform construction point: oracle | surrogate | lookup."""
    if kind == "oracle":
        return OracleEvaluator()
    if kind == "surrogate":
        return SurrogateEvaluator(kwargs["model"], kwargs["normalizer"])
    if kind == "lookup":
        return LookupTableEvaluator(kwargs["table"])
    raise EvaluatorError(f"unknown evaluator kind {kind!r}")


# ---------------------------------------------------------------------------
# swarm state


@dataclass(frozen=True)
class Particle:
    """Read-only view of one swarm member."""

    position: np.ndarray
    velocity: np.ndarray
    pbest_position: np.ndarray
    pbest_fitness: float


@dataclass
class Swarm:
    positions: np.ndarray  # (n, 147) uint8
    velocities: np.ndarray  # (n, 147) float64
    pbest_positions: np.ndarray
    pbest_fitness: np.ndarray  # (n,)
    gbest_position: np.ndarray  # (147,)
    gbest_fitness: float
    gbest_point: ResonancePoint

    @property
    def size(self) -> int:
        return self.positions.shape[0]

    def particle(self, i: int) -> Particle:
        return Particle(
            self.positions[i].copy(),
            self.velocities[i].copy(),
            self.pbest_positions[i].copy(),
            float(self.pbest_fitness[i]),
        )

    def gbest_genome(self) -> PlateGenome:
        return genome_from_bits(self.gbest_position)


@dataclass(frozen=True)
class HistoryRecord:
    iteration: int
    gbest_fitness: float
    gbest_f_ghz: float
    gbest_s21_db: float
    gbest_genome_hex: str


@dataclass
class OptimizeResult:
    best_genome: PlateGenome
    best_fitness: float
    best_point: ResonancePoint
    history: list[HistoryRecord] = field(default_factory=list)
    evaluations: int = 0


def _evaluate_positions(evaluator, positions: np.ndarray) -> list[ResonancePoint]:
    genomes = [genome_from_bits(row) for row in positions]
    evaluate_many = getattr(evaluator, "evaluate_many", None)
    try:
        if evaluate_many is not None:
            return list(evaluate_many(genomes))
        return [evaluator(g) for g in genomes]
    except EvaluatorError:
        # attribute the failure to a particle index for diagnosis
        for i, genome in enumerate(genomes):
            try:
                evaluator(genome)
            except EvaluatorError as exc:
                raise EvaluatorError(f"particle {i}: {exc}") from exc
        raise


def _update_bests(swarm: Swarm, points: list[ResonancePoint], target: DesignTarget) -> None:
    """Strict-improvement pbest/gbest updates, scanning particles in index order."""
    for i, point in enumerate(points):
        fit = fitness(point, target)
        if fit < swarm.pbest_fitness[i]:
            swarm.pbest_fitness[i] = fit
            swarm.pbest_positions[i] = swarm.positions[i]
        if fit < swarm.gbest_fitness:
            swarm.gbest_fitness = fit
            swarm.gbest_position = swarm.positions[i].copy()
            swarm.gbest_point = point


def init_swarm(
    evaluator, target: DesignTarget, config: BpsoConfig, rng: np.random.Generator
) -> Swarm:
    """Uniform random positions, zero velocities, bests from the first evaluation."""
    n = config.swarm_size
    positions = (rng.random((n, GENOME_BITS)) < 0.5).astype(np.uint8)
    swarm = Swarm(
        positions=positions,
        velocities=np.zeros((n, GENOME_BITS)),
        pbest_positions=positions.copy(),
        pbest_fitness=np.full(n, np.inf),
        gbest_position=positions[0].copy(),
        gbest_fitness=np.inf,
        gbest_point=ResonancePoint(F_MIN_GHZ, -15.0),
    )
    points = _evaluate_positions(evaluator, swarm.positions)
    _update_bests(swarm, points, target)
    return swarm


def step(
    swarm: Swarm,
    evaluator,
    target: DesignTarget,
    iteration: int,
    config: BpsoConfig,
    rng: np.random.Generator,
) -> Swarm:
    """One synchronous swarm update against the bests of the previous iteration.

    Per particle (index order) and dimension: draw r1, r2, update and clamp the
    velocity, draw r3, resample the bit against sigmoid(velocity). Fitness of
    the new positions then refreshes pbest/gbest.
    """
    frac = iteration / config.max_iterations
    w = config.inertia_start - (config.inertia_start - config.inertia_end) * frac

    draws = rng.random((swarm.size, GENOME_BITS, 3))
    x = swarm.positions.astype(np.float64)
    v = (
        w * swarm.velocities
        + config.c1 * draws[:, :, 0] * (swarm.pbest_positions - x)
        + config.c2 * draws[:, :, 1] * (swarm.gbest_position[None, :] - x)
    )
    np.clip(v, -config.v_max, config.v_max, out=v)
    swarm.velocities = v
    swarm.positions = (draws[:, :, 2] < sigmoid(v)).astype(np.uint8)

    points = _evaluate_positions(evaluator, swarm.positions)
    _update_bests(swarm, points, target)
    return swarm


def optimize(evaluator, target: DesignTarget, config: BpsoConfig) -> OptimizeResult:
    """Run BPSO; stops early once gbest fitness reaches config.stop_fitness.

    History row 0 is the randomly initialized swarm; row t is the state after
    step t. Fully reproducible for a fixed (seed, evaluator, target, config).
    """
    rng = np.random.default_rng(config.seed)
    swarm = init_swarm(evaluator, target, config, rng)
    history = [_history_record(0, swarm)]
    evaluations = swarm.size

    if swarm.gbest_fitness > config.stop_fitness:
        for it in range(config.max_iterations):
            step(swarm, evaluator, target, it, config, rng)
            history.append(_history_record(it + 1, swarm))
            evaluations += swarm.size
            if swarm.gbest_fitness <= config.stop_fitness:
                break

    return OptimizeResult(
        best_genome=swarm.gbest_genome(),
        best_fitness=float(swarm.gbest_fitness),
        best_point=swarm.gbest_point,
        history=history,
        evaluations=evaluations,
    )


def _history_record(iteration: int, swarm: Swarm) -> HistoryRecord:
    return HistoryRecord(
        iteration=iteration,
        gbest_fitness=float(swarm.gbest_fitness),
        gbest_f_ghz=swarm.gbest_point.f_res_ghz,
        gbest_s21_db=swarm.gbest_point.s21_db,
        gbest_genome_hex=genome_to_hex(swarm.gbest_genome()),
    )


def history_to_csv(history) -> str:
    lines = ["iteration,gbest_fitness,gbest_f_ghz,gbest_s21_db,gbest_genome_hex"]
    for rec in history:
        lines.append(
            f"{rec.iteration},{rec.gbest_fitness!r},{rec.gbest_f_ghz!r},"
            f"{rec.gbest_s21_db!r},{rec.gbest_genome_hex}"
        )
    return "\n".join(lines) + "\n"
