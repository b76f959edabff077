"""Integer-lattice differential evolution with rand/1 mutation.

The variant implemented here is the one used for per-pixel search:

* mutation only — ``trial = x_r1 + F * (x_r2 - x_r3)`` with three donors
  drawn distinct from each other and from the target index; no crossover;
* one-to-one spawning selection — a trial replaces its parent only when it
  is strictly fitter;
* positions live on an integer lattice (pixel coordinates and 8-bit
  colors), so mutants are rounded half-away-from-zero and clamped into the
  search bounds;
* selection is applied after a whole generation has been evaluated, so
  fitness calls within a generation may run concurrently (pass ``map_fn``)
  without perturbing the mutation RNG stream, which stays sequential and
  owned by the run loop.

Every trial evaluation is recorded in an archive in evaluation order; at the
default 200x60 configuration that is 12,000 scored candidates per run.
"""

from dataclasses import dataclass, field
from typing import Callable, List, Optional

import math

import numpy as np


class FitnessError(RuntimeError):
    """Fitness evaluation failed; carries the offending position."""

    def __init__(self, message, position):
        super().__init__(message)
        self.position = np.asarray(position).copy()


@dataclass(frozen=True)
class SearchBounds:
    """Inclusive per-dimension bounds for candidate vectors.

    For the pixel encoding (x, y, r, g, b) use :meth:`for_image`, which
    spans 1-based pixel coordinates and the full 8-bit color range.
    """

    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        lo = np.asarray(self.lower, dtype=np.int64)
        hi = np.asarray(self.upper, dtype=np.int64)
        if lo.ndim != 1 or lo.shape != hi.shape:
            raise ValueError("lower/upper must be 1-D arrays of equal length")
        if np.any(lo > hi):
            raise ValueError(f"lower > upper in some dimension: {lo} vs {hi}")
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)
        lo.setflags(write=False)
        hi.setflags(write=False)

    @property
    def dimensions(self) -> int:
        return self.lower.shape[0]

    @classmethod
    def for_image(cls, height: int, width: int) -> "SearchBounds":
        """Bounds for (x, y, r, g, b): x in [1, width], y in [1, height],
        colors in [0, 255]."""
        return cls(
            lower=np.array([1, 1, 0, 0, 0]),
            upper=np.array([width, height, 255, 255, 255]),
        )

    def clip(self, vec: np.ndarray) -> np.ndarray:
        return np.clip(vec, self.lower, self.upper)


@dataclass(frozen=True)
class DeConfig:
    """Run parameters. The defaults are the attack's reference setting:
    200 members for 60 generations with scale factor 0.5."""

    population_size: int = 200
    generations: int = 60
    scale_factor: float = 0.5
    rng_seed: Optional[int] = None
    init_color_mean: float = 128.0
    init_color_std: float = 127.0

    def __post_init__(self):
        if self.population_size < 4:
            raise ValueError(
                f"population_size must be >= 4 for rand/1 (three donors plus "
                f"the target), got {self.population_size}"
            )
        if self.generations < 1:
            raise ValueError(f"generations must be >= 1, got {self.generations}")
        if not self.scale_factor > 0:
            raise ValueError(f"scale_factor must be > 0, got {self.scale_factor}")


@dataclass(frozen=True)
class EvaluatedMember:
    position: np.ndarray
    fitness: float


@dataclass(frozen=True)
class DeResult:
    """Final population, the trial archive in evaluation order, and the best
    fitness after initialization and after each generation's selection."""

    population: List[EvaluatedMember]
    archive: List[EvaluatedMember]
    best_per_generation: List[float] = field(default_factory=list)


def _round_half_away(values: np.ndarray) -> np.ndarray:
    return np.sign(values) * np.floor(np.abs(values) + 0.5)


def initialize_population(
    bounds: SearchBounds, config: DeConfig, rng: np.random.Generator
) -> np.ndarray:
    """Draw the starting population for the pixel encoding.

    Coordinates (dims 0-1) are uniform over their bounds; colors (dims 2+)
    are Gaussian with the configured mean/std (defaults 128/127), clamped
    into bounds. All values are rounded to integers.
    """
    n = config.population_size
    d = bounds.dimensions
    pop = np.empty((n, d), dtype=np.int64)
    for j in range(d):
        lo, hi = bounds.lower[j], bounds.upper[j]
        if j < 2:
            raw = rng.uniform(lo, hi, n)
        else:
            raw = rng.normal(config.init_color_mean, config.init_color_std, n)
        pop[:, j] = np.clip(_round_half_away(raw), lo, hi).astype(np.int64)
    return pop


def mutate_rand1(
    population: np.ndarray,
    index: int,
    scale_factor: float,
    bounds: SearchBounds,
    rng: np.random.Generator,
) -> np.ndarray:
    """rand/1 mutant for one target index, rounded and clamped in-bounds.

    Donor indices r1, r2, r3 are distinct from each other and from the
    target. No crossover is applied: the trial is the mutant itself.
    """
    n = population.shape[0]
    if n < 4:
        raise ValueError(f"population size {n} too small for rand/1 (need >= 4)")
    pool = np.arange(n)
    pool = pool[pool != index]
    r1, r2, r3 = rng.choice(pool, size=3, replace=False)
    mutant = population[r1] + scale_factor * (
        population[r2].astype(np.float64) - population[r3].astype(np.float64)
    )
    return bounds.clip(_round_half_away(mutant)).astype(np.int64)


def _evaluate(fitness, position):
    try:
        value = fitness(position)
    except Exception as exc:
        raise FitnessError(
            f"fitness evaluation failed at position {position.tolist()}: {exc}",
            position,
        ) from exc
    value = float(value)
    if not math.isfinite(value):
        raise FitnessError(
            f"fitness returned non-finite value {value!r} at position "
            f"{position.tolist()}",
            position,
        )
    return value


def run(
    config: DeConfig,
    bounds: SearchBounds,
    fitness: Callable[[np.ndarray], float],
    map_fn=map,
) -> DeResult:
    """Evolve for the configured number of generations.

    ``fitness`` must return a finite float for every in-bounds integer
    position; any failure aborts the run with a :class:`FitnessError`
    naming the offending position. ``map_fn`` may be an order-preserving
    concurrent map (e.g. ``ThreadPoolExecutor.map``); results are identical
    to the sequential run because selection happens after each generation.

    Returns the final population, the archive of all trial evaluations in
    evaluation order (exactly ``population_size * generations`` records),
    and per-generation best fitness, which is non-decreasing.
    """
    rng = np.random.default_rng(config.rng_seed)
    population = initialize_population(bounds, config, rng)
    n = config.population_size

    member_views = [population[i].copy() for i in range(n)]
    fitnesses = np.array(list(map_fn(lambda p: _evaluate(fitness, p), member_views)))

    archive: List[EvaluatedMember] = []
    best_history = [float(fitnesses.max())]

    for _ in range(config.generations):
        # Mutation draws consume the RNG sequentially before any evaluation.
        trials = [
            mutate_rand1(population, i, config.scale_factor, bounds, rng)
            for i in range(n)
        ]
        trial_fits = list(map_fn(lambda t: _evaluate(fitness, t), trials))
        for i in range(n):
            archive.append(EvaluatedMember(trials[i].copy(), trial_fits[i]))
            if trial_fits[i] > fitnesses[i]:
                population[i] = trials[i]
                fitnesses[i] = trial_fits[i]
        best_history.append(float(fitnesses.max()))

    final = [
        EvaluatedMember(population[i].copy(), float(fitnesses[i])) for i in range(n)
    ]
    return DeResult(population=final, archive=archive, best_per_generation=best_history)
