"""Differential-evolution contract tests."""

import numpy as np
import pytest

from greedyfool.evolution import (
    DeConfig,
    FitnessError,
    SearchBounds,
    initialize_population,
    mutate_rand1,
    run,
)

IMAGE_BOUNDS = SearchBounds.for_image(32, 32)


def test_bounds_for_image():
    np.testing.assert_array_equal(IMAGE_BOUNDS.lower, [1, 1, 0, 0, 0])
    np.testing.assert_array_equal(IMAGE_BOUNDS.upper, [32, 32, 255, 255, 255])
    with pytest.raises(ValueError):
        SearchBounds(lower=[2, 0], upper=[1, 5])


def test_config_validation():
    with pytest.raises(ValueError):
        DeConfig(population_size=3)
    with pytest.raises(ValueError):
        DeConfig(generations=0)
    with pytest.raises(ValueError):
        DeConfig(scale_factor=0.0)


def test_initialize_population_ranges_and_rounding():
    config = DeConfig(population_size=200, rng_seed=11)
    pop = initialize_population(IMAGE_BOUNDS, config, np.random.default_rng(11))
    assert pop.shape == (200, 5)
    assert pop.dtype == np.int64
    assert pop[:, 0].min() >= 1 and pop[:, 0].max() <= 32
    assert pop[:, 1].min() >= 1 and pop[:, 1].max() <= 32
    assert pop[:, 2:].min() >= 0 and pop[:, 2:].max() <= 255
    # Gaussian color init with sigma 127 must clamp to both color extremes
    # somewhere in 200x3 draws
    assert (pop[:, 2:] == 0).any() and (pop[:, 2:] == 255).any()


def test_initialize_population_minimum_size():
    config = DeConfig(population_size=4, generations=1)
    pop = initialize_population(IMAGE_BOUNDS, config, np.random.default_rng(0))
    assert pop.shape == (4, 5)


def test_initialize_population_deterministic():
    config = DeConfig(population_size=50, rng_seed=5)
    a = initialize_population(IMAGE_BOUNDS, config, np.random.default_rng(5))
    b = initialize_population(IMAGE_BOUNDS, config, np.random.default_rng(5))
    np.testing.assert_array_equal(a, b)


def test_mutate_rand1_derived_example():
    # donors fixed; scale 0.5 turns the (4,-4,40,-20,20) difference into
    # exactly the r2 donor
    population = np.array(
        [
            [10, 10, 100, 100, 100],
            [12, 8, 120, 90, 110],
            [8, 12, 80, 110, 90],
            [1, 1, 1, 1, 1],
        ],
        dtype=np.int64,
    )

    class FixedChoiceRng:
        def choice(self, pool, size, replace):
            return np.array([0, 1, 2])

    trial = mutate_rand1(population, 3, 0.5, IMAGE_BOUNDS, FixedChoiceRng())
    np.testing.assert_array_equal(trial, [12, 8, 120, 90, 110])


def test_mutate_rand1_zero_difference_returns_donor():
    population = np.array(
        [
            [5, 5, 50, 50, 50],
            [7, 7, 70, 70, 70],
            [7, 7, 70, 70, 70],
            [9, 9, 90, 90, 90],
        ],
        dtype=np.int64,
    )

    class FixedChoiceRng:
        def choice(self, pool, size, replace):
            return np.array([3, 1, 2])  # r2 == r3 values, distinct indices

    trial = mutate_rand1(population, 0, 0.5, IMAGE_BOUNDS, FixedChoiceRng())
    np.testing.assert_array_equal(trial, population[3])


def test_mutate_rand1_respects_bounds(rng):
    config = DeConfig(population_size=30, rng_seed=1)
    pop = initialize_population(IMAGE_BOUNDS, config, np.random.default_rng(1))
    for i in range(30):
        trial = mutate_rand1(pop, i, 0.5, IMAGE_BOUNDS, rng)
        assert np.all(trial >= IMAGE_BOUNDS.lower)
        assert np.all(trial <= IMAGE_BOUNDS.upper)


def test_mutate_rand1_donors_exclude_target():
    population = np.zeros((4, 5), dtype=np.int64)

    seen = []

    class RecordingRng:
        def choice(self, pool, size, replace):
            seen.append(list(pool))
            return np.array(pool[:3])

    mutate_rand1(population, 2, 0.5, IMAGE_BOUNDS, RecordingRng())
    assert 2 not in seen[0]
    assert len(seen[0]) == 3


def test_mutate_rand1_population_too_small():
    with pytest.raises(ValueError):
        mutate_rand1(np.zeros((3, 5), dtype=np.int64), 0, 0.5, IMAGE_BOUNDS,
                     np.random.default_rng(0))


def test_run_archive_size_and_monotonic_best():
    config = DeConfig(population_size=20, generations=15, rng_seed=3)
    result = run(config, IMAGE_BOUNDS, lambda p: -float((p ** 2).sum()))
    assert len(result.archive) == 20 * 15
    best = result.best_per_generation
    assert len(best) == 16
    assert all(b1 >= b0 for b0, b1 in zip(best, best[1:]))
    # member fitnesses can only improve relative to the initial best bound
    assert max(m.fitness for m in result.population) == best[-1]


def test_run_constant_fitness():
    config = DeConfig(population_size=10, generations=5, rng_seed=2)
    result = run(config, IMAGE_BOUNDS, lambda p: 7.25)
    assert all(m.fitness == 7.25 for m in result.population)
    assert len(result.archive) == 50
    assert all(m.fitness == 7.25 for m in result.archive)


def test_run_bitwise_reproducible():
    config = DeConfig(population_size=12, generations=8, rng_seed=99)
    fitness = lambda p: -float(((p - 10) ** 2).sum())
    r1 = run(config, IMAGE_BOUNDS, fitness)
    r2 = run(config, IMAGE_BOUNDS, fitness)
    assert len(r1.archive) == len(r2.archive)
    for a, b in zip(r1.archive, r2.archive):
        np.testing.assert_array_equal(a.position, b.position)
        assert a.fitness == b.fitness


def test_run_positions_respect_bounds():
    config = DeConfig(population_size=10, generations=10, rng_seed=7)
    result = run(config, IMAGE_BOUNDS, lambda p: float(p.sum()))
    for member in result.archive + result.population:
        assert np.all(member.position >= IMAGE_BOUNDS.lower)
        assert np.all(member.position <= IMAGE_BOUNDS.upper)


def test_run_converges_to_known_optimum():
    target = np.array([16, 20, 60, 200, 100])
    config = DeConfig(population_size=100, generations=60, rng_seed=0)

    def fitness(p):
        return -float(((p - target) ** 2).sum())

    result = run(config, IMAGE_BOUNDS, fitness)
    best = max(result.population, key=lambda m: m.fitness)
    assert np.abs(best.position - target).max() <= 2


def test_run_fitness_exception_carries_position():
    config = DeConfig(population_size=6, generations=2, rng_seed=1)

    def fitness(p):
        if p[2] > 10:
            raise RuntimeError("backend down")
        return 0.0

    with pytest.raises(FitnessError) as err:
        run(config, IMAGE_BOUNDS, fitness)
    assert err.value.position.shape == (5,)
    assert err.value.position[2] > 10


def test_run_nonfinite_fitness_rejected():
    config = DeConfig(population_size=6, generations=1, rng_seed=1)
    with pytest.raises(FitnessError):
        run(config, IMAGE_BOUNDS, lambda p: float("nan"))


def test_run_concurrent_map_matches_sequential():
    from concurrent.futures import ThreadPoolExecutor

    config = DeConfig(population_size=10, generations=6, rng_seed=21)
    fitness = lambda p: -float(((p - 15) ** 2).sum())
    seq = run(config, IMAGE_BOUNDS, fitness)
    with ThreadPoolExecutor(max_workers=4) as pool:
        par = run(config, IMAGE_BOUNDS, fitness, map_fn=pool.map)
    for a, b in zip(seq.archive, par.archive):
        np.testing.assert_array_equal(a.position, b.position)
        assert a.fitness == b.fitness
