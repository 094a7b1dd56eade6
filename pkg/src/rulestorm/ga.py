"""Generational genetic algorithm over the same genotype space.

Comparison baseline: tournament selection, uniform crossover, per-gene
gaussian mutation clamped to bounds, and single-member elitism. Shares the
trace format and determinism contract with the clustering-based optimizer.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError
from .search import (
    Individual,
    RunResult,
    TraceBuilder,
    evaluate_objective,
    sample_population,
)


@dataclass(frozen=True)
class GaParams:
    population_size: int = 50
    generations: int = 500
    tournament_size: int = 3
    crossover_prob: float = 0.9
    mutation_prob: float = 0.15
    mutation_sigma: float = 0.12
    stagnation_window: int = 50
    seed: int = 0

    def __post_init__(self) -> None:
        if self.population_size < 1:
            raise ConfigError("population_size must be >= 1")
        if self.generations < 0:
            raise ConfigError("generations must be >= 0")
        if self.tournament_size < 1:
            raise ConfigError("tournament_size must be >= 1")
        for name in ("crossover_prob", "mutation_prob"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ConfigError(f"{name} must be in [0, 1], got {value}")
        if self.mutation_sigma < 0:
            raise ConfigError("mutation_sigma must be >= 0")
        if self.stagnation_window < 1:
            raise ConfigError("stagnation_window must be >= 1")


def tournament_pick(values: np.ndarray, size: int, rng) -> int:
    """Index of the best-valued member among `size` sampled with replacement.

    Ties go to the earliest sampled contender.
    """
    contenders = np.asarray(rng.integers(len(values), size=size))
    return int(contenders[int(np.argmax(values[contenders]))])


def run_ga(params: GaParams, objective, lower, upper) -> RunResult:
    """Maximize the objective; deterministic given params (one RNG stream).

    Stops at `generations`, or once stagnation_window consecutive
    generations pass without the best value improving by more than 1e-9.
    """
    lower = np.asarray(lower, dtype=float)
    upper = np.asarray(upper, dtype=float)
    dims = lower.shape[0]
    rng = np.random.default_rng(params.seed)
    trace = TraceBuilder()

    genotypes = sample_population(rng, lower, upper, params.population_size)
    evaluations = [
        evaluate_objective(objective, genotypes[i], 0)
        for i in range(params.population_size)
    ]
    total_evaluations = params.population_size
    values = np.array([ev.value for ev in evaluations])
    trace.record(0, values, evaluations, total_evaluations)

    best_value = float(values.max())
    stagnant = 0
    for generation in range(1, params.generations + 1):
        elite = int(np.argmax(values))
        next_genotypes = np.empty_like(genotypes)
        next_evaluations = [evaluations[elite]]
        next_genotypes[0] = genotypes[elite]
        for slot in range(1, params.population_size):
            p1 = tournament_pick(values, params.tournament_size, rng)
            p2 = tournament_pick(values, params.tournament_size, rng)
            if rng.random() < params.crossover_prob:
                take_first = rng.random(dims) < 0.5
                child = np.where(take_first, genotypes[p1], genotypes[p2])
            else:
                child = genotypes[p1].copy()
            mutate = rng.random(dims) < params.mutation_prob
            steps = rng.standard_normal(dims) * params.mutation_sigma
            child = np.where(mutate, child + steps, child)
            next_genotypes[slot] = np.minimum(np.maximum(child, lower), upper)
            next_evaluations.append(
                evaluate_objective(objective, next_genotypes[slot], generation)
            )
        total_evaluations += params.population_size - 1
        genotypes = next_genotypes
        evaluations = next_evaluations
        values = np.array([ev.value for ev in evaluations])

        new_best = float(values.max())
        if new_best > best_value + 1e-9:
            stagnant = 0
        else:
            stagnant += 1
        best_value = max(best_value, new_best)
        trace.record(generation, values, evaluations, total_evaluations)
        if stagnant >= params.stagnation_window:
            break

    population = tuple(
        Individual(genotype=genotypes[i].copy(), evaluation=evaluations[i])
        for i in range(params.population_size)
    )
    best_idx = int(np.argmax(values))
    return RunResult(
        best=population[best_idx],
        trace=trace.build(),
        population=population,
        evaluations=total_evaluations,
    )
