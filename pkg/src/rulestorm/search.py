"""Shared plumbing for the population-based optimizers.

Both optimizers maximize a user-supplied objective over a box-bounded real
vector, keep one sequential RNG stream for full determinism, and report the
same per-iteration convergence trace.
"""

from __future__ import annotations

import csv
import time
from dataclasses import dataclass

import numpy as np

from .errors import EvaluationError
from .fitness import FitnessBreakdown

TRACE_HEADER = (
    "iteration",
    "best_G",
    "mean_G",
    "g1",
    "g2",
    "g3",
    "evaluations",
    "elapsed_ms",
)


@dataclass(frozen=True)
class Evaluation:
    """Objective value to maximize, with optional rule-score components."""

    value: float
    breakdown: FitnessBreakdown | None = None


@dataclass(frozen=True)
class Individual:
    genotype: np.ndarray
    evaluation: Evaluation
    ewma: np.ndarray | None = None


@dataclass(frozen=True)
class TraceRecord:
    iteration: int
    best_value: float
    mean_value: float
    g1: float | None
    g2: float | None
    g3: float | None
    evaluations: int
    elapsed_ms: float


@dataclass(frozen=True)
class ConvergenceTrace:
    records: tuple[TraceRecord, ...]

    def best_values(self) -> list[float]:
        return [rec.best_value for rec in self.records]

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(TRACE_HEADER)
            for rec in self.records:
                writer.writerow(
                    [
                        rec.iteration,
                        repr(rec.best_value),
                        repr(rec.mean_value),
                        "" if rec.g1 is None else repr(rec.g1),
                        "" if rec.g2 is None else repr(rec.g2),
                        "" if rec.g3 is None else repr(rec.g3),
                        rec.evaluations,
                        repr(rec.elapsed_ms),
                    ]
                )


@dataclass(frozen=True)
class RunResult:
    best: Individual
    trace: ConvergenceTrace
    population: tuple[Individual, ...]
    evaluations: int


def sample_population(rng, lower: np.ndarray, upper: np.ndarray, count: int) -> np.ndarray:
    """Uniform per-gene samples within [lower, upper], one row per member."""
    return rng.uniform(lower, upper, size=(count, lower.shape[0]))


def evaluate_objective(objective, genotype: np.ndarray, iteration: int) -> Evaluation:
    """Call the objective, wrapping any failure with iteration context."""
    try:
        return objective(genotype)
    except Exception as exc:
        raise EvaluationError(
            f"objective evaluation failed at iteration {iteration}: {exc}"
        ) from exc


class TraceBuilder:
    """Accumulates per-iteration records against a shared wall clock."""

    def __init__(self) -> None:
        self._start = time.perf_counter()
        self._records: list[TraceRecord] = []

    def record(self, iteration: int, values: np.ndarray, evaluations_list, total_evaluations: int) -> None:
        best_idx = int(np.argmax(values))
        breakdown = evaluations_list[best_idx].breakdown
        self._records.append(
            TraceRecord(
                iteration=iteration,
                best_value=float(values[best_idx]),
                mean_value=float(values.mean()),
                g1=None if breakdown is None else breakdown.g1,
                g2=None if breakdown is None else breakdown.g2,
                g3=None if breakdown is None else breakdown.g3,
                evaluations=total_evaluations,
                elapsed_ms=(time.perf_counter() - self._start) * 1000.0,
            )
        )

    def build(self) -> ConvergenceTrace:
        return ConvergenceTrace(records=tuple(self._records))
