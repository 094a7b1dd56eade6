"""Composite quality score for a fuzzy rule set.

Three components, each in [0, 1] and larger-is-better:

* brevity    - rules use few antecedents,
* coverage   - rules match many training records (class played no part),
* balance    - rules are spread evenly across the classes.

The composite is a convex combination of the three under normalized weights.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError
from .membership import LabeledDataset
from .rules import Rule, RuleSet, match_mask


@dataclass(frozen=True)
class FitnessWeights:
    """Relative importance of brevity, coverage, and balance.

    Values are normalized to sum to one; they must be non-negative and not
    all zero.
    """

    alpha: float = 1.0
    beta: float = 1.0
    gamma: float = 1.0

    def __post_init__(self) -> None:
        if self.alpha < 0 or self.beta < 0 or self.gamma < 0:
            raise ConfigError("fitness weights must be non-negative")
        total = self.alpha + self.beta + self.gamma
        if total <= 0:
            raise ConfigError("fitness weights must not all be zero")
        object.__setattr__(self, "alpha", self.alpha / total)
        object.__setattr__(self, "beta", self.beta / total)
        object.__setattr__(self, "gamma", self.gamma / total)


@dataclass(frozen=True)
class FitnessBreakdown:
    g1: float
    g2: float
    g3: float
    fitness: float


def match_count(rule: Rule, ld: LabeledDataset) -> int:
    """Number of records whose fuzzified labels satisfy the rule."""
    return int(match_mask(rule, ld).sum())


def brevity_score(rs: RuleSet) -> float:
    """1 minus the mean fraction of active antecedents per rule."""
    total = sum(rule.antecedent_count() for rule in rs.rules)
    return 1.0 - total / (rs.r * rs.m)


def coverage_score(rs: RuleSet, ld: LabeledDataset) -> float:
    """Mean fraction of records matched, averaged over rules."""
    total = sum(match_count(rule, ld) for rule in rs.rules)
    return total / (rs.r * ld.n)


def balance_score(rs: RuleSet) -> float:
    """1 minus the per-rule variance of class representation, floored at 0.

    The penalty is the mean squared deviation of per-class rule counts from
    the even share r/c, scaled by 1/r.
    """
    counts = np.zeros(rs.c)
    for rule in rs.rules:
        counts[rule.consequent - 1] += 1
    even = rs.r / rs.c
    v = float(np.mean((counts - even) ** 2))
    return max(0.0, 1.0 - v / rs.r)


def evaluate(rs: RuleSet, ld: LabeledDataset, weights: FitnessWeights | None = None) -> FitnessBreakdown:
    """Score a rule set against a fuzzified dataset."""
    w = weights if weights is not None else FitnessWeights()
    g1 = brevity_score(rs)
    g2 = coverage_score(rs, ld)
    g3 = balance_score(rs)
    return FitnessBreakdown(
        g1=g1,
        g2=g2,
        g3=g3,
        fitness=w.alpha * g1 + w.beta * g2 + w.gamma * g3,
    )
