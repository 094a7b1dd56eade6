"""Fuzzy classification rules and their real-vector genotype encoding.

A genotype concatenates r blocks of m + 2 genes: m antecedent genes, one
class gene, one connective gene. Decoding rounds and clamps, then repairs the
result so no rule is empty and every class keeps at least one rule.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .errors import ConfigError
from .membership import LabeledDataset

AND = "AND"
OR = "OR"


@dataclass(frozen=True)
class Rule:
    antecedents: tuple[int, ...]  # 0 means dont-care, else a label in 1..p
    consequent: int               # class in 1..c
    connective: str               # AND or OR
    weight: float = 0.0

    def antecedent_count(self) -> int:
        return sum(1 for a in self.antecedents if a != 0)


@dataclass(frozen=True)
class RuleSet:
    rules: tuple[Rule, ...]
    m: int
    p: int
    c: int

    @property
    def r(self) -> int:
        return len(self.rules)


@dataclass(frozen=True)
class RuleSetShape:
    """Dimensions of a rule-set genotype: r rules over m attributes with p
    fuzzy labels and c classes. Needs r >= c so repair can cover every class."""

    m: int
    p: int
    c: int
    r: int

    def __post_init__(self) -> None:
        if self.m < 1 or self.p < 2 or self.c < 2:
            raise ConfigError(
                f"need m >= 1, p >= 2, c >= 2, got m={self.m} p={self.p} c={self.c}"
            )
        if self.r < self.c:
            raise ConfigError(
                f"need at least one rule per class: r={self.r} < c={self.c}"
            )

    @property
    def genotype_length(self) -> int:
        return self.r * (self.m + 2)


def genotype_bounds(shape: RuleSetShape) -> tuple[np.ndarray, np.ndarray]:
    """Per-gene sampling bounds.

    Antecedent genes round into 0..p, class genes into 1..c, and the
    connective gene stays in [0, 1] around its 0.5 threshold.
    """
    lower = np.empty(shape.genotype_length)
    upper = np.empty(shape.genotype_length)
    w = shape.m + 2
    for i in range(shape.r):
        lower[i * w : i * w + shape.m] = -0.49
        upper[i * w : i * w + shape.m] = shape.p + 0.49
        lower[i * w + shape.m] = 0.51
        upper[i * w + shape.m] = shape.c + 0.49
        lower[i * w + shape.m + 1] = 0.0
        upper[i * w + shape.m + 1] = 1.0
    return lower, upper


def decode(genes: np.ndarray, shape: RuleSetShape) -> RuleSet:
    """Round genes to a repaired rule set. Total on any real vector."""
    genes = np.asarray(genes, dtype=float)
    if genes.shape != (shape.genotype_length,):
        raise ConfigError(
            f"genotype length {genes.shape} does not match {shape.genotype_length}"
        )
    block = genes.reshape(shape.r, shape.m + 2)
    ants = np.clip(np.rint(block[:, : shape.m]), 0, shape.p).astype(int)
    consequents = np.clip(np.rint(block[:, shape.m]), 1, shape.c).astype(int)
    connectives = [AND if g < 0.5 else OR for g in block[:, shape.m + 1]]

    # repair 1: an all-dont-care rule gets one antecedent switched on, at an
    # attribute chosen by rule position so identical rules repair differently
    for i in range(shape.r):
        if not ants[i].any():
            ants[i, i % shape.m] = 1

    # repair 2: every class keeps at least one rule
    counts = np.bincount(consequents, minlength=shape.c + 1)[1:]
    for missing in range(1, shape.c + 1):
        if counts[missing - 1] > 0:
            continue
        donor_class = int(np.argmax(counts)) + 1
        donor_rule = int(np.flatnonzero(consequents == donor_class)[0])
        consequents[donor_rule] = missing
        counts[donor_class - 1] -= 1
        counts[missing - 1] += 1

    rules = tuple(
        Rule(tuple(int(a) for a in ants[i]), int(consequents[i]), connectives[i])
        for i in range(shape.r)
    )
    return RuleSet(rules=rules, m=shape.m, p=shape.p, c=shape.c)


def encode(rs: RuleSet) -> np.ndarray:
    """Inverse of decode on repaired rule sets. AND -> 0.0, OR -> 1.0."""
    genes = np.empty(rs.r * (rs.m + 2))
    w = rs.m + 2
    for i, rule in enumerate(rs.rules):
        genes[i * w : i * w + rs.m] = rule.antecedents
        genes[i * w + rs.m] = rule.consequent
        genes[i * w + rs.m + 1] = 0.0 if rule.connective == AND else 1.0
    return genes


def match_mask(rule: Rule, ld: LabeledDataset) -> np.ndarray:
    """Boolean mask of records whose fuzzified labels satisfy the rule.

    AND needs every non-zero antecedent to equal the record's label; OR needs
    at least one. The class consequent plays no part. A rule with no active
    antecedents matches everything.
    """
    ants = np.asarray(rule.antecedents)
    active = ants != 0
    if not active.any():
        return np.ones(ld.n, dtype=bool)
    hits = ld.labels[:, active] == ants[active]
    return hits.all(axis=1) if rule.connective == AND else hits.any(axis=1)


def rule_weight(rule: Rule, ld: LabeledDataset) -> float:
    """Mean of the rule's brevity and coverage terms, in [0, 1]."""
    brevity = 1.0 - rule.antecedent_count() / len(rule.antecedents)
    coverage = float(match_mask(rule, ld).sum()) / ld.n
    return 0.5 * (brevity + coverage)


def with_weights(rs: RuleSet, ld: LabeledDataset, decimals: int | None = None) -> RuleSet:
    """Copy of the rule set with data-derived weights on every rule."""
    weighted = []
    for rule in rs.rules:
        w = rule_weight(rule, ld)
        if decimals is not None:
            w = round(w, decimals)
        weighted.append(replace(rule, weight=w))
    return RuleSet(rules=tuple(weighted), m=rs.m, p=rs.p, c=rs.c)
