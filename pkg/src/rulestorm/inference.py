"""Classification with a trained model and the standard binary metrics.

A record is scored by every rule (rule weight times antecedent activation);
the highest-scoring rule assigns the class. Activations use min for AND and
max for OR over the membership degrees of the non-don't-care antecedents.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

import numpy as np

from .dataset import Dataset
from .errors import ConfigError
from .membership import FuzzyPartition, degree, degree_matrix
from .rules import AND, Rule, RuleSet


@dataclass(frozen=True)
class Model:
    """Everything needed to classify: fitted partitions, weighted rules, the
    label coding, and enough metadata to reproduce training."""

    partitions: tuple[FuzzyPartition, ...]
    rules: RuleSet
    class_values: tuple[float, ...]   # original label per internal class 1..c
    attribute_names: tuple[str, ...]
    majority_class: int               # internal class predicted at zero score
    metadata: Mapping[str, object]

    def __post_init__(self) -> None:
        if len(self.partitions) != self.rules.m:
            raise ConfigError(
                f"{len(self.partitions)} partitions for {self.rules.m} attributes"
            )
        for part in self.partitions:
            if not part.degenerate and part.p != self.rules.p:
                raise ConfigError(
                    f"partition has {part.p} labels but rules use {self.rules.p}"
                )
        if len(self.class_values) != self.rules.c:
            raise ConfigError(
                f"{len(self.class_values)} class values for {self.rules.c} classes"
            )
        if len(self.attribute_names) != self.rules.m:
            raise ConfigError(
                f"{len(self.attribute_names)} names for {self.rules.m} attributes"
            )
        if not 1 <= self.majority_class <= self.rules.c:
            raise ConfigError(
                f"majority class {self.majority_class} outside 1..{self.rules.c}"
            )


def activation(rule: Rule, partitions: tuple[FuzzyPartition, ...], x: np.ndarray) -> float:
    """Combined membership degree of a record in the rule's antecedent.

    AND takes the minimum over active antecedents, OR the maximum; a rule
    with no active antecedents activates fully.
    """
    degrees = [
        degree(partitions[j], label, float(x[j]))
        for j, label in enumerate(rule.antecedents)
        if label != 0
    ]
    if not degrees:
        return 1.0
    return min(degrees) if rule.connective == AND else max(degrees)


def classify(model: Model, x: np.ndarray, sum_scores: bool = False) -> tuple[int, float]:
    """Predict one record: (internal class, winning score).

    Default: winner-take-all over rule scores, ties to the lower rule index.
    With sum_scores, per-class totals compete instead, ties to the smaller
    class index. All-zero scores fall back to the majority class at score 0.
    """
    scores = np.array(
        [
            rule.weight * activation(rule, model.partitions, x)
            for rule in model.rules.rules
        ]
    )
    if not np.any(scores > 0.0):
        return model.majority_class, 0.0
    if sum_scores:
        class_totals = np.zeros(model.rules.c)
        for rule, score in zip(model.rules.rules, scores):
            class_totals[rule.consequent - 1] += score
        winner = int(np.argmax(class_totals))
        return winner + 1, float(class_totals[winner])
    winner = int(np.argmax(scores))
    return model.rules.rules[winner].consequent, float(scores[winner])


def predict_dataset(model: Model, ds: Dataset, sum_scores: bool = False) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized classify over all records: (classes, scores)."""
    if ds.m != model.rules.m:
        raise ConfigError(
            f"dataset has {ds.m} attributes but the model expects {model.rules.m}"
        )
    per_attribute = [
        degree_matrix(model.partitions[j], ds.x[:, j]) for j in range(ds.m)
    ]
    rule_scores = np.empty((model.rules.r, ds.n))
    for i, rule in enumerate(model.rules.rules):
        columns = [
            per_attribute[j][:, label - 1]
            for j, label in enumerate(rule.antecedents)
            if label != 0
        ]
        if not columns:
            act = np.ones(ds.n)
        else:
            stacked = np.stack(columns, axis=1)
            act = stacked.min(axis=1) if rule.connective == AND else stacked.max(axis=1)
        rule_scores[i] = rule.weight * act
    if sum_scores:
        class_scores = np.zeros((model.rules.c, ds.n))
        for i, rule in enumerate(model.rules.rules):
            class_scores[rule.consequent - 1] += rule_scores[i]
        preds = np.argmax(class_scores, axis=0) + 1
        scores = class_scores.max(axis=0)
    else:
        winners = np.argmax(rule_scores, axis=0)
        consequents = np.array([rule.consequent for rule in model.rules.rules])
        preds = consequents[winners]
        scores = rule_scores[winners, np.arange(ds.n)]
    dead = ~np.any(rule_scores > 0.0, axis=0)
    preds = np.where(dead, model.majority_class, preds)
    scores = np.where(dead, 0.0, scores)
    return preds.astype(int), scores


@dataclass(frozen=True)
class ConfusionCounts:
    tp: int
    fp: int
    tn: int
    fn: int

    def __post_init__(self) -> None:
        if min(self.tp, self.fp, self.tn, self.fn) < 0:
            raise ConfigError("confusion counts must be non-negative")

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.tn + self.fn


def sensitivity(counts: ConfusionCounts) -> float | None:
    """True-positive rate; None when there are no actual positives."""
    denom = counts.tp + counts.fn
    return None if denom == 0 else counts.tp / denom


def specificity(counts: ConfusionCounts) -> float | None:
    """True-negative rate; None when there are no actual negatives."""
    denom = counts.tn + counts.fp
    return None if denom == 0 else counts.tn / denom


def accuracy_from_counts(counts: ConfusionCounts) -> float:
    return (counts.tp + counts.tn) / counts.total


@dataclass(frozen=True)
class EvaluationReport:
    counts: ConfusionCounts | None   # None for non-binary models
    sensitivity: float | None
    specificity: float | None
    accuracy: float
    n: int


def _original_labels(values: tuple[float, ...], internal: np.ndarray) -> np.ndarray:
    return np.asarray(values, dtype=float)[internal - 1]


def binary_counts(model: Model, ds: Dataset, positive_value: float | None = None, sum_scores: bool = False) -> ConfusionCounts:
    """Confusion counts in the original label coding.

    The positive class defaults to the largest original label the model was
    trained on. Requires a binary model.
    """
    if model.rules.c != 2:
        raise ConfigError(
            f"sensitivity/specificity need a binary model, got {model.rules.c} classes"
        )
    if positive_value is None:
        positive_value = max(model.class_values)
    preds, _ = predict_dataset(model, ds, sum_scores=sum_scores)
    pred_orig = _original_labels(model.class_values, preds)
    true_orig = _original_labels(ds.class_values, ds.y)
    pred_pos = pred_orig == positive_value
    true_pos = true_orig == positive_value
    return ConfusionCounts(
        tp=int(np.sum(pred_pos & true_pos)),
        fp=int(np.sum(pred_pos & ~true_pos)),
        tn=int(np.sum(~pred_pos & ~true_pos)),
        fn=int(np.sum(~pred_pos & true_pos)),
    )


def evaluate_model(model: Model, ds: Dataset, positive_value: float | None = None, sum_scores: bool = False) -> EvaluationReport:
    """Accuracy for any class count; confusion-based metrics when binary.

    Predictions and true labels are compared in the original label coding,
    so a model evaluates correctly on any split regardless of which classes
    the split happens to contain.
    """
    preds, _ = predict_dataset(model, ds, sum_scores=sum_scores)
    pred_orig = _original_labels(model.class_values, preds)
    true_orig = _original_labels(ds.class_values, ds.y)
    acc = float(np.mean(pred_orig == true_orig))
    if model.rules.c != 2:
        return EvaluationReport(
            counts=None, sensitivity=None, specificity=None, accuracy=acc, n=ds.n
        )
    counts = binary_counts(model, ds, positive_value, sum_scores=sum_scores)
    return EvaluationReport(
        counts=counts,
        sensitivity=sensitivity(counts),
        specificity=specificity(counts),
        accuracy=acc,
        n=ds.n,
    )
