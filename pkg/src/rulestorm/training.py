"""End-to-end model training: fit partitions, search rule space, weight rules.

The search maximizes a blend of the rule-set quality score and the training
accuracy of the weighted rule set:

    objective = (1 - accuracy_weight) * G + accuracy_weight * train_accuracy

The quality score G alone never looks at whether a rule's class agrees with
the records it matches, so consequents would be left to chance; blending in
training accuracy makes the search produce a working classifier while
accuracy_weight = 0 recovers the pure quality-score objective.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass

import numpy as np

from . import bso, ga
from .dataset import Dataset, attribute_stats, majority_class
from .errors import ConfigError
from .fitness import FitnessBreakdown, FitnessWeights, balance_score
from .inference import Model
from .membership import (
    FuzzyPartition,
    LabeledDataset,
    build_partition,
    degree_matrix,
    fuzzify_dataset,
)
from .rules import RuleSetShape, decode, genotype_bounds, match_mask, with_weights
from .search import Evaluation, RunResult

OPTIMIZERS = ("bso-ewma", "bso-plain", "ga")

WEIGHT_DECIMALS = 4


class RuleObjective:
    """Callable objective over genotypes for one fuzzified training split.

    Precomputes each attribute's membership-degree matrix so that scoring a
    candidate costs a handful of vector operations per rule.
    """

    def __init__(
        self,
        ld: LabeledDataset,
        shape: RuleSetShape,
        weights: FitnessWeights,
        accuracy_weight: float,
        partitions: tuple[FuzzyPartition, ...],
        x: np.ndarray,
        majority: int,
        sum_scores: bool = False,
    ) -> None:
        if not 0.0 <= accuracy_weight <= 1.0:
            raise ConfigError(
                f"accuracy_weight must be in [0, 1], got {accuracy_weight}"
            )
        self.ld = ld
        self.shape = shape
        self.weights = weights
        self.accuracy_weight = accuracy_weight
        self.majority = majority
        self.sum_scores = sum_scores
        # degrees[j][i, k] = membership of record i in label k+1 of attribute j
        self.degrees = [degree_matrix(partitions[j], x[:, j]) for j in range(shape.m)]

    def _train_accuracy(self, rule_set, match_fractions) -> float:
        n = self.ld.n
        scores = np.empty((rule_set.r, n))
        for i, rule in enumerate(rule_set.rules):
            weight = 0.5 * (
                (1.0 - rule.antecedent_count() / rule_set.m) + match_fractions[i]
            )
            columns = [
                self.degrees[j][:, label - 1]
                for j, label in enumerate(rule.antecedents)
                if label != 0
            ]
            if not columns:
                act = np.ones(n)
            else:
                stacked = np.stack(columns, axis=1)
                act = (
                    stacked.min(axis=1)
                    if rule.connective == "AND"
                    else stacked.max(axis=1)
                )
            scores[i] = weight * act
        if self.sum_scores:
            class_scores = np.zeros((rule_set.c, n))
            for i, rule in enumerate(rule_set.rules):
                class_scores[rule.consequent - 1] += scores[i]
            preds = np.argmax(class_scores, axis=0) + 1
        else:
            consequents = np.array([rule.consequent for rule in rule_set.rules])
            preds = consequents[np.argmax(scores, axis=0)]
        dead = ~np.any(scores > 0.0, axis=0)
        preds = np.where(dead, self.majority, preds)
        return float(np.mean(preds == self.ld.classes))

    def __call__(self, genotype: np.ndarray) -> Evaluation:
        rule_set = decode(genotype, self.shape)
        masks = [match_mask(rule, self.ld) for rule in rule_set.rules]
        match_fractions = [float(mask.sum()) / self.ld.n for mask in masks]
        total_len = sum(rule.antecedent_count() for rule in rule_set.rules)
        g1 = 1.0 - total_len / (rule_set.r * rule_set.m)
        g2 = sum(match_fractions) / rule_set.r
        g3 = balance_score(rule_set)
        quality = (
            self.weights.alpha * g1 + self.weights.beta * g2 + self.weights.gamma * g3
        )
        breakdown = FitnessBreakdown(g1=g1, g2=g2, g3=g3, fitness=quality)
        if self.accuracy_weight == 0.0:
            return Evaluation(value=quality, breakdown=breakdown)
        acc = self._train_accuracy(rule_set, match_fractions)
        value = (1.0 - self.accuracy_weight) * quality + self.accuracy_weight * acc
        return Evaluation(value=value, breakdown=breakdown)


@dataclass(frozen=True)
class TrainingResult:
    model: Model
    run: RunResult
    breakdown: FitnessBreakdown  # quality components of the winning rule set
    train_accuracy: float


def params_digest(payload: dict) -> str:
    """Short stable digest of a parameter mapping, for model metadata."""
    canon = json.dumps(payload, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode()).hexdigest()[:16]


def train_model(
    train: Dataset,
    *,
    labels_per_attribute: int = 3,
    rule_count: int = 10,
    fitness_weights: FitnessWeights | None = None,
    accuracy_weight: float = 1.0,
    optimizer: str = "bso-ewma",
    bso_params: bso.BsoParams | None = None,
    ga_params: ga.GaParams | None = None,
    sum_scores: bool = False,
) -> TrainingResult:
    """Fit partitions on the training split, search for rules, weight them.

    Deterministic given the optimizer parameters (which carry the seed).
    """
    if optimizer not in OPTIMIZERS:
        raise ConfigError(f"optimizer must be one of {OPTIMIZERS}, got {optimizer!r}")
    weights = fitness_weights if fitness_weights is not None else FitnessWeights()
    partitions = tuple(
        build_partition(stats, labels_per_attribute)
        for stats in attribute_stats(train)
    )
    ld = fuzzify_dataset(train, partitions)
    shape = RuleSetShape(
        m=train.m, p=labels_per_attribute, c=train.c, r=rule_count
    )
    lower, upper = genotype_bounds(shape)
    majority = majority_class(train)
    objective = RuleObjective(
        ld=ld,
        shape=shape,
        weights=weights,
        accuracy_weight=accuracy_weight,
        partitions=partitions,
        x=train.x,
        majority=majority,
        sum_scores=sum_scores,
    )

    if optimizer == "ga":
        params = ga_params if ga_params is not None else ga.GaParams()
        run_result = ga.run_ga(params, objective, lower, upper)
        seed = params.seed
        param_payload = {"ga": params.__dict__}
    else:
        params = bso_params if bso_params is not None else bso.BsoParams()
        mode = "plain" if optimizer == "bso-plain" else "ewma"
        if params.mode != mode:
            params = bso.BsoParams(**{**params.__dict__, "mode": mode})
        run_result = bso.run(params, objective, lower, upper)
        seed = params.seed
        param_payload = {"bso": params.__dict__}

    best_rules = decode(run_result.best.genotype, shape)
    weighted = with_weights(best_rules, ld, decimals=WEIGHT_DECIMALS)
    breakdown = run_result.best.evaluation.breakdown
    match_fractions = [
        float(match_mask(rule, ld).sum()) / ld.n for rule in best_rules.rules
    ]
    train_acc = objective._train_accuracy(best_rules, match_fractions)

    metadata = {
        "optimizer": optimizer,
        "seed": seed,
        "labels_per_attribute": labels_per_attribute,
        "rule_count": rule_count,
        "fitness_weights": [weights.alpha, weights.beta, weights.gamma],
        "accuracy_weight": accuracy_weight,
        "sum_scores": sum_scores,
        "train_records": train.n,
        "params_digest": params_digest(
            {
                **param_payload,
                "labels_per_attribute": labels_per_attribute,
                "rule_count": rule_count,
                "accuracy_weight": accuracy_weight,
                "fitness_weights": [weights.alpha, weights.beta, weights.gamma],
                "sum_scores": sum_scores,
            }
        ),
    }
    model = Model(
        partitions=partitions,
        rules=weighted,
        class_values=train.class_values,
        attribute_names=train.attribute_names,
        majority_class=majority,
        metadata=metadata,
    )
    return TrainingResult(
        model=model,
        run=run_result,
        breakdown=breakdown,
        train_accuracy=train_acc,
    )
