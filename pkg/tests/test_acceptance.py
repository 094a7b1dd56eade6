"""End-to-end acceptance checks.

Each test covers one shipping gate and prints a single PASS/FAIL line with
the measured numbers (visible with ``pytest -rA`` or ``-s``). Tolerances are
stated inline; the reference corpus is the bundled diabetes table.
"""

import csv
import json
import time

import numpy as np
from conftest import REPO_ROOT

from rulestorm.bso import BsoParams, run
from rulestorm.cli import main
from rulestorm.dataset import SplitSpec, attribute_stats, load_csv, split
from rulestorm.experiments import (
    BENCHMARK_HEADER,
    ExperimentSettings,
    run_sweep,
)
from rulestorm.fitness import FitnessWeights, balance_score, brevity_score, evaluate, match_count
from rulestorm.ga import GaParams, run_ga
from rulestorm.inference import ConfusionCounts, evaluate_model, sensitivity
from rulestorm.membership import LabeledDataset, build_partition, degree
from rulestorm.rules import AND, OR, Rule, RuleSet
from rulestorm.search import Evaluation
from rulestorm.training import OPTIMIZERS, train_model

PID = REPO_ROOT / "data" / "pima.csv"


def verdict(label: str, ok: bool, detail: str) -> None:
    print(f"{label}: {'PASS' if ok else 'FAIL'} ({detail})")
    assert ok, f"{label}: {detail}"


def test_01_reference_accuracy_band():
    """Defaults, 5 seeds, 80% stratified split: mean held-out accuracy must
    reach 0.70 and beat the 0.651 majority-class rate, within 5 minutes."""
    ds = load_csv(PID)
    started = time.perf_counter()
    accuracies = []
    for seed in range(5):
        train, test = split(ds, SplitSpec(fraction=0.8, seed=seed))
        result = train_model(train, bso_params=BsoParams(seed=seed))
        accuracies.append(evaluate_model(result.model, test).accuracy)
    elapsed = time.perf_counter() - started
    mean = float(np.mean(accuracies))
    ok = mean >= 0.70 and mean > 0.651 and elapsed < 300.0
    verdict(
        "reference accuracy band",
        ok,
        f"mean test accuracy {mean:.4f} over 5 seeds "
        f"[per-seed {', '.join(f'{a:.4f}' for a in accuracies)}], "
        f"floor 0.70, majority baseline 0.651, "
        f"external reference value 0.8700 for the same split ratio, "
        f"{elapsed:.0f}s (limit 300s)",
    )


def _oracle_quality(rs: RuleSet, rows, raw_weights):
    """Brute-force recomputation of the quality score, all in plain Python.

    ``raw_weights`` are the un-normalized component weights; the oracle does
    its own normalization so that step is checked too.
    """
    r, m, c, n = rs.r, rs.m, rs.c, len(rows)
    active_total = sum(
        1 for rule in rs.rules for a in rule.antecedents if a != 0
    )
    g1 = 1.0 - active_total / (r * m)

    per_rule = []
    for rule in rs.rules:
        count = 0
        for row in rows:
            active = [(j, a) for j, a in enumerate(rule.antecedents) if a != 0]
            if not active:
                hit = True
            elif rule.connective == AND:
                hit = all(row[j] == a for j, a in active)
            else:
                hit = any(row[j] == a for j, a in active)
            count += int(hit)
        per_rule.append(count)
    g2 = sum(per_rule) / (r * n)

    class_counts = [
        sum(1 for rule in rs.rules if rule.consequent == j) for j in range(1, c + 1)
    ]
    variance = sum((count - r / c) ** 2 for count in class_counts) / c
    g3 = max(0.0, 1.0 - variance / r)

    alpha, beta, gamma = raw_weights
    score = (alpha * g1 + beta * g2 + gamma * g3) / (alpha + beta + gamma)
    return g1, g2, g3, score, per_rule


def test_02_quality_score_matches_bruteforce_oracle():
    """100 random small instances: component scores match an independent
    brute-force recomputation exactly on counts and within 1e-12 on reals."""
    rng = np.random.default_rng(20260814)
    p, c = 2, 2
    worst = 0.0
    for _ in range(100):
        n = int(rng.integers(2, 21))
        m = int(rng.integers(1, 5))
        r = int(rng.integers(2, 4))
        labels = rng.integers(1, p + 1, size=(n, m))
        classes = rng.integers(1, c + 1, size=n)
        ld = LabeledDataset(labels=labels, classes=classes, p=p, c=c)
        rules = tuple(
            Rule(
                antecedents=tuple(int(a) for a in rng.integers(0, p + 1, size=m)),
                consequent=int(rng.integers(1, c + 1)),
                connective=AND if rng.random() < 0.5 else OR,
            )
            for _ in range(r)
        )
        rs = RuleSet(rules=rules, m=m, p=p, c=c)
        raw = tuple(float(rng.uniform(0.1, 2.0)) for _ in range(3))
        got = evaluate(rs, ld, FitnessWeights(*raw))
        rows = [tuple(int(v) for v in labels[i]) for i in range(n)]
        g1, g2, g3, score, per_rule = _oracle_quality(rs, rows, raw)
        for idx, rule in enumerate(rs.rules):
            assert match_count(rule, ld) == per_rule[idx]
        worst = max(
            worst,
            abs(got.g1 - g1),
            abs(got.g2 - g2),
            abs(got.g3 - g3),
            abs(got.fitness - score),
        )
    ok = worst <= 1e-12
    verdict(
        "quality score vs brute force",
        ok,
        f"largest component deviation {worst:.2e} over 100 instances "
        f"(tolerance 1e-12, match counts exact)",
    )


def test_03_partition_of_unity_on_reference_data():
    """Across all reference attributes and 1000 sampled points each, fuzzy
    degrees must sum to 1 within 1e-9."""
    ds = load_csv(PID)
    worst = 0.0
    for stats in attribute_stats(ds):
        partition = build_partition(stats, 3)
        for x in np.linspace(stats.minimum, stats.maximum, 1000):
            total = sum(degree(partition, k, float(x)) for k in (1, 2, 3))
            worst = max(worst, abs(total - 1.0))
    ok = worst <= 1e-9
    verdict(
        "partition of unity",
        ok,
        f"largest |sum - 1| = {worst:.2e} over 8 attributes x 1000 points "
        f"(tolerance 1e-9)",
    )


def test_04_optimizers_reach_sphere_optimum():
    """All three search backends must land within 1e-2 of the optimum of a
    5-dimensional sphere (median over 5 seeds, 30 candidates, 200 rounds)."""

    def sphere(x):
        return Evaluation(-float(np.sum(np.asarray(x) ** 2)))

    lower, upper = np.full(5, -5.0), np.full(5, 5.0)
    medians = {}
    for mode in ("plain", "ewma"):
        finals = []
        for seed in range(5):
            params = BsoParams(
                population_size=30, max_iterations=200, mode=mode, seed=seed
            )
            finals.append(-run(params, sphere, lower, upper).best.evaluation.value)
        medians[f"bso-{mode}"] = float(np.median(finals))
    finals = []
    for seed in range(5):
        params = GaParams(population_size=30, generations=200, seed=seed)
        finals.append(-run_ga(params, sphere, lower, upper).best.evaluation.value)
    medians["ga"] = float(np.median(finals))

    ok = all(v <= 1e-2 for v in medians.values())
    detail = ", ".join(f"{name} {value:.2e}" for name, value in medians.items())
    verdict("sphere optimum", ok, f"median distance to optimum: {detail} (tolerance 1e-2)")


def test_05_sweep_traces_are_monotone():
    """Every training run recorded by a sweep must have a non-decreasing
    best-value trace."""
    ds = load_csv(PID)
    settings = ExperimentSettings(
        bso_params=BsoParams(
            population_size=20, max_iterations=40, stagnation_window=40
        ),
        ga_params=GaParams(population_size=20, generations=40),
    )
    result = run_sweep(
        ds, settings, ratios=(0.7, 0.8), seeds=(0, 1), optimizers=OPTIMIZERS
    )
    assert all(r.error is None for r in result.runs)
    violations = 0
    for run_record in result.runs:
        values = run_record.best_values
        if any(b < a for a, b in zip(values, values[1:])):
            violations += 1
    ok = violations == 0 and len(result.runs) == 12
    verdict(
        "monotone best-value traces",
        ok,
        f"{len(result.runs)} sweep runs checked, {violations} violations",
    )


def test_06_averaged_mode_identity():
    """With full averaging weight and zeroed noise, the averaged mode must
    replay the plain mode gene for gene under the same seed."""

    def sphere(x):
        return Evaluation(-float(np.sum(np.asarray(x) ** 2)))

    lower, upper = np.full(6, -3.0), np.full(6, 3.0)
    shared = dict(
        population_size=16,
        cluster_count=3,
        max_iterations=25,
        stagnation_window=25,
        smoothing=1.0,
        noise_scale=0.0,
        noise_sigma=0.0,
        seed=5,
    )
    averaged = run(BsoParams(mode="ewma", **shared), sphere, lower, upper)
    plain = run(BsoParams(mode="plain", **shared), sphere, lower, upper)

    gene_match = all(
        np.array_equal(a.genotype, b.genotype)
        for a, b in zip(averaged.population, plain.population)
    )
    trace_match = len(averaged.trace.records) == len(plain.trace.records) and all(
        a.iteration == b.iteration
        and a.best_value == b.best_value
        and a.mean_value == b.mean_value
        and a.evaluations == b.evaluations
        for a, b in zip(averaged.trace.records, plain.trace.records)
    )
    ok = gene_match and trace_match
    verdict(
        "averaged-mode identity",
        ok,
        f"populations identical: {gene_match}, traces identical: {trace_match} "
        f"({len(plain.trace.records)} records)",
    )


def test_07_train_command_is_deterministic(tmp_path):
    """Two train invocations with the same config and seed must write a
    byte-identical model and an identical trace up to the wall-clock column."""
    config_path = tmp_path / "config.json"
    config_path.write_text(
        json.dumps(
            {
                "bso": {
                    "population_size": 12,
                    "cluster_count": 3,
                    "max_iterations": 12,
                    "stagnation_window": 20,
                }
            }
        )
    )
    outs = []
    for name in ("first", "second"):
        out = tmp_path / name
        code = main(
            [
                "train",
                "--data",
                str(PID),
                "--config",
                str(config_path),
                "--out",
                str(out),
                "--seed",
                "3",
            ]
        )
        assert code == 0
        outs.append(out)

    model_match = (outs[0] / "model.json").read_bytes() == (
        outs[1] / "model.json"
    ).read_bytes()

    def stable_rows(path):
        with open(path, newline="") as handle:
            rows = list(csv.reader(handle))
        drop = rows[0].index("elapsed_ms")
        return [row[:drop] + row[drop + 1 :] for row in rows]

    trace_match = stable_rows(outs[0] / "trace.csv") == stable_rows(
        outs[1] / "trace.csv"
    )
    ok = model_match and trace_match
    verdict(
        "train determinism",
        ok,
        f"model bytes identical: {model_match}, trace identical excluding "
        f"wall clock: {trace_match}",
    )


def test_08_component_fixtures():
    """Pinned component values: brevity on a fixed six-rule table, balance on
    a 1-vs-5 class split, and the true-positive rate at counts (50, 10)."""
    lengths = (4, 6, 4, 4, 6, 5)
    rules = tuple(
        Rule(
            antecedents=tuple(1 if j < count else 0 for j in range(6)),
            consequent=1 if idx == 0 else 2,
            connective=AND,
        )
        for idx, count in enumerate(lengths)
    )
    rs = RuleSet(rules=rules, m=6, p=3, c=2)
    brevity = brevity_score(rs)
    balance = balance_score(rs)
    rate = sensitivity(ConfusionCounts(tp=50, fp=0, tn=0, fn=10))

    brevity_ok = abs(brevity - (1.0 - 29.0 / 36.0)) <= 1e-12
    balance_ok = abs(balance - (1.0 - 4.0 / 6.0)) <= 1e-12
    rate_ok = round(rate, 4) == 0.8333
    ok = brevity_ok and balance_ok and rate_ok
    verdict(
        "component fixtures",
        ok,
        f"brevity {brevity:.12f} vs 1-29/36, balance {balance:.12f} vs 1-4/6, "
        f"true-positive rate {rate:.4f} vs 0.8333",
    )


def test_09_benchmark_artifact(tmp_path):
    """The benchmark command must emit a well-formed comparison CSV covering
    all three backends; timing numbers are reported, not gated."""
    config_path = tmp_path / "config.json"
    config_path.write_text(
        json.dumps(
            {
                "bso": {
                    "population_size": 16,
                    "cluster_count": 3,
                    "max_iterations": 30,
                    "stagnation_window": 30,
                },
                "ga": {"population_size": 16, "generations": 30},
            }
        )
    )
    out = tmp_path / "bench"
    code = main(
        [
            "benchmark",
            "--data",
            str(PID),
            "--config",
            str(config_path),
            "--ratios",
            "0.25,0.5",
            "--threshold",
            "0.7",
            "--out",
            str(out),
        ]
    )
    assert code == 0
    with open(out / "benchmark.csv", newline="") as handle:
        rows = list(csv.reader(handle))
    header, body = rows[0], rows[1:]
    optimizer_column = header.index("optimizer")
    reached_column = header.index("reached")
    iteration_column = header.index("iterations_to_threshold")
    covered = {row[optimizer_column] for row in body}
    well_formed = (
        header == list(BENCHMARK_HEADER)
        and len(body) == 6
        and covered == set(OPTIMIZERS)
        and all(
            row[iteration_column] == "DNF"
            or row[iteration_column].isdigit()
            for row in body
        )
    )
    measured = "; ".join(
        f"{row[optimizer_column]}@{row[header.index('fraction')]}: "
        + (
            f"iteration {row[iteration_column]}"
            if row[reached_column] == "true"
            else "DNF"
        )
        for row in body
    )
    verdict(
        "benchmark artifact",
        well_formed,
        f"6 rows over 2 fractions x 3 backends; measured convergence: {measured}",
    )
