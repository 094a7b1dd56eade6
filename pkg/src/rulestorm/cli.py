"""Command-line front end.

Verbs: train, evaluate, sweep, param-sweep, benchmark. Options come from an
optional JSON config file plus command-line flags; a flag given on the command
line always wins over the file. Every run is reproducible: the config plus
seed determine all emitted artifacts except wall-clock columns.

Exit codes: 0 success, 2 configuration error, 3 data error, 4 runtime failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import fields
from pathlib import Path

from .bso import BsoParams
from .dataset import Dataset, SplitSpec, load_csv, split
from .errors import ConfigError, DataError
from .experiments import (
    ExperimentSettings,
    run_benchmark,
    run_param_sweep,
    run_sweep,
    summarize_sweep,
    write_benchmark_csv,
    write_param_sweep_csv,
    write_sweep_csv,
)
from .fitness import FitnessWeights
from .ga import GaParams
from .inference import evaluate_model, predict_dataset
from .model_io import load_model, save_model
from .training import OPTIMIZERS, train_model

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DATA = 3
EXIT_RUNTIME = 4

# Recognized top-level config-file keys (everything else is a schema error).
CONFIG_KEYS = {
    "data",
    "label",
    "out",
    "seed",
    "optimizer",
    "labels_per_attribute",
    "rule_count",
    "fitness_weights",
    "accuracy_weight",
    "sum_scores",
    "split_fraction",
    "bso",
    "ga",
    "ratios",
    "seeds",
    "e_values",
    "k_values",
    "threshold",
    "workers",
}

DEFAULT_RATIOS = (0.7, 0.75, 0.8, 0.85)
DEFAULT_SEEDS = (0, 1, 2, 3, 4)
DEFAULT_FRACTIONS = (0.25, 0.5, 1.0)
DEFAULT_E_VALUES = (0.2, 0.4, 0.6, 0.8, 1.0)
DEFAULT_K_VALUES = (5.0, 10.0, 20.0, 40.0)


def _float_list(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(part) for part in text.split(",") if part != "")
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers: {exc}")


def _int_list(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(part) for part in text.split(",") if part != "")
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers: {exc}")


def _name_list(text: str) -> tuple[str, ...]:
    return tuple(part for part in text.split(",") if part != "")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rulestorm",
        description="Train and study weighted fuzzy rule classifiers.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--data", help="CSV file of attributes plus one label column")
    common.add_argument(
        "--label",
        help="label column: header name, or 0-based index for headerless files",
    )
    common.add_argument("--config", help="JSON config file; flags override it")
    common.add_argument("--out", help="output directory (default: current)")
    common.add_argument(
        "--seed", type=int, help="seed for the data split and the optimizer"
    )

    train = sub.add_parser(
        "train", parents=[common], help="fit a model, write model.json and trace.csv"
    )
    train.add_argument(
        "--optimizer", choices=OPTIMIZERS, help="search backend (default bso-ewma)"
    )

    evaluate = sub.add_parser(
        "evaluate", parents=[common], help="score a saved model on a dataset"
    )
    evaluate.add_argument("model", help="model.json produced by train")
    evaluate.add_argument(
        "--ratios",
        type=_float_list,
        help="single train fraction: score the held-out side of that split "
        "(default: score the whole file)",
    )

    sweep = sub.add_parser(
        "sweep",
        parents=[common],
        help="train per (ratio, optimizer, seed) cell, write sweep.csv",
    )
    sweep.add_argument(
        "--ratios", type=_float_list, help="train fractions (default 0.7,0.75,0.8,0.85)"
    )
    sweep.add_argument(
        "--seeds", type=_int_list, help="cell seeds (default 0,1,2,3,4)"
    )
    sweep.add_argument(
        "--optimizer",
        type=_name_list,
        help="comma-separated backends (default all three)",
    )
    sweep.add_argument("--workers", type=int, help="concurrent cells (default 1)")

    grid = sub.add_parser(
        "param-sweep",
        parents=[common],
        help="vary averaging weight and anneal slope, write param_sweep.csv",
    )
    grid.add_argument(
        "--e-values",
        type=_float_list,
        help="averaging weights in (0,1] (default 0.2,0.4,0.6,0.8,1.0)",
    )
    grid.add_argument(
        "--k-values",
        type=_float_list,
        help="anneal slope divisors > 0 (default 5,10,20,40)",
    )
    grid.add_argument(
        "--ratios", type=_float_list, help="single train fraction (default 0.8)"
    )

    bench = sub.add_parser(
        "benchmark",
        parents=[common],
        help="iterations/time to reach a target value, write benchmark.csv",
    )
    bench.add_argument(
        "--ratios",
        type=_float_list,
        help="training-data fractions in (0,1] (default 0.25,0.5,1.0)",
    )
    bench.add_argument(
        "--threshold", type=float, help="target best objective value (default 0.7)"
    )
    bench.add_argument(
        "--optimizer",
        type=_name_list,
        help="comma-separated backends (default all three)",
    )
    return parser


def load_config(path: str | None) -> dict:
    if path is None:
        return {}
    try:
        with open(path) as handle:
            document = json.load(handle)
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}")
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file {path} is not valid JSON: {exc}")
    if not isinstance(document, dict):
        raise ConfigError(f"config file {path} must hold a JSON object")
    unknown = sorted(set(document) - CONFIG_KEYS)
    if unknown:
        raise ConfigError(f"config: unknown key(s) {', '.join(unknown)}")
    return document


def _pick(args: argparse.Namespace, config: dict, key: str, default):
    """Flag value if given, else config-file value, else the default."""
    value = getattr(args, key.replace("-", "_"), None)
    if value is not None:
        return value
    if key in config and config[key] is not None:
        return config[key]
    return default


def _params_from(config: dict, section: str, cls, seed: int, force_seed: bool):
    """Build optimizer params from a config sub-object, with field-path errors.

    An explicit --seed flag beats a seed stored in the config section; without
    the flag, the section's own seed wins over the top-level one.
    """
    overrides = config.get(section, {})
    if not isinstance(overrides, dict):
        raise ConfigError(f"config: {section} must be an object")
    known = {f.name for f in fields(cls)}
    unknown = sorted(set(overrides) - known)
    if unknown:
        raise ConfigError(f"config: {section}.{unknown[0]} is not a parameter")
    effective = seed if force_seed else overrides.get("seed", seed)
    try:
        return cls(**{**overrides, "seed": effective})
    except ConfigError as exc:
        raise ConfigError(f"config: {section}: {exc}")
    except TypeError as exc:
        raise ConfigError(f"config: {section}: {exc}")


def _fitness_weights(config: dict) -> FitnessWeights | None:
    section = config.get("fitness_weights")
    if section is None:
        return None
    if not isinstance(section, dict):
        raise ConfigError("config: fitness_weights must be an object")
    known = {"alpha", "beta", "gamma"}
    unknown = sorted(set(section) - known)
    if unknown:
        raise ConfigError(f"config: fitness_weights.{unknown[0]} is not a parameter")
    try:
        return FitnessWeights(**section)
    except ConfigError as exc:
        raise ConfigError(f"config: fitness_weights: {exc}")


def _load_dataset(args, config) -> Dataset:
    data = _pick(args, config, "data", None)
    if data is None:
        raise ConfigError("a dataset is required: pass --data or set it in the config")
    label = _pick(args, config, "label", None)
    if isinstance(label, str) and label.isdigit():
        label = int(label)
    return load_csv(data, label)


def _out_dir(args, config) -> Path:
    out = Path(_pick(args, config, "out", "."))
    out.mkdir(parents=True, exist_ok=True)
    return out


def _settings(args, config, seed: int) -> ExperimentSettings:
    force_seed = getattr(args, "seed", None) is not None
    return ExperimentSettings(
        labels_per_attribute=int(_pick(args, config, "labels_per_attribute", 3)),
        rule_count=int(_pick(args, config, "rule_count", 10)),
        fitness_weights=_fitness_weights(config),
        accuracy_weight=float(_pick(args, config, "accuracy_weight", 1.0)),
        bso_params=_params_from(config, "bso", BsoParams, seed, force_seed),
        ga_params=_params_from(config, "ga", GaParams, seed, force_seed),
        sum_scores=bool(_pick(args, config, "sum_scores", False)),
    )


def _metric(value: float | None, digits: int = 4) -> str:
    return "undefined" if value is None else f"{value:.{digits}f}"


def cmd_train(args) -> int:
    config = load_config(args.config)
    seed = int(_pick(args, config, "seed", 0))
    settings = _settings(args, config, seed)
    optimizer = _pick(args, config, "optimizer", "bso-ewma")
    ds = _load_dataset(args, config)
    fraction = float(_pick(args, config, "split_fraction", 0.8))
    if fraction == 1.0:
        train, test = ds, None
    else:
        train, test = split(ds, SplitSpec(fraction=fraction, seed=seed))

    result = train_model(
        train,
        labels_per_attribute=settings.labels_per_attribute,
        rule_count=settings.rule_count,
        fitness_weights=settings.fitness_weights,
        accuracy_weight=settings.accuracy_weight,
        optimizer=optimizer,
        bso_params=settings.bso_params,
        ga_params=settings.ga_params,
        sum_scores=settings.sum_scores,
    )

    out = _out_dir(args, config)
    model_path = out / "model.json"
    trace_path = out / "trace.csv"
    save_model(result.model, model_path)
    result.run.trace.write_csv(trace_path)

    b = result.breakdown
    print(f"best objective value: {result.run.best.evaluation.value:.6f}")
    print(
        f"quality components: g1={b.g1:.6f} g2={b.g2:.6f} g3={b.g3:.6f} "
        f"G={b.fitness:.6f}"
    )
    print(f"train accuracy: {result.train_accuracy:.4f} ({train.n} records)")
    if test is not None:
        report = evaluate_model(result.model, test, sum_scores=settings.sum_scores)
        print(
            f"held-out accuracy: {report.accuracy:.4f} ({report.n} records, "
            f"sensitivity {_metric(report.sensitivity)}, "
            f"specificity {_metric(report.specificity)})"
        )
    print(f"model: {model_path}")
    print(f"trace: {trace_path}")
    return EXIT_OK


def cmd_evaluate(args) -> int:
    config = load_config(args.config)
    model = load_model(args.model)
    ds = _load_dataset(args, config)
    if ds.m != len(model.partitions):
        raise DataError(
            f"attribute count mismatch: model expects {len(model.partitions)} "
            f"attributes, data has {ds.m}"
        )
    ratios = _pick(args, config, "ratios", None)
    if ratios:
        if len(ratios) != 1:
            raise ConfigError(
                f"evaluate takes a single split ratio, got {len(ratios)}"
            )
        seed = int(_pick(args, config, "seed", 0))
        _, ds = split(ds, SplitSpec(fraction=ratios[0], seed=seed))
    sum_scores = bool(_pick(args, config, "sum_scores", False))

    report = evaluate_model(model, ds, sum_scores=sum_scores)
    print(f"records: {report.n}")
    print(f"accuracy: {_metric(report.accuracy)}")
    print(f"sensitivity: {_metric(report.sensitivity)}")
    print(f"specificity: {_metric(report.specificity)}")
    if report.counts is not None:
        c = report.counts
        print(f"confusion: tp={c.tp} fp={c.fp} tn={c.tn} fn={c.fn}")

    if args.out is not None or "out" in config:
        out = _out_dir(args, config)
        predictions_path = out / "predictions.csv"
        internal, scores = predict_dataset(model, ds, sum_scores=sum_scores)
        import csv as _csv

        with open(predictions_path, "w", newline="") as handle:
            writer = _csv.writer(handle)
            writer.writerow(("record", "true_label", "predicted_label", "score"))
            for i in range(ds.n):
                true = ds.class_values[int(ds.y[i]) - 1]
                predicted = model.class_values[int(internal[i]) - 1]
                writer.writerow((i, repr(true), repr(predicted), repr(float(scores[i]))))
        print(f"predictions: {predictions_path}")
    return EXIT_OK


def _optimizer_list(args, config) -> tuple[str, ...]:
    names = _pick(args, config, "optimizer", OPTIMIZERS)
    if isinstance(names, str):
        names = (names,)
    names = tuple(names)
    for name in names:
        if name not in OPTIMIZERS:
            raise ConfigError(f"optimizer must be one of {OPTIMIZERS}, got {name!r}")
    return names


def cmd_sweep(args) -> int:
    config = load_config(args.config)
    seed = int(_pick(args, config, "seed", 0))
    settings = _settings(args, config, seed)
    ds = _load_dataset(args, config)
    ratios = tuple(_pick(args, config, "ratios", DEFAULT_RATIOS))
    seeds = tuple(_pick(args, config, "seeds", DEFAULT_SEEDS))
    optimizers = _optimizer_list(args, config)
    workers = int(_pick(args, config, "workers", 1))

    result = run_sweep(ds, settings, ratios, seeds, optimizers, workers=workers)
    out = _out_dir(args, config)
    path = out / "sweep.csv"
    write_sweep_csv(result, path)
    for row in summarize_sweep(result):
        mean = row["mean_test_accuracy"]
        std = row["std_test_accuracy"]
        detail = (
            f"accuracy {mean:.4f} +/- {std:.4f}"
            if mean is not None
            else "all cells failed"
        )
        failures = f", {row['failures']} failed" if row["failures"] else ""
        print(
            f"ratio {row['ratio']:.2f} {row['optimizer']:>9}: {detail} "
            f"({row['seeds']} seeds{failures})"
        )
    print(f"sweep: {path}")
    return EXIT_OK


def cmd_param_sweep(args) -> int:
    config = load_config(args.config)
    seed = int(_pick(args, config, "seed", 0))
    settings = _settings(args, config, seed)
    ds = _load_dataset(args, config)
    e_values = tuple(_pick(args, config, "e_values", DEFAULT_E_VALUES))
    k_values = tuple(_pick(args, config, "k_values", DEFAULT_K_VALUES))
    ratios = _pick(args, config, "ratios", (0.8,))
    if len(ratios) != 1:
        raise ConfigError(f"param-sweep takes a single split ratio, got {len(ratios)}")

    rows = run_param_sweep(
        ds, settings, e_values, k_values, ratio=float(ratios[0]), seed=seed
    )
    out = _out_dir(args, config)
    path = out / "param_sweep.csv"
    write_param_sweep_csv(rows, path)
    for row in rows:
        score = (
            f"test accuracy {row.test_accuracy:.4f}"
            if row.error is None
            else f"failed: {row.error}"
        )
        print(f"e={row.smoothing:g} K={row.slope_divisor:g}: {score}")
    print(f"param-sweep: {path}")
    return EXIT_OK


def cmd_benchmark(args) -> int:
    config = load_config(args.config)
    seed = int(_pick(args, config, "seed", 0))
    settings = _settings(args, config, seed)
    ds = _load_dataset(args, config)
    fractions = tuple(_pick(args, config, "ratios", DEFAULT_FRACTIONS))
    threshold = float(_pick(args, config, "threshold", 0.7))
    optimizers = _optimizer_list(args, config)

    rows = run_benchmark(
        ds, settings, fractions, threshold, seed=seed, optimizers=optimizers
    )
    out = _out_dir(args, config)
    path = out / "benchmark.csv"
    write_benchmark_csv(rows, path)
    for row in rows:
        if row.error is not None:
            status = f"failed: {row.error}"
        elif row.reached:
            status = (
                f"reached {row.threshold:g} at iteration "
                f"{row.iterations_to_threshold} "
                f"({row.elapsed_ms_to_threshold:.0f} ms)"
            )
        else:
            status = f"DNF after {row.iterations_run} iterations"
        print(f"fraction {row.fraction:g} {row.optimizer:>9}: {status}")
    print(f"benchmark: {path}")
    return EXIT_OK


COMMANDS = {
    "train": cmd_train,
    "evaluate": cmd_evaluate,
    "sweep": cmd_sweep,
    "param-sweep": cmd_param_sweep,
    "benchmark": cmd_benchmark,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except Exception as exc:  # anything else is a runtime failure
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
