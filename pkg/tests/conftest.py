from pathlib import Path

import numpy as np
import pytest

from rulestorm.dataset import Dataset

REPO_ROOT = Path(__file__).resolve().parent.parent


@pytest.fixture(scope="session")
def pid_path() -> Path:
    return REPO_ROOT / "data" / "pima.csv"


def make_separable_dataset(n=60, seed=0) -> Dataset:
    """Class follows the first attribute's region; second attribute is noise."""
    rng = np.random.default_rng(seed)
    x1 = rng.uniform(0.0, 10.0, size=n)
    x2 = rng.uniform(0.0, 10.0, size=n)
    y = np.where(x1 < 5.0, 1, 2)
    # pin the range so the partition peaks are stable
    x1[0], x1[1] = 0.0, 10.0
    y[0], y[1] = 1, 2
    x = np.column_stack([x1, x2])
    return Dataset(
        x=x,
        y=y.astype(int),
        attribute_names=("a1", "a2"),
        class_values=(0.0, 1.0),
    )


def make_noise_dataset(n=40, seed=7) -> Dataset:
    """Labels are independent coin flips: no attribute carries signal."""
    rng = np.random.default_rng(seed)
    x = rng.uniform(0.0, 1.0, size=(n, 2))
    y = rng.integers(1, 3, size=n)
    y[0], y[1] = 1, 2
    return Dataset(
        x=x,
        y=y.astype(int),
        attribute_names=("a1", "a2"),
        class_values=(0.0, 1.0),
    )
