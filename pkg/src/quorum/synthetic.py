"""Synthetic datasets and plausible-anomaly injection."""
from __future__ import annotations

import math

import numpy as np

from .encoding import DataError, Labels, RawDataset


def planted_gaussian(
    n_samples: int = 300,
    n_features: int = 16,
    n_anomalies: int = 10,
    shift: float = 4.0,
    shifted_fraction: float = 0.5,
    rng_seed=None,
    random_sign: bool = False,
) -> tuple[RawDataset, Labels]:
    """Standard-normal rows; anomalies are mean-shifted on a subset of features.

    Each anomaly moves by ``shift`` standard deviations on
    ``ceil(shifted_fraction * n_features)`` randomly chosen features.  Anomaly
    rows are placed at random positions.
    """
    rng = np.random.default_rng(rng_seed)
    x = rng.standard_normal((n_samples, n_features))
    rows = rng.choice(n_samples, size=n_anomalies, replace=False)
    k = math.ceil(shifted_fraction * n_features)
    for r in rows:
        cols = rng.choice(n_features, size=k, replace=False)
        sign = rng.choice([-1.0, 1.0], size=k) if random_sign else 1.0
        x[r, cols] += sign * shift
    flags = np.zeros(n_samples, dtype=bool)
    flags[rows] = True
    columns = [f"f{j}" for j in range(n_features)]
    return RawDataset(columns, x), Labels(flags)


def inject_anomalies(
    dataset: RawDataset, count: int, rng_seed=None, tail: float = 0.05
) -> tuple[RawDataset, Labels]:
    """Overwrite ``count`` random rows with synthetic in-range outliers.

    A replacement row starts uniform on each feature's observed range; then
    at least half of its features are pushed into the bottom or top ``tail``
    fraction of that range, so every value stays observable-plausible.
    """
    if not dataset.is_numeric:
        raise DataError("inject_anomalies needs a numeric dataset")
    n, m = dataset.shape
    if count < 0 or count >= n / 10:
        raise DataError(f"count must be below N/10 = {n / 10:g}, got {count}")
    x = dataset.cells.copy()
    flags = np.zeros(n, dtype=bool)
    if count == 0:
        return RawDataset(list(dataset.columns), x, dataset.empty_cells), Labels(flags)
    rng = np.random.default_rng(rng_seed)
    lo, hi = x.min(axis=0), x.max(axis=0)
    span = hi - lo
    rows = rng.choice(n, size=count, replace=False)
    k = math.ceil(m / 2)
    for r in rows:
        new = lo + rng.random(m) * span
        cols = rng.choice(m, size=k, replace=False)
        depth = rng.random(k) * tail * span[cols]
        upper = rng.random(k) < 0.5
        new[cols] = np.where(upper, hi[cols] - depth, lo[cols] + depth)
        x[r] = np.clip(new, lo, hi)
    flags[rows] = True
    return RawDataset(list(dataset.columns), x, dataset.empty_cells), Labels(flags)
