"""Ensemble orchestration: buckets, feature subsets, circuit sweeps, scoring."""
from __future__ import annotations

import csv
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from . import ansatz
from .encoding import NormalizedDataset, embed_batch
from .sim import NoiseConfig, sample_shots

log = logging.getLogger(__name__)

SIGMA_FLOOR = 1e-9
# sub-seed streams, keyed by position in the SeedSequence spawn key
STREAM_BUCKETS, STREAM_FEATURES, STREAM_ANGLES, STREAM_SHOTS = range(4)


class GroupError(RuntimeError):
    def __init__(self, group_index: int, master_seed: int, cause: Exception):
        super().__init__(f"ensemble group {group_index} (master_seed={master_seed}) failed: {cause}")
        self.group_index = group_index
        self.master_seed = master_seed


def compute_bucket_size(target_prob: float, anomaly_rate: float) -> int:
    """Smallest B with 1 - (1 - r)**B >= p, never below 2."""
    if not 0.0 < target_prob < 1.0:
        raise ValueError(f"target_prob must lie in (0, 1), got {target_prob}")
    if not 0.0 < anomaly_rate < 1.0:
        raise ValueError(f"anomaly_rate must lie in (0, 1), got {anomaly_rate}")
    raw = math.log1p(-target_prob) / math.log1p(-anomaly_rate)
    return max(2, math.ceil(raw - 1e-9))


def sub_seed(master_seed: int, group_index: int, stream: int, *extra: int) -> np.random.SeedSequence:
    """Counter-based child seed; independent of how groups are scheduled."""
    return np.random.SeedSequence(entropy=master_seed, spawn_key=(group_index, stream, *extra))


@dataclass(frozen=True)
class BucketPlan:
    bucket_size: int
    buckets: tuple[np.ndarray, ...]

    @classmethod
    def from_permutation(cls, perm: np.ndarray, bucket_size: int) -> "BucketPlan":
        n = len(perm)
        chunks = [perm[i:i + bucket_size] for i in range(0, n, bucket_size)]
        if len(chunks) > 1 and len(chunks[-1]) == 1:
            chunks[-2] = np.concatenate(chunks[-2:])
            chunks.pop()
        return cls(bucket_size, tuple(chunks))

    def labels(self, n: int) -> np.ndarray:
        """Bucket id of every sample."""
        out = np.full(n, -1, dtype=int)
        for b, members in enumerate(self.buckets):
            out[members] = b
        return out


@dataclass(frozen=True)
class EnsembleGroupConfig:
    group_index: int
    master_seed: int
    buckets: BucketPlan
    feature_subset: np.ndarray
    params: ansatz.AnsatzParams
    levels: tuple[int, ...]

    def shots_seed(self, level: int) -> np.random.SeedSequence:
        return sub_seed(self.master_seed, self.group_index, STREAM_SHOTS, level)


def make_group_config(
    master_seed: int,
    group_index: int,
    dataset_shape: tuple[int, int],
    n_qubits: int,
    target_prob: float,
    anomaly_rate: float,
    num_layers: int = 2,
    topology: str = "linear",
    include_full_reset: bool = False,
) -> EnsembleGroupConfig:
    n_samples, n_features = dataset_shape
    m = 2**n_qubits - 1
    if n_features < m:
        raise ValueError(
            f"{n_qubits}-qubit encoding needs {m} features, dataset has {n_features}; "
            f"lower n_qubits"
        )
    size = min(compute_bucket_size(target_prob, anomaly_rate), n_samples)
    perm = np.random.default_rng(sub_seed(master_seed, group_index, STREAM_BUCKETS)).permutation(n_samples)
    feats = np.random.default_rng(sub_seed(master_seed, group_index, STREAM_FEATURES)).choice(
        n_features, size=m, replace=False
    )
    params = ansatz.draw_params(
        n_qubits, num_layers, sub_seed(master_seed, group_index, STREAM_ANGLES), topology
    )
    return EnsembleGroupConfig(
        group_index,
        master_seed,
        BucketPlan.from_permutation(perm, size),
        feats,
        params,
        tuple(ansatz.compression_levels(n_qubits, include_full_reset)),
    )


def run_group(
    config: EnsembleGroupConfig,
    data: NormalizedDataset | np.ndarray,
    shots: int | None = 4096,
    noise: NoiseConfig | None = None,
) -> np.ndarray:
    """Similarity of every sample at every level, shape ``(levels, N)``.

    ``shots=None`` returns the exact ancilla-zero probability.
    """
    values = data.values if isinstance(data, NormalizedDataset) else np.asarray(data)
    n = config.params.n_qubits
    amps = embed_batch(values, config.feature_subset, n)
    out = np.empty((len(config.levels), len(values)))
    for i, level in enumerate(config.levels):
        p0 = ansatz.swap_test_p0(amps, config.params, level, noise)
        out[i] = p0 if shots is None else sample_shots(p0, shots, config.shots_seed(level))
    return out


@dataclass
class ScoreTable:
    deviation: np.ndarray
    counts: np.ndarray
    singletons: int = 0

    @classmethod
    def empty(cls, n_samples: int) -> "ScoreTable":
        return cls(np.zeros(n_samples), np.zeros(n_samples, dtype=int))

    @property
    def final_score(self) -> np.ndarray:
        return self.deviation

    def add(self, contributions: np.ndarray, singletons: int = 0) -> None:
        """Fold in one group's ``(levels, N)`` contributions, level by level."""
        for row in np.atleast_2d(contributions):
            self.deviation += row
            self.counts += 1
        self.singletons += singletons


def bucket_deviations(similarities: np.ndarray, plan: BucketPlan) -> tuple[np.ndarray, int]:
    """|s - μ| / max(σ, floor) per bucket, population σ; singleton buckets give 0."""
    sims = np.atleast_2d(similarities)
    out = np.zeros_like(sims, dtype=float)
    singletons = 0
    for members in plan.buckets:
        if len(members) < 2:
            singletons += len(members) * sims.shape[0]
            continue
        vals = sims[:, members]
        mu = vals.mean(axis=1, keepdims=True)
        sigma = vals.std(axis=1, keepdims=True)
        out[:, members] = np.abs(vals - mu) / np.maximum(sigma, SIGMA_FLOOR)
    return out, singletons


def score(results: Iterable[tuple[BucketPlan, np.ndarray]], n_samples: int) -> ScoreTable:
    """Sum bucket deviations over (group, level) in the order given."""
    table = ScoreTable.empty(n_samples)
    for plan, sims in results:
        contrib, singles = bucket_deviations(sims, plan)
        table.add(contrib, singles)
    if table.singletons:
        log.warning("%d contribution(s) came from singleton buckets and were scored 0", table.singletons)
    return table


def rank_and_flag(scores, anomaly_rate: float, n: int | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Sample indices by descending score (ties by index) and the top ⌈rN⌉ flagged."""
    s = scores.final_score if isinstance(scores, ScoreTable) else np.asarray(scores, dtype=float)
    n = len(s) if n is None else n
    order = np.lexsort((np.arange(len(s)), -s))
    k = min(n, math.ceil(anomaly_rate * n - 1e-9))
    return order, np.sort(order[:k])


# -- per-group result files -----------------------------------------------

GROUP_HEADER = ("group_index", "level", "sample_index", "similarity")


def write_group_result(path, group_index: int, levels: Sequence[int], sims: np.ndarray) -> None:
    path = Path(path)
    tmp = path.with_suffix(path.suffix + ".tmp")
    with open(tmp, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(GROUP_HEADER)
        for level, row in zip(levels, sims):
            for idx, value in enumerate(row):
                w.writerow((group_index, level, idx, repr(float(value))))
    tmp.replace(path)


def read_group_result(path, levels: Sequence[int], n_samples: int) -> np.ndarray:
    sims = np.full((len(levels), n_samples), np.nan)
    pos = {level: i for i, level in enumerate(levels)}
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        for rec in reader:
            sims[pos[int(rec["level"])], int(rec["sample_index"])] = float(rec["similarity"])
    if np.isnan(sims).any():
        raise ValueError(f"{path}: incomplete group result")
    return sims


# -- ensemble runner ------------------------------------------------------

@dataclass(frozen=True)
class EnsembleSpec:
    """Everything a worker needs to rebuild any group from its index."""

    master_seed: int
    n_qubits: int = 3
    num_layers: int = 2
    target_prob: float = 0.75
    anomaly_rate: float = 0.03
    shots: int | None = 4096
    noise: NoiseConfig = NoiseConfig()
    topology: str = "linear"
    include_full_reset: bool = False

    def group_config(self, group_index: int, shape: tuple[int, int]) -> EnsembleGroupConfig:
        return make_group_config(
            self.master_seed, group_index, shape, self.n_qubits, self.target_prob,
            self.anomaly_rate, self.num_layers, self.topology, self.include_full_reset,
        )


_WORKER_DATA: np.ndarray | None = None


def _init_worker(values: np.ndarray) -> None:
    global _WORKER_DATA
    _WORKER_DATA = values


def _group_task(spec: EnsembleSpec, group_index: int, values: np.ndarray | None = None):
    values = _WORKER_DATA if values is None else values
    try:
        cfg = spec.group_config(group_index, values.shape)
        return group_index, run_group(cfg, values, spec.shots, spec.noise)
    except Exception as exc:  # surfaced with the reproducing seed in the parent
        return group_index, exc


def run_ensemble(
    data: NormalizedDataset | np.ndarray,
    spec: EnsembleSpec,
    num_groups: int,
    workers: int = 1,
    group_dir=None,
) -> ScoreTable:
    """Run ``num_groups`` groups and merge their scores in group-index order.

    When ``group_dir`` is given, each group's similarities are written there
    and existing files are reused, so an interrupted run can be resumed.
    """
    values = data.values if isinstance(data, NormalizedDataset) else np.asarray(data, dtype=float)
    shape = values.shape
    group_dir = Path(group_dir) if group_dir is not None else None
    if group_dir is not None:
        group_dir.mkdir(parents=True, exist_ok=True)

    results: dict[int, np.ndarray] = {}
    todo = []
    for g in range(num_groups):
        f = group_dir / f"group_{g:06d}.csv" if group_dir else None
        if f is not None and f.exists():
            levels = spec.group_config(g, shape).levels
            results[g] = read_group_result(f, levels, shape[0])
        else:
            todo.append(g)

    def collect(g, out):
        if isinstance(out, Exception):
            raise GroupError(g, spec.master_seed, out) from out
        results[g] = out
        if group_dir is not None:
            levels = spec.group_config(g, shape).levels
            write_group_result(group_dir / f"group_{g:06d}.csv", g, levels, out)

    if workers <= 1 or len(todo) <= 1:
        for g in todo:
            collect(*_group_task(spec, g, values))
    else:
        chunk = max(1, len(todo) // (4 * workers))
        with ProcessPoolExecutor(workers, initializer=_init_worker, initargs=(values,)) as pool:
            for g, out in pool.map(_group_task, [spec] * len(todo), todo, chunksize=chunk):
                collect(g, out)

    return score(
        ((spec.group_config(g, shape).buckets, results[g]) for g in range(num_groups)),
        shape[0],
    )
