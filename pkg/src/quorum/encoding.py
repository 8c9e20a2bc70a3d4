"""Tabular preprocessing and amplitude embedding with an overflow amplitude."""
from __future__ import annotations

import csv
import hashlib
import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

log = logging.getLogger(__name__)

EMBED_TOL = 1e-12
LABEL_TRUE = frozenset({"1", "1.0", "true", "yes", "o", "outlier", "anomaly", "anomalous"})


class DataError(ValueError):
    """Malformed dataset or a row that cannot be embedded."""


@dataclass
class RawDataset:
    """Feature cells only; labels never live here.

    ``cells`` is an ``object`` array (floats, strings or ``None`` for empty)
    until :func:`coerce_numeric` turns it into ``float64``.
    """

    columns: list[str]
    cells: np.ndarray
    empty_cells: int = 0

    def __post_init__(self):
        if self.cells.ndim != 2 or self.cells.shape[0] < 1 or self.cells.shape[1] < 1:
            raise DataError(f"dataset must be a non-empty N x M table, got shape {self.cells.shape}")
        if len(self.columns) != self.cells.shape[1]:
            raise DataError("column names do not match the number of feature columns")

    @property
    def shape(self) -> tuple[int, int]:
        return self.cells.shape

    @property
    def is_numeric(self) -> bool:
        return self.cells.dtype == np.float64


@dataclass(frozen=True)
class Labels:
    """Ground-truth anomaly flags, kept apart from the features for evaluation."""

    flags: np.ndarray

    @classmethod
    def from_cells(cls, cells) -> "Labels":
        return cls(np.array([str(c).strip().lower() in LABEL_TRUE for c in cells], dtype=bool))

    @property
    def count(self) -> int:
        return int(self.flags.sum())


@dataclass
class NormalizedDataset:
    values: np.ndarray
    feature_mins: np.ndarray
    feature_maxes: np.ndarray
    columns: list[str] = field(default_factory=list)

    @property
    def shape(self) -> tuple[int, int]:
        return self.values.shape


def _parse_cell(text: str):
    text = text.strip()
    if text == "":
        return None
    try:
        return float(text)
    except ValueError:
        return text


def load_csv(path, label_column: str | None = None, has_header: bool = True) -> tuple[RawDataset, Labels | None]:
    """Read a CSV, splitting off the label column if named.

    Without a header row, columns are named ``col0, col1, ...``.
    """
    with open(Path(path), newline="") as fh:
        rows = [r for r in csv.reader(fh) if any(c.strip() for c in r)]
    if not rows:
        raise DataError(f"{path}: empty file")
    if has_header:
        header = [h.strip() for h in rows.pop(0)]
    else:
        header = [f"col{j}" for j in range(len(rows[0]))]
    if not rows:
        raise DataError(f"{path}: no data rows")
    for i, r in enumerate(rows):
        if len(r) != len(header):
            raise DataError(f"{path}: row {i} has {len(r)} cells, header has {len(header)}")

    labels = None
    if label_column is not None:
        if label_column not in header:
            raise DataError(f"{path}: label column {label_column!r} not found")
        j = header.index(label_column)
        labels = Labels.from_cells(r[j] for r in rows)
        header = header[:j] + header[j + 1:]
        rows = [r[:j] + r[j + 1:] for r in rows]

    cells = np.empty((len(rows), len(header)), dtype=object)
    for i, r in enumerate(rows):
        cells[i] = [_parse_cell(c) for c in r]
    return RawDataset(header, cells), labels


def hash_to_unit(text: str) -> float:
    """Map text to [0, 1) via the first 8 bytes of BLAKE2b, big-endian.

    Only the top 53 bits are kept so the result is exactly representable
    and strictly below 1.
    """
    digest = hashlib.blake2b(text.encode("utf-8"), digest_size=8).digest()
    return (int.from_bytes(digest, "big") >> 11) * 2.0**-53


def coerce_numeric(dataset: RawDataset) -> RawDataset:
    if dataset.is_numeric:
        return dataset
    out = np.empty(dataset.shape, dtype=np.float64)
    empty = 0
    for idx, cell in np.ndenumerate(dataset.cells):
        if cell is None:
            empty += 1
            out[idx] = 0.0
        elif isinstance(cell, str):
            out[idx] = hash_to_unit(cell)
        else:
            out[idx] = float(cell)
    if empty:
        log.warning("%d empty cell(s) treated as 0.0", empty)
    return RawDataset(list(dataset.columns), out, dataset.empty_cells + empty)


def normalize(dataset: RawDataset) -> NormalizedDataset:
    """Min-max scale each feature onto [0, 1/M]; constant features map to 0."""
    if not dataset.is_numeric:
        raise DataError("normalize needs a numeric dataset; call coerce_numeric first")
    x = dataset.cells
    bad = np.flatnonzero(~np.isfinite(x).all(axis=1))
    if bad.size:
        raise DataError(f"non-finite cells in row(s) {bad[:10].tolist()}")
    m = x.shape[1]
    lo, hi = x.min(axis=0), x.max(axis=0)
    span = hi - lo
    # divide directly: 1/span overflows for subnormal spans
    scaled = np.divide(x - lo, span * m, out=np.zeros_like(x), where=span > 0)
    values = np.clip(scaled, 0.0, 1.0 / m)
    return NormalizedDataset(values, lo, hi, list(dataset.columns))


def embed(row, selected, n_qubits: int) -> np.ndarray:
    """Amplitudes for ``2**n - 1`` selected features plus a trailing overflow slot."""
    return embed_batch(np.asarray(row, dtype=float)[None, :], selected, n_qubits)[0]


def embed_batch(values: np.ndarray, selected, n_qubits: int) -> np.ndarray:
    m = 2**n_qubits - 1
    selected = np.asarray(selected, dtype=int)
    if selected.shape != (m,):
        raise DataError(f"{n_qubits} qubits hold {m} features, got {selected.size}")
    if len(set(selected.tolist())) != m:
        raise DataError("selected feature indices must be distinct")
    if selected.min() < 0 or selected.max() >= values.shape[1]:
        raise DataError("selected feature index out of range")
    feats = values[:, selected]
    mass = np.sum(feats**2, axis=1)
    over = np.flatnonzero(mass > 1.0 + EMBED_TOL)
    if over.size:
        raise DataError(f"feature mass exceeds 1 in row(s) {over[:10].tolist()}")
    if np.any(feats < 0):
        raise DataError("embedded feature values must be non-negative")
    overflow = np.sqrt(np.clip(1.0 - mass, 0.0, None))
    return np.concatenate([feats, overflow[:, None]], axis=1)

