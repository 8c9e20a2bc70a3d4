"""Detection-rate curves and confusion metrics against quarantined labels."""
from __future__ import annotations

import csv
import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

CURVE_HEADER = ("percentile", "detection_rate")


@dataclass
class MetricsReport:
    precision: float
    recall: float
    f1: float
    accuracy: float
    detection_curve: list[tuple[int, float]] = field(default_factory=list)

    def to_json(self) -> dict:
        out = asdict(self)
        out["detection_curve"] = [[int(k), float(r)] for k, r in self.detection_curve]
        return out


def detection_rate_at(ranking, labels, percentile: float) -> float:
    """Fraction of true anomalies among the top ``ceil(k N / 100)`` ranked samples.

    ``ranking`` lists sample indices from most to least anomalous.  Returns
    NaN when the labels contain no anomaly.
    """
    if not 0 < percentile <= 100:
        raise ValueError("percentile must lie in (0, 100]")
    flags = np.asarray(labels, dtype=bool)
    total = int(flags.sum())
    if total == 0:
        return math.nan
    ranking = np.asarray(ranking)
    top = math.ceil(percentile * len(ranking) / 100 - 1e-9)
    return int(flags[ranking[:top]].sum()) / total


def detection_curve(ranking, labels, percentiles=range(1, 101)) -> list[tuple[int, float]]:
    return [(int(k), detection_rate_at(ranking, labels, k)) for k in percentiles]


def confusion_metrics(flagged, labels) -> dict[str, float]:
    flags = np.asarray(labels, dtype=bool)
    n = len(flags)
    pred = np.zeros(n, dtype=bool)
    pred[np.asarray(list(flagged), dtype=int)] = True
    tp = int(np.sum(pred & flags))
    fp = int(np.sum(pred & ~flags))
    tn = int(np.sum(~pred & ~flags))
    a = int(flags.sum())
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / a if a else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    return {"precision": precision, "recall": recall, "f1": f1, "accuracy": (tp + tn) / n}


def evaluate(ranking, flagged, labels) -> MetricsReport:
    return MetricsReport(**confusion_metrics(flagged, labels), detection_curve=detection_curve(ranking, labels))


def emit_curves(report: MetricsReport, path) -> tuple[Path, Path]:
    """Write ``detection_curve.csv`` and ``metrics.json`` into directory ``path``."""
    out = Path(path)
    out.mkdir(parents=True, exist_ok=True)
    curve_path = out / "detection_curve.csv"
    with open(curve_path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(CURVE_HEADER)
        for k, rate in report.detection_curve:
            w.writerow((k, repr(float(rate))))
    json_path = out / "metrics.json"
    json_path.write_text(json.dumps(report.to_json(), indent=2) + "\n")
    return curve_path, json_path


def read_curve(path) -> list[tuple[int, float]]:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if tuple(header) != CURVE_HEADER:
            raise ValueError(f"{path}: unexpected header {header}")
        return [(int(k), float(r)) for k, r in reader]
