"""Command-line entry point: ``quorum {run,inject,metrics,bucket-size,synth}``."""
from __future__ import annotations

import argparse
import csv
import hashlib
import json
import logging
import platform
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__, encoding, metrics, pipeline, synthetic
from .config import WORKERS_ENV, ConfigError, RunConfig, load_config
from .encoding import DataError, Labels

log = logging.getLogger("quorum")

EXIT_OK, EXIT_CONFIG, EXIT_DATA, EXIT_INTERNAL = 0, 1, 2, 3
SCORES_HEADER = ("sample_index", "final_score", "rank", "flagged")


def write_scores(path, scores: np.ndarray, ranking: np.ndarray, flagged: np.ndarray) -> None:
    rank = np.empty(len(scores), dtype=int)
    rank[ranking] = np.arange(1, len(scores) + 1)
    is_flagged = np.zeros(len(scores), dtype=bool)
    is_flagged[flagged] = True
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(SCORES_HEADER)
        for i, s in enumerate(scores):
            w.writerow((i, repr(float(s)), int(rank[i]), int(is_flagged[i])))


def read_scores(path) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Return (scores, ranking, flagged indices) from a scores CSV."""
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    if not rows:
        raise DataError(f"{path}: empty scores file")
    scores = np.array([float(r["final_score"]) for r in rows])
    ranks = np.array([int(r["rank"]) for r in rows])
    flagged = np.array([int(r["sample_index"]) for r in rows if r["flagged"] == "1"], dtype=int)
    return scores, np.argsort(ranks, kind="stable"), flagged


def _sha256(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 20), b""):
            h.update(block)
    return h.hexdigest()


def report_metrics(out_dir: Path, scores, ranking, flagged, labels: Labels, figures: bool) -> metrics.MetricsReport:
    if labels.count == 0:
        log.warning("labels contain no anomalies; detection rates are undefined")
    report = metrics.evaluate(ranking, flagged, labels.flags)
    metrics.emit_curves(report, out_dir)
    if figures:
        from . import plotting

        plotting.plot_detection_curve(report.detection_curve, out_dir / "detection_curve.png")
        plotting.plot_scores(scores, out_dir / "scores.png", labels.flags, flagged)
    return report


def execute(cfg: RunConfig) -> dict:
    """Full pipeline for a resolved config; returns the manifest."""
    if cfg.dataset is None:
        raise ConfigError("dataset: no dataset path given")
    start = time.perf_counter()
    raw, labels = encoding.load_csv(cfg.dataset, cfg.label_column, cfg.has_header)
    norm = encoding.normalize(encoding.coerce_numeric(raw))
    n, m = norm.shape
    if m < 2**cfg.n_qubits - 1:
        raise ConfigError(
            f"n_qubits: {cfg.n_qubits} qubits need {2**cfg.n_qubits - 1} features, dataset has {m}"
        )
    spec = pipeline.EnsembleSpec(
        master_seed=cfg.master_seed,
        n_qubits=cfg.n_qubits,
        num_layers=cfg.num_layers,
        target_prob=cfg.target_prob,
        anomaly_rate=cfg.anomaly_rate,
        shots=cfg.effective_shots,
        noise=cfg.noise_config,
        topology=cfg.topology,
        include_full_reset=cfg.include_full_reset,
    )
    table = pipeline.run_ensemble(norm, spec, cfg.ensemble_groups, cfg.workers, cfg.group_dir)
    ranking, flagged = pipeline.rank_and_flag(table, cfg.anomaly_rate)

    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_scores(out / "scores.csv", table.final_score, ranking, flagged)
    artifacts = ["scores.csv"]
    report = None
    if labels is None:
        log.info("no label column; metrics skipped")
    else:
        report = report_metrics(out, table.final_score, ranking, flagged, labels, cfg.figures)
        artifacts += ["metrics.json", "detection_curve.csv"]
        if cfg.figures:
            artifacts += ["detection_curve.png", "scores.png"]
    if labels is None and cfg.figures:
        from . import plotting

        plotting.plot_scores(table.final_score, out / "scores.png", flagged=flagged)
        artifacts.append("scores.png")

    manifest = {
        "config": cfg.to_dict(),
        "master_seed": cfg.master_seed,
        "seed_scheme": "numpy SeedSequence(entropy=master_seed, spawn_key=(group, stream[, level])); "
        "streams 0=buckets 1=features 2=angles 3=shots",
        "dataset_sha256": _sha256(cfg.dataset),
        "n_samples": n,
        "n_features": m,
        "bucket_size": min(pipeline.compute_bucket_size(cfg.target_prob, cfg.anomaly_rate), n),
        "levels": list(spec.group_config(0, (n, m)).levels),
        "contributions_per_sample": int(table.counts[0]),
        "singleton_contributions": table.singletons,
        "versions": {"quorum": __version__, "numpy": np.__version__, "python": platform.python_version()},
        "artifacts": artifacts,
        "wall_time_s": round(time.perf_counter() - start, 3),
    }
    if report is not None:
        manifest["metrics"] = {k: getattr(report, k) for k in ("precision", "recall", "f1", "accuracy")}
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2, default=list) + "\n")
    return manifest


# -- subcommands ----------------------------------------------------------

def cmd_run(args) -> int:
    overrides = {
        "dataset": args.dataset,
        "label_column": args.label_column,
        "has_header": False if args.no_header else None,
        "n_qubits": args.n_qubits,
        "num_layers": args.num_layers,
        "shots": args.shots,
        "ensemble_groups": args.groups,
        "target_prob": args.target_prob,
        "anomaly_rate": args.anomaly_rate,
        "master_seed": args.seed,
        "exact_mode": True if args.exact else None,
        "noise": args.noise,
        "depol_1q": args.depol_1q,
        "depol_2q": args.depol_2q,
        "readout_flip": args.readout_flip,
        "topology": args.topology,
        "include_full_reset": True if args.include_full_reset else None,
        "output_dir": args.output_dir,
        "group_dir": args.group_dir,
        "workers": args.workers,
        "figures": False if args.no_figures else None,
    }
    cfg = load_config(args.config, overrides)
    manifest = execute(cfg)
    print(f"wrote {', '.join(manifest['artifacts'])} and manifest.json to {cfg.output_dir}")
    if "metrics" in manifest:
        print(json.dumps(manifest["metrics"]))
    return EXIT_OK


def cmd_inject(args) -> int:
    raw, _ = encoding.load_csv(args.input, args.drop_column)
    raw = encoding.coerce_numeric(raw)
    injected, labels = synthetic.inject_anomalies(raw, args.count, args.seed)
    _write_dataset(args.output, injected, labels, args.label_column)
    print(f"injected {labels.count} anomalies into {args.output}")
    return EXIT_OK


def cmd_synth(args) -> int:
    raw, labels = synthetic.planted_gaussian(
        args.samples, args.features, args.anomalies, args.shift, rng_seed=args.seed
    )
    _write_dataset(args.output, raw, labels, args.label_column)
    print(f"wrote {args.samples} rows ({labels.count} anomalies) to {args.output}")
    return EXIT_OK


def _write_dataset(path, raw, labels: Labels, label_column: str) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(list(raw.columns) + [label_column])
        for row, flag in zip(raw.cells, labels.flags):
            w.writerow([repr(float(v)) for v in row] + [int(flag)])


def cmd_metrics(args) -> int:
    scores, ranking, flagged = read_scores(args.scores)
    _, labels = encoding.load_csv(args.labels, args.label_column)
    if len(labels.flags) != len(scores):
        raise DataError(f"{len(labels.flags)} labels for {len(scores)} scores")
    out = Path(args.output_dir)
    report = report_metrics(out, scores, ranking, flagged, labels, not args.no_figures)
    print(json.dumps({k: getattr(report, k) for k in ("precision", "recall", "f1", "accuracy")}))
    return EXIT_OK


def cmd_bucket_size(args) -> int:
    try:
        size = pipeline.compute_bucket_size(args.target_prob, args.anomaly_rate)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    print(size)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="quorum", description="Zero-training quantum-autoencoder anomaly detection.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="score a CSV dataset")
    r.add_argument("-c", "--config", help="key = value config file")
    r.add_argument("--dataset")
    r.add_argument("--label-column")
    r.add_argument("--no-header", action="store_true", help="CSV has no header row (columns col0, col1, ...)")
    r.add_argument("--n-qubits", type=int)
    r.add_argument("--num-layers", type=int)
    r.add_argument("--shots", help="integer, or 'exact'")
    r.add_argument("--groups", type=int, help="number of ensemble groups")
    r.add_argument("--target-prob", type=float, help="P[anomaly in bucket]")
    r.add_argument("--anomaly-rate", type=float)
    r.add_argument("--seed", type=int, help="master seed")
    r.add_argument("--exact", action="store_true", help="infinite-shot mode")
    r.add_argument("--noise", action=argparse.BooleanOptionalAction, default=None)
    r.add_argument("--depol-1q", type=float)
    r.add_argument("--depol-2q", type=float)
    r.add_argument("--readout-flip", type=float)
    r.add_argument("--topology", choices=("linear", "ring"))
    r.add_argument("--include-full-reset", action="store_true")
    r.add_argument("-o", "--output-dir")
    r.add_argument("--group-dir", help="per-group result files (enables resume)")
    r.add_argument("-j", "--workers", type=int, help=f"worker processes (default ${WORKERS_ENV} or 1)")
    r.add_argument("--no-figures", action="store_true")
    r.set_defaults(func=cmd_run)

    i = sub.add_parser("inject", help="insert plausible anomalies into a CSV")
    i.add_argument("input")
    i.add_argument("output")
    i.add_argument("--count", type=int, required=True)
    i.add_argument("--seed", type=int, default=0)
    i.add_argument("--label-column", default="label", help="name of the label column written")
    i.add_argument("--drop-column", help="existing column to discard before injecting")
    i.set_defaults(func=cmd_inject)

    s = sub.add_parser("synth", help="write a planted Gaussian dataset")
    s.add_argument("output")
    s.add_argument("--samples", type=int, default=300)
    s.add_argument("--features", type=int, default=16)
    s.add_argument("--anomalies", type=int, default=10)
    s.add_argument("--shift", type=float, default=4.0)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--label-column", default="label")
    s.set_defaults(func=cmd_synth)

    m = sub.add_parser("metrics", help="evaluate a scores CSV against labels")
    m.add_argument("scores")
    m.add_argument("labels", help="CSV holding the label column")
    m.add_argument("--label-column", default="label")
    m.add_argument("-o", "--output-dir", default=".")
    m.add_argument("--no-figures", action="store_true")
    m.set_defaults(func=cmd_metrics)

    b = sub.add_parser("bucket-size", help="print the bucket size for (p, r)")
    b.add_argument("target_prob", type=float)
    b.add_argument("anomaly_rate", type=float)
    b.set_defaults(func=cmd_bucket_size)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (DataError, FileNotFoundError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except pipeline.GroupError as exc:
        print(f"internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    except Exception as exc:  # pragma: no cover - last-resort reporting
        log.exception("unexpected failure")
        print(f"internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
