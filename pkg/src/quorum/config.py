"""Run configuration: a flat ``key = value`` text file plus command-line overrides.

File format::

    # comments start with '#'
    dataset = data/breast_cancer.csv
    label_column = label
    has_header = true
    shots = 4096          # or 'exact' for infinite-shot mode
    noise = true

Booleans accept true/false/yes/no/1/0.  Unknown keys are an error.
"""
from __future__ import annotations

import dataclasses
import logging
import os
from dataclasses import dataclass, fields
from pathlib import Path

from .sim import NoiseConfig

log = logging.getLogger(__name__)

WORKERS_ENV = "QUORUM_WORKERS"
_BRISBANE = NoiseConfig.brisbane()


class ConfigError(ValueError):
    pass


def _default_workers() -> int:
    raw = os.environ.get(WORKERS_ENV)
    if raw is None:
        return 1
    try:
        return int(raw)
    except ValueError:
        raise ConfigError(f"{WORKERS_ENV} must be an integer, got {raw!r}") from None


@dataclass
class RunConfig:
    dataset: str | None = None
    label_column: str | None = None
    has_header: bool = True
    n_qubits: int = 3
    num_layers: int = 2
    shots: int = 4096
    ensemble_groups: int = 1000
    target_prob: float = 0.75
    anomaly_rate: float = 0.03
    master_seed: int = 0
    exact_mode: bool = False
    noise: bool = False
    depol_1q: float = _BRISBANE.depol_1q
    depol_2q: float = _BRISBANE.depol_2q
    readout_flip: float = _BRISBANE.readout_flip
    topology: str = "linear"
    include_full_reset: bool = False
    output_dir: str = "quorum_out"
    group_dir: str | None = None
    workers: int = dataclasses.field(default_factory=_default_workers)
    figures: bool = True

    def validate(self) -> "RunConfig":
        def need(cond, key, msg):
            if not cond:
                raise ConfigError(f"{key}: {msg} (got {getattr(self, key)!r})")

        need(0 < self.target_prob < 1, "target_prob", "must lie in (0, 1)")
        need(0 < self.anomaly_rate < 1, "anomaly_rate", "must lie in (0, 1)")
        need(self.n_qubits >= 2, "n_qubits", "must be at least 2")
        need(self.num_layers >= 1, "num_layers", "must be at least 1")
        need(self.shots >= 1, "shots", "must be at least 1")
        need(self.ensemble_groups >= 1, "ensemble_groups", "must be at least 1")
        need(self.workers >= 1, "workers", "must be at least 1")
        need(self.master_seed >= 0, "master_seed", "must be non-negative")
        need(self.topology in ("linear", "ring"), "topology", "must be 'linear' or 'ring'")
        for key in ("depol_1q", "depol_2q", "readout_flip"):
            need(0 <= getattr(self, key) <= 1, key, "must lie in [0, 1]")
        return self

    @property
    def effective_shots(self) -> int | None:
        return None if self.exact_mode else self.shots

    @property
    def noise_config(self) -> NoiseConfig:
        return NoiseConfig(self.noise, self.depol_1q, self.depol_2q, self.readout_flip)

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


_FIELDS = {f.name: f for f in fields(RunConfig)}
_TRUE = {"true", "yes", "on", "1"}
_FALSE = {"false", "no", "off", "0"}


def _convert(key: str, raw):
    if not isinstance(raw, str):
        return raw
    text = raw.strip()
    kind = _FIELDS[key].type
    try:
        if key == "shots" and text.lower() in ("exact", "inf", "infinite"):
            return "exact"
        if kind == "bool":
            if text.lower() in _TRUE:
                return True
            if text.lower() in _FALSE:
                return False
            raise ValueError
        if kind == "int":
            return int(text)
        if kind == "float":
            return float(text)
    except ValueError:
        raise ConfigError(f"{key}: cannot parse {text!r} as {kind}") from None
    return None if text.lower() in ("", "none") else text


def parse_config_text(text: str, source: str = "<config>") -> dict:
    values = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in _FIELDS:
            raise ConfigError(f"{source}:{lineno}: unknown key {key!r}")
        values[key] = value
    return values


def load_config(path=None, overrides: dict | None = None) -> RunConfig:
    """Resolve defaults < file < overrides, validate, and log the result."""
    merged: dict = {}
    if path is not None:
        merged.update(parse_config_text(Path(path).read_text(), str(path)))
    for key, value in (overrides or {}).items():
        if key not in _FIELDS:
            raise ConfigError(f"unknown key {key!r}")
        if value is not None:
            merged[key] = value
    kwargs = {k: _convert(k, v) for k, v in merged.items()}
    if kwargs.get("shots") == "exact":
        kwargs["shots"] = RunConfig.shots
        kwargs["exact_mode"] = True
    cfg = RunConfig(**kwargs).validate()
    log.info("resolved config: %s", cfg.to_dict())
    return cfg
