"""Training-free anomaly detection with random quantum autoencoders and SWAP tests."""

__version__ = "0.1.0"

from .encoding import DataError, Labels, NormalizedDataset, RawDataset, coerce_numeric, embed, load_csv, normalize
from .pipeline import EnsembleSpec, compute_bucket_size, rank_and_flag, run_ensemble
from .sim import GateOp, NoiseConfig

__all__ = [
    "DataError",
    "EnsembleSpec",
    "GateOp",
    "Labels",
    "NoiseConfig",
    "NormalizedDataset",
    "RawDataset",
    "coerce_numeric",
    "compute_bucket_size",
    "embed",
    "load_csv",
    "normalize",
    "rank_and_flag",
    "run_ensemble",
]
