"""Evolutionary multi-objective clustering of temporal data with an automatically
tuned temporal-smoothness weight."""

from .baselines import run_kmeans_cot, run_penalty_ec, run_static_ec
from .data import Snapshot, TemporalDataset, common_samples, normalize_zero_mean, read_dataset_csv, write_dataset_csv
from .engine import EngineConfig, RunResult, run, run_ercot
from .generators import DATASET_NAMES, make_dataset
from .kernels import BACKEND
from .metrics import ScoreSeries, nmi, rand_index, score_run

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "DATASET_NAMES",
    "EngineConfig",
    "RunResult",
    "ScoreSeries",
    "Snapshot",
    "TemporalDataset",
    "common_samples",
    "make_dataset",
    "nmi",
    "normalize_zero_mean",
    "rand_index",
    "read_dataset_csv",
    "run",
    "run_ercot",
    "run_kmeans_cot",
    "run_penalty_ec",
    "run_static_ec",
    "score_run",
    "write_dataset_csv",
]
