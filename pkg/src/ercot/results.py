"""Run artifacts on disk: per-run JSON and partition CSVs, plus cross-run aggregates.

Everything written here is a pure function of the run configuration and seed.
Wall-clock timings go to their own file so that result files can be compared
byte for byte across invocations.
"""

from __future__ import annotations

import csv
import json
from collections.abc import Sequence
from pathlib import Path

import numpy as np

from .data import TemporalDataset
from .engine import RunResult
from .genome import Partition
from .metrics import ScoreSeries, score_partitions

AGGREGATE_COLUMNS = ("algorithm", "dataset", "runs", "mRI_mean", "mRI_std", "mNMI_mean", "mNMI_std")
PER_TIME_COLUMNS = ("t", "RI_mean", "RI_std", "NMI_mean", "NMI_std")
ALPHA_COLUMNS = ("t", "alpha_mean", "alpha_std", "runs")
RUNS_COLUMNS = ("run", "seed", "mRI", "mNMI")
TIMING_COLUMNS = ("run", "seed", "t", "seconds", "evaluations")
PARTITION_COLUMNS = ("t", "sample_id", "cluster")


def _num(x: float) -> str:
    return repr(float(x))


def run_stem(index: int) -> str:
    return f"run_{index:03d}"


def run_to_dict(result: RunResult, config: dict) -> dict:
    scores = None
    if result.scores is not None:
        scores = {
            "mRI": result.scores.mRI,
            "mNMI": result.scores.mNMI,
            "per_time": [{"t": t, "RI": r, "NMI": m} for t, r, m in result.scores.per_time],
        }
    return {
        "algorithm": result.algorithm,
        "dataset": result.dataset,
        "seed": result.seed,
        "config": config,
        "times": result.times,
        "n_clusters": result.n_clusters,
        "alpha": result.alphas,
        "weights": [None if w is None else w.to_dict() for w in result.weights],
        "evaluations": result.evaluations,
        "scores": scores,
    }


def write_run_json(result: RunResult, config: dict, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(run_to_dict(result, config), fh, indent=1, sort_keys=True)
        fh.write("\n")


def write_partitions_csv(partitions: Sequence[Partition], times: Sequence[int], path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(PARTITION_COLUMNS)
        for t, part in zip(times, partitions):
            for i, c in zip(part.ids, part.labels):
                w.writerow((int(t), int(i), int(c)))


def read_partitions_csv(path: str | Path) -> tuple[list[int], list[Partition]]:
    rows: dict[int, list[tuple[int, int]]] = {}
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = tuple(next(reader, ()))
        if header != PARTITION_COLUMNS:
            raise ValueError(f"{path}: expected header {','.join(PARTITION_COLUMNS)}, got {','.join(header)}")
        for rec in reader:
            t, i, c = (int(v) for v in rec)
            rows.setdefault(t, []).append((i, c))
    times = sorted(rows)
    parts = []
    for t in times:
        arr = np.array(sorted(rows[t]), dtype=np.int64)
        parts.append(Partition(arr[:, 0], arr[:, 1], tuple(int(c) for c in np.unique(arr[:, 1]))))
    return times, parts


def rescore(path: str | Path, data: TemporalDataset) -> ScoreSeries:
    """Scores recomputed from a partitions CSV."""
    times, parts = read_partitions_csv(path)
    if times != [s.time_index for s in data]:
        raise ValueError(f"{path}: time steps {times} do not match the dataset's")
    return score_partitions(parts, data)


def _write(path: Path, columns: Sequence[str], rows: list[Sequence]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(columns)
        w.writerows(rows)


def _mean_std(values: Sequence[float]) -> tuple[float, float]:
    arr = np.asarray(values, dtype=np.float64)
    return float(arr.mean()), float(arr.std(ddof=0))


def write_aggregates(results: Sequence[RunResult], out_dir: str | Path) -> None:
    """Cross-run tables: ``runs.csv``, ``aggregate.csv``, ``per_time.csv``,
    ``alpha.csv`` and the timing log ``timing.csv``."""
    out = Path(out_dir)
    if not results:
        raise ValueError("no runs to aggregate")
    first = results[0]
    _write(
        out / "timing.csv",
        TIMING_COLUMNS,
        [
            (k, r.seed, t, _num(sec), ev)
            for k, r in enumerate(results)
            for t, sec, ev in zip(r.times, r.seconds, r.evaluations)
        ],
    )

    alpha_rows = []
    for j, t in enumerate(first.times):
        vals = [r.alphas[j] for r in results if r.alphas[j] is not None]
        if vals:
            m, s = _mean_std(vals)
            alpha_rows.append((t, _num(m), _num(s), len(vals)))
    _write(out / "alpha.csv", ALPHA_COLUMNS, alpha_rows)

    if any(r.scores is None for r in results):
        return
    _write(
        out / "runs.csv",
        RUNS_COLUMNS,
        [(k, r.seed, _num(r.scores.mRI), _num(r.scores.mNMI)) for k, r in enumerate(results)],
    )
    mri = _mean_std([r.scores.mRI for r in results])
    mnmi = _mean_std([r.scores.mNMI for r in results])
    _write(
        out / "aggregate.csv",
        AGGREGATE_COLUMNS,
        [(first.algorithm, first.dataset, len(results), *map(_num, (*mri, *mnmi)))],
    )
    per_time = []
    for j, t in enumerate(first.times):
        ri = _mean_std([r.scores.per_time[j][1] for r in results])
        nm = _mean_std([r.scores.per_time[j][2] for r in results])
        per_time.append((t, *map(_num, (*ri, *nm))))
    _write(out / "per_time.csv", PER_TIME_COLUMNS, per_time)


def read_csv_rows(path: str | Path) -> list[dict[str, str]]:
    with open(path, newline="", encoding="utf-8") as fh:
        return list(csv.DictReader(fh))
