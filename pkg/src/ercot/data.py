"""Temporal dataset containers and their CSV format."""

from __future__ import annotations

import csv
import io
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

UNKNOWN_LABEL = -1


@dataclass(frozen=True, eq=False)
class Snapshot:
    """One time step: sample ids, coordinates and optional ground-truth labels.

    Rows are kept sorted by sample id.
    """

    time_index: int
    ids: np.ndarray
    X: np.ndarray
    labels: np.ndarray | None = None

    def __post_init__(self) -> None:
        ids = np.asarray(self.ids, dtype=np.int64).reshape(-1)
        X = np.asarray(self.X, dtype=np.float64)
        if X.ndim != 2 or X.shape[1] < 1:
            raise ValueError(f"coordinates must be a 2-D array with D >= 1, got shape {X.shape}")
        if X.shape[0] != ids.shape[0]:
            raise ValueError("ids and coordinates differ in length")
        if np.unique(ids).size != ids.size:
            raise ValueError(f"duplicate sample ids at t={self.time_index}")
        labels = None
        if self.labels is not None:
            labels = np.asarray(self.labels, dtype=np.int64).reshape(-1)
            if labels.shape[0] != ids.shape[0]:
                raise ValueError("labels do not align with samples")
        order = np.argsort(ids, kind="stable")
        if not np.array_equal(order, np.arange(ids.size)):
            ids, X = ids[order], X[order]
            labels = None if labels is None else labels[order]
        object.__setattr__(self, "ids", ids)
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "labels", labels)

    @property
    def n_samples(self) -> int:
        return int(self.ids.shape[0])

    @property
    def dim(self) -> int:
        return int(self.X.shape[1])

    @property
    def has_labels(self) -> bool:
        return self.labels is not None and bool(np.all(self.labels != UNKNOWN_LABEL))

    def bounds(self) -> tuple[np.ndarray, np.ndarray]:
        """Per-dimension (min, max) box of the coordinates."""
        return self.X.min(axis=0), self.X.max(axis=0)

    def rows_of(self, ids: np.ndarray) -> np.ndarray:
        """Row positions of ``ids`` (all of which must be present)."""
        pos = np.searchsorted(self.ids, ids)
        if np.any(pos >= self.ids.size) or np.any(self.ids[np.minimum(pos, self.ids.size - 1)] != ids):
            raise KeyError("some ids are not in this snapshot")
        return pos


@dataclass(frozen=True)
class ClusterTrack:
    """Generating Gaussian of one synthetic cluster: per-time mean and isotropic scale."""

    means: np.ndarray  # (T, D)
    scale: float

    def mean_at(self, t: int) -> np.ndarray:
        return self.means[t - 1]


@dataclass(frozen=True, eq=False)
class TemporalDataset:
    snapshots: tuple[Snapshot, ...]
    name: str = "dataset"
    tracks: dict[int, ClusterTrack] = field(default_factory=dict)

    def __post_init__(self) -> None:
        snaps = tuple(self.snapshots)
        if not snaps:
            raise ValueError("a temporal dataset needs at least one snapshot")
        times = [s.time_index for s in snaps]
        if any(b <= a for a, b in zip(times, times[1:])):
            raise ValueError("time indices must be strictly increasing")
        dims = {s.dim for s in snaps}
        if len(dims) != 1:
            raise ValueError(f"inconsistent dimensionality across snapshots: {sorted(dims)}")
        object.__setattr__(self, "snapshots", snaps)

    def __len__(self) -> int:
        return len(self.snapshots)

    def __iter__(self):
        return iter(self.snapshots)

    def __getitem__(self, i: int) -> Snapshot:
        return self.snapshots[i]

    @property
    def horizon(self) -> int:
        return len(self.snapshots)

    @property
    def dim(self) -> int:
        return self.snapshots[0].dim

    def renamed(self, name: str) -> TemporalDataset:
        return replace(self, name=name)


def common_samples(a: Snapshot, b: Snapshot) -> np.ndarray:
    """Sorted ids present in both snapshots."""
    return np.intersect1d(a.ids, b.ids, assume_unique=True)


def normalize_zero_mean(s: Snapshot) -> Snapshot:
    """Copy of ``s`` with every coordinate column shifted to zero mean."""
    if s.n_samples == 0:
        raise ValueError("cannot normalise an empty snapshot")
    return replace(s, X=s.X - s.X.mean(axis=0))


# --- CSV ---------------------------------------------------------------------


def _fmt(v: float) -> str:
    return repr(float(v))


def write_dataset_csv(data: TemporalDataset, dest: str | Path | io.TextIOBase) -> None:
    """Write ``t,sample_id,label,x1..xD`` rows sorted by (t, sample_id)."""
    header = ["t", "sample_id", "label"] + [f"x{d + 1}" for d in range(data.dim)]

    def _write(fh) -> None:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for snap in data:
            labels = snap.labels if snap.labels is not None else np.full(snap.n_samples, UNKNOWN_LABEL)
            for sid, lab, row in zip(snap.ids, labels, snap.X):
                w.writerow([snap.time_index, int(sid), int(lab), *(_fmt(v) for v in row)])

    if isinstance(dest, (str, Path)):
        with open(dest, "w", newline="") as fh:
            _write(fh)
    else:
        _write(dest)


def read_dataset_csv(src: str | Path | Iterable[str], name: str | None = None) -> TemporalDataset:
    if isinstance(src, (str, Path)):
        with open(src, newline="") as fh:
            rows = list(csv.reader(fh))
        name = name or Path(src).stem
    else:
        rows = list(csv.reader(src))
    if not rows:
        raise ValueError("empty dataset file")
    header = rows[0]
    if header[:3] != ["t", "sample_id", "label"] or len(header) < 4:
        raise ValueError(f"unexpected dataset header: {header}")
    body = np.array(rows[1:], dtype=np.float64) if len(rows) > 1 else np.empty((0, len(header)))
    if body.size == 0:
        raise ValueError("dataset file has no rows")
    t = body[:, 0].astype(np.int64)
    snaps = []
    for ti in np.unique(t):
        sel = body[t == ti]
        labels = sel[:, 2].astype(np.int64)
        snaps.append(
            Snapshot(
                int(ti),
                sel[:, 1].astype(np.int64),
                sel[:, 3:],
                None if np.all(labels == UNKNOWN_LABEL) else labels,
            )
        )
    return TemporalDataset(tuple(snaps), name=name or "dataset")


def dataset_from_arrays(
    times: Sequence[int],
    ids: Sequence[np.ndarray],
    coords: Sequence[np.ndarray],
    labels: Sequence[np.ndarray | None] | None = None,
    name: str = "dataset",
) -> TemporalDataset:
    labels = labels if labels is not None else [None] * len(times)
    return TemporalDataset(
        tuple(Snapshot(t, i, x, lab) for t, i, x, lab in zip(times, ids, coords, labels)), name=name
    )
