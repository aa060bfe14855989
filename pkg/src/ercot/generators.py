"""Synthetic temporal benchmarks.

Syn1/Syn2 translate one Gaussian cluster per step. Syn3/Syn4 add membership
switches, Syn5/Syn6 add sample removal and insertion, Syn7/Syn8 make one cluster
vanish for two steps. ``bird_flocks`` is a boids simulation with one stray bird
per flock changing flock at every step.
"""

from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass, field

import numpy as np

from .data import ClusterTrack, Snapshot, TemporalDataset

Seed = int | np.random.SeedSequence


@dataclass(frozen=True)
class GaussianClusterSpec:
    mean: tuple[float, ...]
    covariance_scale: float = 0.8
    count: int = 50

    def __post_init__(self) -> None:
        if self.count < 1:
            raise ValueError("cluster count must be >= 1")
        if self.covariance_scale <= 0:
            raise ValueError("covariance_scale must be positive")


@dataclass(frozen=True)
class DriftEvent:
    """At ``time``, ``n_samples`` members of ``from_cluster`` switch to ``to_clusters``.

    With ``revert`` set to the index of an earlier event in the same schedule,
    the samples moved by that event return to their original cluster instead.
    """

    time: int
    n_samples: int = 0
    from_cluster: int = -1
    to_clusters: tuple[int, ...] = ()
    revert: int | None = None


@dataclass(frozen=True)
class ChurnEvent:
    time: int
    remove_per_cluster: int = 0
    insert_per_cluster: int = 0


@dataclass(frozen=True)
class BoidsParams:
    box: float = 5.0
    spacing: float = 9.0
    cruise: tuple[float, float] = (1.0, 0.0)
    cohesion: float = 0.15
    separation: float = 0.15
    separation_radius: float = 0.8
    alignment: float = 0.1
    alignment_radius: float = 3.0
    max_speed: float = 2.5
    max_force: float = 1.5
    noise: float = 0.05
    settle_steps: int = 8


def _rng(seed: Seed) -> np.random.Generator:
    return np.random.default_rng(seed)


def gen_moving_gaussians(
    specs: Sequence[GaussianClusterSpec],
    horizon: int,
    moving_cluster: int,
    step: Sequence[float],
    seed: Seed = 0,
    name: str = "moving_gaussians",
) -> TemporalDataset:
    """Draw every cluster once, then translate ``moving_cluster`` by ``step`` per time."""
    if horizon < 1:
        raise ValueError("horizon must be >= 1")
    if not 0 <= moving_cluster < len(specs):
        raise ValueError(f"moving_cluster {moving_cluster} out of range")
    dim = len(specs[0].mean)
    if any(len(s.mean) != dim for s in specs):
        raise ValueError("cluster means differ in dimensionality")
    step = np.asarray(step, dtype=np.float64)
    if step.shape != (dim,):
        raise ValueError(f"step has dimensionality {step.shape[0] if step.ndim else 0}, data has {dim}")

    rng = _rng(seed)
    blocks, labels = [], []
    for c, spec in enumerate(specs):
        blocks.append(rng.normal(spec.mean, np.sqrt(spec.covariance_scale), size=(spec.count, dim)))
        labels.append(np.full(spec.count, c))
    X1 = np.vstack(blocks)
    y = np.concatenate(labels)
    ids = np.arange(y.size)
    moving = y == moving_cluster

    tracks = {}
    offsets = np.arange(horizon)[:, None] * step[None, :]
    for c, spec in enumerate(specs):
        means = np.tile(np.asarray(spec.mean, dtype=np.float64), (horizon, 1))
        if c == moving_cluster:
            means = means + offsets
        tracks[c] = ClusterTrack(means, spec.covariance_scale)

    snaps = []
    for t in range(1, horizon + 1):
        X = X1.copy()
        X[moving] += (t - 1) * step
        snaps.append(Snapshot(t, ids, X, y.copy()))
    return TemporalDataset(tuple(snaps), name=name, tracks=tracks)


def _effective_labels(snap: Snapshot, override: dict[int, tuple]) -> np.ndarray:
    labels = snap.labels.copy()
    for row, sid in enumerate(snap.ids):
        o = override.get(int(sid))
        if o is not None:
            labels[row] = o[0]
    return labels


def _materialise(snap: Snapshot, override: dict[int, tuple], tracks: dict[int, ClusterTrack]) -> Snapshot:
    X = snap.X.copy()
    labels = snap.labels.copy()
    t = snap.time_index
    for row, sid in enumerate(snap.ids):
        o = override.get(int(sid))
        if o is None:
            continue
        dest, anchor, t0 = o
        labels[row] = dest
        X[row] = anchor + tracks[dest].mean_at(t) - tracks[dest].mean_at(t0)
    return Snapshot(t, snap.ids, X, labels)


def _require_tracks(data: TemporalDataset, clusters: Sequence[int]) -> None:
    missing = [c for c in clusters if c not in data.tracks]
    if missing:
        raise ValueError(f"no generating distribution known for clusters {missing}")


def _check_times(data: TemporalDataset, times: Sequence[int]) -> None:
    valid = {s.time_index for s in data}
    bad = sorted(set(times) - valid)
    if bad:
        raise ValueError(f"events reference unknown times {bad}")


def apply_concept_drift(data: TemporalDataset, events: Sequence[DriftEvent], seed: Seed = 0) -> TemporalDataset:
    """Relabel and relocate samples according to ``events``.

    Moved samples are redrawn from the destination cluster's Gaussian and
    follow that cluster afterwards; a revert event restores the original
    coordinates and labels of an earlier event's samples.
    """
    if not events:
        return data
    _check_times(data, [e.time for e in events])
    for i, e in enumerate(events):
        if e.revert is None:
            _require_tracks(data, [e.from_cluster, *e.to_clusters])
            if not e.to_clusters:
                raise ValueError("a drift event needs destination clusters")
        elif not 0 <= e.revert < i:
            raise ValueError(f"event {i} reverts unknown event {e.revert}")
    rng = _rng(seed)
    override: dict[int, tuple] = {}
    moved: dict[int, np.ndarray] = {}
    by_time: dict[int, list[int]] = {}
    for i, e in enumerate(events):
        by_time.setdefault(e.time, []).append(i)

    snaps = []
    for snap in data:
        if snap.labels is None:
            raise ValueError("concept drift needs labelled snapshots")
        t = snap.time_index
        for i in by_time.get(t, []):
            e = events[i]
            if e.revert is not None:
                for sid in moved.get(e.revert, ()):
                    override.pop(int(sid), None)
                continue
            labels = _effective_labels(snap, override)
            members = snap.ids[labels == e.from_cluster]
            if e.n_samples > members.size:
                raise ValueError(
                    f"t={t}: cannot move {e.n_samples} samples, cluster {e.from_cluster} has {members.size}"
                )
            chosen = np.sort(rng.choice(members, size=e.n_samples, replace=False))
            dests = np.resize(np.asarray(e.to_clusters), e.n_samples)
            rng.shuffle(dests)
            for sid, dest in zip(chosen, dests):
                tr = data.tracks[int(dest)]
                point = rng.normal(tr.mean_at(t), np.sqrt(tr.scale))
                override[int(sid)] = (int(dest), point, t)
            moved[i] = chosen
        snaps.append(_materialise(snap, override, data.tracks))
    return TemporalDataset(tuple(snaps), name=data.name, tracks=data.tracks)


def apply_sample_churn(data: TemporalDataset, events: Sequence[ChurnEvent], seed: Seed = 0) -> TemporalDataset:
    """Remove random members of every cluster or insert fresh ones at event times.

    Removed ids never come back; inserted samples receive new ids and follow
    their cluster's motion.
    """
    if not events:
        return data
    _check_times(data, [e.time for e in events])
    clusters = sorted(data.tracks)
    if not clusters:
        raise ValueError("sample churn needs cluster generating distributions")
    rng = _rng(seed)
    next_id = max(int(s.ids.max()) for s in data if s.n_samples) + 1
    removed: set[int] = set()
    inserted: list[tuple[int, int, np.ndarray, int]] = []
    by_time: dict[int, list[ChurnEvent]] = {}
    for e in events:
        by_time.setdefault(e.time, []).append(e)

    snaps = []
    for snap in data:
        t = snap.time_index

        def current() -> Snapshot:
            keep = np.array([int(i) not in removed for i in snap.ids], dtype=bool)
            ids = [snap.ids[keep]]
            X = [snap.X[keep]]
            labels = [snap.labels[keep]]
            live = [s for s in inserted if s[0] not in removed]
            if live:
                ids.append(np.array([s[0] for s in live]))
                X.append(np.array([a + data.tracks[c].mean_at(t) - data.tracks[c].mean_at(t0) for _, c, a, t0 in live]))
                labels.append(np.array([s[1] for s in live]))
            return Snapshot(t, np.concatenate(ids), np.vstack(X), np.concatenate(labels))

        for e in by_time.get(t, []):
            if e.remove_per_cluster:
                cur = current()
                for c in clusters:
                    members = cur.ids[cur.labels == c]
                    if e.remove_per_cluster >= members.size:
                        raise ValueError(
                            f"t={t}: removing {e.remove_per_cluster} would empty cluster {c} ({members.size} samples)"
                        )
                    removed.update(int(i) for i in rng.choice(members, size=e.remove_per_cluster, replace=False))
            for c in clusters:
                tr = data.tracks[c]
                for _ in range(e.insert_per_cluster):
                    inserted.append((next_id, c, rng.normal(tr.mean_at(t), np.sqrt(tr.scale)), t))
                    next_id += 1
        snaps.append(current())
    return TemporalDataset(tuple(snaps), name=data.name, tracks=data.tracks)


def apply_cluster_disappearance(
    data: TemporalDataset, events: Sequence[tuple[int, int]], seed: Seed = 0
) -> TemporalDataset:
    """At each ``(time, cluster)`` event, reassign all members of ``cluster``.

    Members are spread evenly over the remaining clusters and redrawn from
    their Gaussians. A sample relocated at consecutive event times keeps its
    destination and draw.
    """
    if not events:
        return data
    _check_times(data, [t for t, _ in events])
    _require_tracks(data, [c for _, c in events])
    rng = _rng(seed)
    ev = {}
    for t, c in events:
        ev.setdefault(t, []).append(c)
    times = [s.time_index for s in data]
    prev_relocated: dict[int, tuple] = {}
    snaps = []
    for k, snap in enumerate(data):
        t = snap.time_index
        relocated: dict[int, tuple] = {}
        labels = snap.labels
        for c in ev.get(t, []):
            remaining = [r for r in sorted(data.tracks) if r != c and np.any(labels == r)]
            if not remaining:
                raise ValueError(f"t={t}: no cluster left to absorb cluster {c}")
            members = snap.ids[labels == c]
            fresh = [int(s) for s in members if int(s) not in prev_relocated or prev_relocated[int(s)][3] != c]
            dests = np.resize(np.asarray(remaining), len(fresh))
            rng.shuffle(dests)
            for sid, dest in zip(fresh, dests):
                tr = data.tracks[int(dest)]
                relocated[sid] = (int(dest), rng.normal(tr.mean_at(t), np.sqrt(tr.scale)), t, c)
            for sid in members:
                sid = int(sid)
                if sid not in relocated:
                    relocated[sid] = prev_relocated[sid]
        override = {sid: v[:3] for sid, v in relocated.items()}
        snaps.append(_materialise(snap, override, data.tracks))
        # chains only continue across adjacent snapshots
        prev_relocated = relocated if k + 1 < len(times) else {}
    return TemporalDataset(tuple(snaps), name=data.name, tracks=data.tracks)


def gen_bird_flocks(
    n_flocks: int = 4,
    birds_per_flock: int = 25,
    horizon: int = 30,
    seed: Seed = 0,
    params: BoidsParams = BoidsParams(),
    name: str = "bird_flocks",
) -> TemporalDataset:
    """Boids flocks flying along parallel paths with one stray bird per flock per step.

    Birds steer towards their flock's centre, away from close birds of any
    flock, and towards the mean velocity of nearby flock mates. Each step the
    settled bird farthest from its flock centre joins a random other flock.
    """
    if n_flocks < 2:
        raise ValueError("need at least two flocks")
    rng = _rng(seed)
    p = params
    n = n_flocks * birds_per_flock
    labels = np.repeat(np.arange(n_flocks), birds_per_flock)
    pos = rng.uniform(0.0, p.box, size=(n, 2))
    pos[:, 1] += labels * p.spacing
    cruise = np.asarray(p.cruise, dtype=np.float64)
    vel = cruise + rng.normal(0.0, p.noise, size=(n, 2))
    joined = np.full(n, -p.settle_steps)
    ids = np.arange(n)
    snaps = [Snapshot(1, ids, pos.copy(), labels.copy())]

    for t in range(2, horizon + 1):
        centres = np.array([pos[labels == f].mean(axis=0) for f in range(n_flocks)])
        new_labels = labels.copy()
        for f in range(n_flocks):
            members = np.flatnonzero(labels == f)
            if members.size < 2:
                continue
            settled = members[t - joined[members] >= p.settle_steps]
            pool = settled if settled.size else members
            dist = np.linalg.norm(pos[pool] - centres[f], axis=1)
            stray = pool[np.argmax(dist)]
            others = [g for g in range(n_flocks) if g != f]
            new_labels[stray] = others[rng.integers(len(others))]
            joined[stray] = t
        labels = new_labels
        # steer towards settled members only so arriving strays do not drag flocks together
        settled = t - joined >= p.settle_steps
        for f in range(n_flocks):
            core = (labels == f) & settled
            if np.any(core):
                centres[f] = pos[core].mean(axis=0)

        diff = pos[:, None, :] - pos[None, :, :]
        dist = np.linalg.norm(diff, axis=2)
        np.fill_diagonal(dist, np.inf)
        acc = p.cohesion * (centres[labels] - pos)
        close = dist < p.separation_radius
        acc += p.separation * np.where(close[:, :, None], diff / np.maximum(dist, 1e-9)[:, :, None] ** 2, 0.0).sum(axis=1)
        mates = (dist < p.alignment_radius) & (labels[:, None] == labels[None, :])
        n_mates = mates.sum(axis=1)
        has = n_mates > 0
        mean_vel = np.where(has[:, None], (mates @ vel) / np.maximum(n_mates, 1)[:, None], vel)
        acc += p.alignment * (mean_vel - vel)
        acc += 0.05 * (cruise - vel)
        norm = np.linalg.norm(acc, axis=1, keepdims=True)
        acc = np.where(norm > p.max_force, acc * p.max_force / np.maximum(norm, 1e-12), acc)
        vel = vel + acc + rng.normal(0.0, p.noise, size=vel.shape)
        speed = np.linalg.norm(vel, axis=1, keepdims=True)
        vel = np.where(speed > p.max_speed, vel * p.max_speed / speed, vel)
        pos = pos + vel
        snaps.append(Snapshot(t, ids, pos.copy(), labels.copy()))
    return TemporalDataset(tuple(snaps), name=name)


# --- named benchmark configurations -----------------------------------------

SYN1_SPECS = tuple(GaussianClusterSpec(m, 0.8, 50) for m in [(2, 2), (-2, 2), (-2, -2), (2, -2)])
SYN2_SPECS = tuple(
    GaussianClusterSpec(m, 0.8, 50) for m in [(2, 2, 2, 2), (-2, -2, 2, 2), (-2, -2, -2, -2), (2, 2, -2, -2)]
)
BOTTOM_LEFT = 2
HORIZON = 10

DRIFT_SCHEDULE = (
    DriftEvent(4, 15, BOTTOM_LEFT, (0, 1, 3)),
    DriftEvent(5, 15, BOTTOM_LEFT, (0, 1, 3)),
    DriftEvent(6, revert=1),
)
CHURN_SCHEDULE = (
    ChurnEvent(4, remove_per_cluster=10),
    ChurnEvent(6, insert_per_cluster=10),
    ChurnEvent(8, remove_per_cluster=10),
)
DISAPPEAR_SCHEDULE = ((5, BOTTOM_LEFT), (6, BOTTOM_LEFT))


@dataclass(frozen=True)
class _Recipe:
    base: str  # "2d" or "4d"
    drift: bool = False
    churn: bool = False
    disappear: bool = False
    extra: dict = field(default_factory=dict)


_RECIPES = {
    "syn1": _Recipe("2d"),
    "syn2": _Recipe("4d"),
    "syn3": _Recipe("2d", drift=True),
    "syn4": _Recipe("4d", drift=True),
    "syn5": _Recipe("2d", churn=True),
    "syn6": _Recipe("2d", drift=True, churn=True),
    "syn7": _Recipe("2d", drift=True, disappear=True),
    "syn8": _Recipe("4d", drift=True, disappear=True),
}

DATASET_NAMES = tuple(_RECIPES) + ("bird_flocks",)


def make_dataset(name: str, seed: int = 0) -> TemporalDataset:
    """Build a named benchmark. Variants sharing a base reuse its draw for a given seed."""
    key = name.lower()
    if key == "bird_flocks":
        return gen_bird_flocks(seed=seed)
    if key not in _RECIPES:
        raise ValueError(f"unknown dataset {name!r}; choose from {', '.join(DATASET_NAMES)}")
    recipe = _RECIPES[key]
    s_base, s_drift, s_churn, s_gone = np.random.SeedSequence(seed).spawn(4)
    if recipe.base == "2d":
        data = gen_moving_gaussians(SYN1_SPECS, HORIZON, BOTTOM_LEFT, (0.6, 0.6), s_base)
    else:
        data = gen_moving_gaussians(SYN2_SPECS, HORIZON, BOTTOM_LEFT, (0.6,) * 4, s_base)
    if recipe.drift:
        data = apply_concept_drift(data, DRIFT_SCHEDULE, s_drift)
    if recipe.churn:
        data = apply_sample_churn(data, CHURN_SCHEDULE, s_churn)
    if recipe.disappear:
        data = apply_cluster_disappearance(data, DISAPPEAR_SCHEDULE, s_gone)
    return data.renamed(key)
