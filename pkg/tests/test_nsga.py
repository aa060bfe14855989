import numpy as np
import pytest

from ercot import kernels
from ercot.nsga import (
    MixedFitnessError,
    Population,
    binary_tournament,
    crowding_by_front,
    crowding_distance,
    environmental_selection,
    knee_point,
    nondominated_sort,
    objective_matrix,
    select_indices,
)
from ercot.objectives import ObjectiveVector


def naive_fronts(F: np.ndarray) -> np.ndarray:
    """Peel fronts by repeated O(N^2) pairwise checks."""
    n = len(F)
    ranks = np.zeros(n, dtype=int)
    left = set(range(n))
    level = 1
    while left:
        front = [
            i
            for i in left
            if not any(all(F[j] <= F[i]) and any(F[j] < F[i]) for j in left if j != i)
        ]
        for i in front:
            ranks[i] = level
        left -= set(front)
        level += 1
    return ranks


def pop(F, accumulated=False) -> Population:
    F = np.asarray(F, dtype=float)
    return Population(np.arange(len(F), dtype=float)[:, None], F, 2, accumulated)


@pytest.mark.parametrize("backend", ["python", "cython"])
def test_sort_matches_naive_dominance(backend):
    if backend == "cython" and not kernels.compiled_available():
        pytest.skip("compiled kernels not built")
    before = kernels.BACKEND
    kernels.use_backend(backend)
    try:
        rng = np.random.default_rng(0)
        for k in range(100):
            F = rng.random((50, 2)) if k % 2 else rng.integers(0, 6, size=(50, 2)).astype(float)
            np.testing.assert_array_equal(nondominated_sort(F), naive_fronts(F))
    finally:
        kernels.use_backend(before)


@pytest.mark.parametrize("backend", ["python", "cython"])
def test_sort_three_objectives(backend):
    if backend == "cython" and not kernels.compiled_available():
        pytest.skip("compiled kernels not built")
    before = kernels.BACKEND
    kernels.use_backend(backend)
    try:
        rng = np.random.default_rng(1)
        for _ in range(30):
            F = rng.integers(0, 4, size=(40, 3)).astype(float)
            np.testing.assert_array_equal(nondominated_sort(F), naive_fronts(F))
    finally:
        kernels.use_backend(before)


def test_sort_small_cases():
    assert nondominated_sort(np.array([[1.0, 2.0]])).tolist() == [1]
    assert nondominated_sort(np.array([[1.0, 1.0], [2.0, 2.0]])).tolist() == [1, 2]
    assert nondominated_sort(np.array([[1.0, 1.0], [1.0, 1.0]])).tolist() == [1, 1]
    assert nondominated_sort(np.empty((0, 2))).tolist() == []


def test_mixed_flags_rejected():
    with pytest.raises(MixedFitnessError):
        objective_matrix([ObjectiveVector(1, 1), ObjectiveVector(2, 2, accumulated=True)])
    with pytest.raises(MixedFitnessError):
        pop([[1, 1]]).union(pop([[2, 2]], accumulated=True))


def test_crowding_distance():
    F = np.array([[0.0, 4.0], [1.0, 2.0], [3.0, 1.0], [4.0, 0.0]])
    d = crowding_distance(F)
    assert np.isinf(d[0]) and np.isinf(d[3])
    assert d[1] == pytest.approx(3 / 4 + 3 / 4)
    assert d[2] == pytest.approx(3 / 4 + 2 / 4)
    assert np.all(np.isinf(crowding_distance(F[:2])))


@pytest.mark.parametrize("seed", range(30))
def test_front_wise_crowding_matches_per_front(seed):
    rng = np.random.default_rng(seed)
    F = rng.integers(0, 8, size=(60, 2)).astype(float) if seed % 2 else rng.random((60, 2))
    ranks = nondominated_sort(F)
    expected = np.zeros(len(F))
    for r in np.unique(ranks):
        idx = np.flatnonzero(ranks == r)
        expected[idx] = crowding_distance(F[idx])
    np.testing.assert_array_equal(crowding_by_front(F, ranks), expected)


def reference_truncation(F: np.ndarray, n: int) -> list[int]:
    """Fill fronts in order, then take the most crowded-apart members of the
    splitting front, ties by index."""
    ranks = naive_fronts(F)
    chosen: list[int] = []
    for r in range(1, ranks.max() + 1):
        idx = [i for i in range(len(F)) if ranks[i] == r]
        if len(chosen) + len(idx) <= n:
            chosen += idx
            continue
        sub = F[idx]
        dist = [0.0] * len(idx)
        for k in range(F.shape[1]):
            order = sorted(range(len(idx)), key=lambda j: (sub[j, k], j))
            lo, hi = sub[order[0], k], sub[order[-1], k]
            dist[order[0]] = dist[order[-1]] = float("inf")
            for pos in range(1, len(order) - 1):
                if hi > lo:
                    dist[order[pos]] += (sub[order[pos + 1], k] - sub[order[pos - 1], k]) / (hi - lo)
        best = sorted(range(len(idx)), key=lambda j: (-dist[j], j))
        chosen += [idx[j] for j in best[: n - len(chosen)]]
        break
    return chosen


@pytest.mark.parametrize("seed", range(30))
def test_selection_matches_reference(seed):
    rng = np.random.default_rng(seed)
    F = rng.random((20, 2))
    assert sorted(select_indices(F, 10).tolist()) == sorted(reference_truncation(F, 10))


def test_selection_keeps_dominating_parents():
    parents = pop([[0, 3], [1, 2], [2, 1], [3, 0]])
    offspring = pop([[5, 5], [6, 4], [4, 6], [7, 7]])
    out = environmental_selection(parents, offspring)
    np.testing.assert_array_equal(out.F, parents.F)


def test_selection_exact_front():
    F = [[0, 3], [1, 2], [2, 1], [3, 0], [4, 4], [5, 5]]
    out = environmental_selection(pop(F[:3]), pop(F[3:]), 4)
    assert sorted(map(tuple, out.F.tolist())) == sorted(map(tuple, np.array(F[:4], dtype=float).tolist()))


def test_tournament_prefers_rank_then_crowding():
    ranks = np.array([1, 2, 1])
    crowd = np.array([0.5, np.inf, 2.0])
    winners = binary_tournament(ranks, crowd, 2000, np.random.default_rng(0))
    counts = np.bincount(winners, minlength=3)
    # index 1 wins only against itself; index 2 beats 0 on crowding
    assert counts[1] < counts[0] < counts[2]


def test_knee_examples():
    assert knee_point(np.array([[0.0, 1.0], [1.0, 0.0], [0.2, 0.2]])) == 2
    assert knee_point(np.array([[3.0, 3.0]])) == 0
    assert knee_point(np.array([[2.0, 1.0], [1.0, 2.0]])) == 1


def test_knee_tie_goes_to_lower_compactness():
    F = np.array([[0.0, 1.0], [1.0, 0.0], [0.3, 0.3], [0.2, 0.4]])
    # (0.3,0.3) and (0.2,0.4) lie on the same parallel to the extreme line
    assert knee_point(F) == 3


@pytest.mark.parametrize("seed", range(20))
def test_knee_matches_distance_enumeration(seed):
    rng = np.random.default_rng(seed)
    x = np.sort(rng.random(30))
    y = (1 - x) ** rng.uniform(1.5, 4) + 0.01 * rng.random(30)
    F = np.column_stack([x * rng.uniform(1, 100), y * rng.uniform(1, 100)])
    F = F[nondominated_sort(F) == 1]
    Z = (F - F.min(axis=0)) / (F.max(axis=0) - F.min(axis=0))
    a = Z[np.argmin(Z[:, 0])]
    b = Z[np.argmin(Z[:, 1])]
    u = b - a
    dist = [abs(u[0] * (z - a)[1] - u[1] * (z - a)[0]) / np.hypot(*u) for z in Z]
    assert knee_point(F) == int(np.argmax(dist))
