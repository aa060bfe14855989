import numpy as np
import pytest
from scipy import stats

from ercot.operators import (
    crossover_population,
    mutate_population,
    polynomial_cdf,
    polynomial_perturbation,
    single_point_crossover,
)


def test_single_point_split():
    p1, p2 = np.arange(6.0), -np.arange(6.0)
    c1, c2 = single_point_crossover(p1, p2, 2)
    assert c1.tolist() == [0, 1, -2, -3, -4, -5]
    assert c2.tolist() == [0, -1, 2, 3, 4, 5]
    with pytest.raises(ValueError):
        single_point_crossover(p1, p2, 0)
    with pytest.raises(ValueError):
        single_point_crossover(p1, p2, 6)


def test_population_crossover_matches_pairwise_definition():
    rng = np.random.default_rng(0)
    P = rng.random((10, 7))
    out = crossover_population(P, 1.0, np.random.default_rng(5))
    probe = np.random.default_rng(5)
    probe.random(5)
    points = probe.integers(1, 7, size=5)
    for i, k in enumerate(points):
        c1, c2 = single_point_crossover(P[2 * i], P[2 * i + 1], int(k))
        np.testing.assert_array_equal(out[2 * i], c1)
        np.testing.assert_array_equal(out[2 * i + 1], c2)


def test_zero_rates_copy_parents():
    rng = np.random.default_rng(1)
    P = rng.random((8, 5))
    np.testing.assert_array_equal(crossover_population(P, 0.0, rng), P)
    np.testing.assert_array_equal(mutate_population(P, np.zeros(5), np.ones(5), 0.0, 20.0, rng), P)


def test_perturbation_cdf_within_kolmogorov_distance():
    rng = np.random.default_rng(2024)
    d = polynomial_perturbation(rng.random(100_000), 20.0)
    ks = stats.kstest(d, lambda x: polynomial_cdf(x, 20.0))
    assert ks.statistic <= 0.01
    assert d.min() >= -1.0 and d.max() <= 1.0


def test_perturbation_is_symmetric_and_centred():
    u = np.linspace(0.0, 1.0, 1001)[:-1]
    d = polynomial_perturbation(u, 20.0)
    assert polynomial_perturbation(np.array([0.5]), 20.0)[0] == 0.0
    assert np.all(np.diff(d) >= 0)
    np.testing.assert_allclose(polynomial_cdf(d, 20.0), u, atol=1e-12)


def test_mutation_rates_and_bounds():
    rng = np.random.default_rng(3)
    L = 20
    G = np.full((4000, L), 0.5)
    out = mutate_population(G, np.zeros(L), np.ones(L), 0.9, 20.0, rng)
    assert np.all((out >= 0) & (out <= 1))
    changed = out != G
    frac_genes = changed.mean()
    assert frac_genes == pytest.approx(0.9 / L, rel=0.05)
    untouched_rows = (~changed.any(axis=1)).mean()
    # a row is untouched if it is not selected, or selected with no gene hit
    assert untouched_rows == pytest.approx(0.1 + 0.9 * (1 - 1 / L) ** L, abs=0.02)


def test_mutation_step_scales_with_range():
    rng = np.random.default_rng(4)
    G = np.zeros((2000, 2))
    lower, upper = np.array([-1.0, -100.0]), np.array([1.0, 100.0])
    out = mutate_population(G, lower, upper, 1.0, 20.0, rng)
    spread = np.abs(out).max(axis=0)
    assert spread[1] > 50 * spread[0]
