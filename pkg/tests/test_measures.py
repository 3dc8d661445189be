import math

import numpy as np
import pytest

from covmeasure.geometry import Ball, Box, PredicateRegion
from covmeasure.measures import AffineDensity, GridDensity, Lebesgue, WeightedSamples, mc_measure
from covmeasure.sampling import SeededSampler


def test_full_box_lebesgue_is_exact():
    est = mc_measure(Box([0, 0], [1, 1]), Lebesgue(2), SeededSampler(0), 1000)
    assert est.value == 1.0 and est.std_error == 0.0


def test_unit_disc_area_within_three_sigma():
    disc = PredicateRegion(lambda x: np.sum(x * x, axis=1) <= 1.0, Box([-1, -1], [1, 1]))
    est = mc_measure(disc, Lebesgue(2), SeededSampler(11), 10**6)
    assert abs(est.value - math.pi) <= 3 * est.std_error


def test_zero_weight_samples_have_zero_mass():
    mu = WeightedSamples([[0.1, 0.2], [0.5, 0.5]], [0.0, 0.0])
    assert mc_measure(Ball([0, 0], 2.0), mu, SeededSampler(0), 10).value == 0.0


def test_weighted_samples_sum_exactly():
    mu = WeightedSamples([[0.1], [0.5], [3.0]], [1.0, 2.5, 7.0])
    assert mc_measure(Box([0], [1]), mu, SeededSampler(0), 10) == (3.5, 0.0)


def test_degenerate_bounding_box():
    assert mc_measure(Box([0, 0], [1, 0]), Lebesgue(2), SeededSampler(0), 100) == (0.0, 0.0)


def test_determinism_and_worker_independence():
    region = Ball([0.0, 0.0], 1.0)
    mu = AffineDensity([1.0, 0.5], 2.0)
    runs = [mc_measure(region, mu, SeededSampler(5, chunk_size=1000, workers=w), 20_000) for w in (1, 1, 4)]
    assert runs[0] == runs[1] == runs[2]


def test_box_consistency_over_seeds():
    """Box estimates land within 4 standard errors in at least 99% of seeded runs."""
    region = PredicateRegion(lambda x: np.all(x < 0.6, axis=1), Box([0, 0], [1, 1]))
    hits = 0
    for seed in range(200):
        est = mc_measure(region, Lebesgue(2), SeededSampler(seed), 5000)
        hits += abs(est.value - 0.36) <= 4 * est.std_error
    assert hits >= 198


def test_grid_density_lookup_and_box_mass():
    grid = GridDensity(Box([0, 0], [2, 1]), np.array([[1.0, 2.0], [3.0, 4.0]]))
    np.testing.assert_array_equal(grid.cell_size, [1.0, 0.5])
    assert grid.density([[0.5, 0.25], [1.5, 0.75], [2.0, 1.0], [5.0, 0.0]]).tolist() == [1.0, 4.0, 4.0, 0.0]
    assert grid.total_mass == pytest.approx(5.0)
    assert grid.box_mass(Box([0.5, 0.0], [1.5, 0.5])) == pytest.approx(0.5 * 0.5 * 1 + 0.5 * 0.5 * 3)


def test_grid_density_mc_matches_quadrature():
    grid = GridDensity(Box([0, 0], [1, 1]), np.arange(1.0, 10.0).reshape(3, 3))
    b = Box([0.1, 0.2], [0.8, 0.9])
    est = mc_measure(b, grid, SeededSampler(2), 200_000)
    assert abs(est.value - grid.box_mass(b)) <= 3 * est.std_error


def test_affine_density_support():
    mu = AffineDensity([1.0], 0.0, Box([0], [1]))
    assert mu.density([[0.5], [2.0]]).tolist() == [0.5, 0.0]
