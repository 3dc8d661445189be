import numpy as np
import pytest

from covmeasure.covering import (DISJOINT_TOL, BallFamily, PackingResult, besicovitch_partition,
                                 estimate_besicovitch_constant, measure_almost_cover, vitali_select)
from covmeasure.geometry import Ball, Box, Norm
from covmeasure.measures import Lebesgue
from covmeasure.sampling import SeededSampler

from oracles import first_fit_replay, intervals_overlap, max_spaced_points_1d


def _pairwise_disjoint(family, idx):
    return all(family.norm(family.centers[i] - family.centers[j]) > family.radii[i] + family.radii[j] - DISJOINT_TOL
               for k, i in enumerate(idx) for j in idx[k + 1 :])


def test_vitali_single_ball():
    assert vitali_select(BallFamily([[0.0, 0.0]], [1.0])) == [0]


def test_vitali_two_disjoint_balls():
    assert sorted(vitali_select(BallFamily([[0.0, 0.0], [3.0, 0.0]], [1.0, 1.0]))) == [0, 1]


def test_vitali_nested_balls():
    family = BallFamily([[0.1, 0.0], [0.0, 0.0]], [0.2, 1.0])
    assert vitali_select(family) == [1]
    pts = family.ball(0).center + 0.2 * Norm.EUCLIDEAN.sample_unit_ball(np.random.default_rng(0), 1000, 2)
    assert family.covered(pts, [1], factor=5.0).all()


def test_vitali_empty_family():
    assert vitali_select(BallFamily(np.empty((0, 2)), np.empty(0))) == []


def test_vitali_ties_by_index():
    family = BallFamily([[0.0], [0.5], [1.0]], [0.3, 0.3, 0.3])
    assert vitali_select(family) == [0, 2]


def test_besicovitch_well_separated():
    family = BallFamily([[0.0, 0.0], [5.0, 0.0], [0.0, 5.0]], [1.0, 1.0, 1.0])
    assert besicovitch_partition(family).families == [[0, 1, 2]]


def test_three_overlapping_intervals_plain_first_fit():
    centers, radii = [0.0, 0.5, 1.0], [0.6] * 3
    assert all(intervals_overlap(centers[i], 0.6, centers[j], 0.6) for i in range(3) for j in range(i))
    partition = besicovitch_partition(BallFamily(np.array(centers)[:, None], radii), select_centers=False)
    assert len(partition) == 3


def test_three_overlapping_intervals_with_center_selection():
    partition = besicovitch_partition(BallFamily([[0.0], [0.5], [1.0]], [0.6] * 3))
    assert partition.families == [[0], [2]]


def test_hexagon_matches_first_fit_oracle():
    angles = np.arange(6) * np.pi / 3
    centers = np.vstack([[0.0, 0.0], np.c_[np.cos(angles), np.sin(angles)]])
    family = BallFamily(centers, np.ones(7))
    dist = lambda a, b: float(np.hypot(*(np.asarray(a) - np.asarray(b))))
    for select in (True, False):
        got = besicovitch_partition(family, select_centers=select).families
        assert got == first_fit_replay(centers.tolist(), [1.0] * 7, dist, select)
    lower_bound = estimate_besicovitch_constant(2, Norm.EUCLIDEAN, 2000, SeededSampler(0)).count
    assert len(besicovitch_partition(family)) == 1
    assert len(besicovitch_partition(family, select_centers=False)) == 4 <= lower_bound


def test_one_ball_per_center_keeps_largest():
    family = BallFamily([[0.0], [0.0], [3.0]], [0.5, 1.0, 0.2])
    placed = [i for fam in besicovitch_partition(family).families for i in fam]
    assert sorted(placed) == [1, 2]


def _random_family(rng, d, m):
    centers = rng.uniform(-2, 2, (m, d))
    radii = rng.uniform(0.05, 1.0, m) ** 2
    return BallFamily(centers, radii, Norm.SUP if rng.random() < 0.3 else Norm.EUCLIDEAN)


@pytest.mark.parametrize("seed", range(25))
def test_random_family_invariants(seed):
    rng = np.random.default_rng(seed)
    d = 1 + seed % 2
    family = _random_family(rng, d, int(rng.integers(5, 60)))
    sel = vitali_select(family)
    assert _pairwise_disjoint(family, sel)
    pts = family.sample_union(rng, 2000)
    assert family.covered(pts, sel, factor=5.0).all()
    partition = besicovitch_partition(family)
    assert all(_pairwise_disjoint(family, fam) for fam in partition.families)
    flat = [i for fam in partition.families for i in fam]
    assert len(flat) == len(set(flat))
    assert family.covered(family.centers, flat).all()
    if d == 1:
        assert len(partition) <= 5


def test_almost_cover_single_ball():
    ball = Ball([0.0, 0.0], 1.0)
    res = measure_almost_cover(BallFamily([[0.0, 0.0]], [1.0]), ball, Lebesgue(2), 0.9, SeededSampler(0), 20_000)
    assert res.selected == [0] and res.covered_fraction == 1.0 and not res.stagnated


def test_almost_cover_fine_interval_family():
    centers = np.round(np.arange(0, 101) * 0.01, 12)[:, None]
    family = BallFamily(centers, np.full(len(centers), 0.05))
    res = measure_almost_cover(family, Box([0.0], [1.0]), Lebesgue(1), 0.9, SeededSampler(1), 50_000)
    assert res.covered_fraction >= 0.9
    assert _pairwise_disjoint(family, res.selected)
    assert res.history == sorted(res.history)
    # interval arithmetic: union length of the selected intervals inside [0, 1]
    spans = sorted((max(0.0, c - 0.05), min(1.0, c + 0.05)) for c in centers[res.selected, 0])
    assert sum(b - a for a, b in spans) >= 0.9


def test_almost_cover_half_covered_region_stagnates():
    centers = np.round(np.arange(4, 47) * 0.01, 12)[:, None]
    family = BallFamily(centers, np.full(len(centers), 0.04))
    res = measure_almost_cover(family, Box([0.0], [1.0]), Lebesgue(1), 0.5, SeededSampler(2), 50_000)
    assert res.stagnated
    assert 0.4 <= res.covered_fraction < 0.5
    assert _pairwise_disjoint(family, res.selected)
    assert res.history == sorted(res.history)


def test_packing_1d_is_exactly_five():
    assert max_spaced_points_1d(-2.0, 2.0) == 5
    for norm in Norm:
        res = estimate_besicovitch_constant(1, norm, 1, SeededSampler(0))
        assert res.count == 5 and res.is_valid()


def test_packing_small_budget_is_valid():
    res = estimate_besicovitch_constant(2, Norm.EUCLIDEAN, 1, SeededSampler(0))
    assert res.count >= 1 and res.is_valid()


def test_packing_is_monotone_in_budget():
    counts = [estimate_besicovitch_constant(2, Norm.SUP, b, SeededSampler(9)).count for b in (1, 50, 400, 2000)]
    assert counts == sorted(counts)


def test_packing_result_validation():
    assert not PackingResult(np.array([[0.0, 0.0], [0.5, 0.0]]), Norm.EUCLIDEAN).is_valid()
    assert not PackingResult(np.array([[2.5, 0.0]]), Norm.EUCLIDEAN).is_valid()
    assert PackingResult(np.array([[2.0, 2.0], [-2.0, 2.0]]), Norm.SUP).is_valid()
