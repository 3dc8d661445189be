import numpy as np
import pytest

from covmeasure.covering import BallFamily
from covmeasure.errors import InvalidParameterError
from covmeasure.geometry import Ball, Box, HalfSpace, Intersection, Norm
from covmeasure.measures import AffineDensity, GridDensity, Lebesgue, WeightedSamples
from covmeasure.serialization import (family_from_json, family_to_json, matrix_from_json, matrix_to_json,
                                      measure_from_json, measure_to_json, region_from_json, region_to_json)

REGIONS = [
    Box([0.0, -1.0], [2.0, 1.0]),
    Ball([0.5, 0.5], 0.25, Norm.SUP),
    HalfSpace([1.0, 1.0], 0.5, Box([0.0, 0.0], [1.0, 1.0])),
    Intersection((Box([0.0, 0.0], [1.0, 1.0]), Ball([0.0, 0.0], 1.0))),
]


@pytest.mark.parametrize("region", REGIONS, ids=lambda r: type(r).__name__)
def test_region_round_trip(region):
    back = region_from_json(region_to_json(region))
    pts = np.random.default_rng(0).uniform(-1.5, 2.5, size=(500, region.dim))
    assert region_to_json(back) == region_to_json(region)
    assert np.array_equal(back.contains(pts), region.contains(pts))


MEASURES = [
    Lebesgue(2, 3.0),
    AffineDensity([1.0, 2.0], 0.5, Box([0.0, 0.0], [1.0, 1.0])),
    GridDensity(Box([0.0, 0.0], [1.0, 2.0]), np.arange(8.0).reshape(2, 4)),
    WeightedSamples([[0.0, 0.0], [1.0, 1.0]], [0.25, 0.75]),
]


@pytest.mark.parametrize("mu", MEASURES, ids=lambda m: type(m).__name__)
def test_measure_round_trip(mu):
    assert measure_to_json(measure_from_json(measure_to_json(mu))) == measure_to_json(mu)


def test_grid_cell_size_is_checked():
    obj = measure_to_json(MEASURES[2])
    obj["cell_size"] = [0.3, 0.3]
    with pytest.raises(InvalidParameterError):
        measure_from_json(obj)


def test_family_round_trip_and_bare_array():
    fam = BallFamily(np.array([[0.0, 1.0], [2.0, 3.0]]), np.array([0.5, 1.5]), Norm.SUP)
    back = family_from_json(family_to_json(fam))
    assert back.norm is Norm.SUP
    assert np.array_equal(back.centers, fam.centers) and np.array_equal(back.radii, fam.radii)
    bare = family_from_json([{"center": 0.5, "radius": 1}])
    assert bare.centers.shape == (1, 1) and bare.norm is Norm.EUCLIDEAN


@pytest.mark.parametrize("bad", [[{"center": [0.0]}], [{"center": [0.0], "radius": 1}, {"center": [0, 1], "radius": 1}]])
def test_family_rejects_malformed_balls(bad):
    with pytest.raises(InvalidParameterError):
        family_from_json(bad)


def test_unknown_kinds():
    with pytest.raises(InvalidParameterError):
        region_from_json({"kind": "torus"})
    with pytest.raises(InvalidParameterError):
        measure_from_json({"kind": "cantor"})


def test_matrix_round_trip():
    m = [[1.0, 2.5], [-3.0, 4.0]]
    assert matrix_to_json(matrix_from_json(m)) == m
