import numpy as np
import pytest

from covmeasure.geometry import Box, Norm
from covmeasure.linalg import (Transvection, ball_volume_scaling, determinant, linear_image_measure_check,
                               transvection_decompose)
from covmeasure.sampling import SeededSampler

from oracles import cofactor_det


@pytest.mark.parametrize("d", [1, 2, 5])
def test_identity_determinant(d):
    assert determinant(np.eye(d)) == 1.0


def test_diagonal_determinant():
    assert determinant(np.diag([2.0, 3.0])) == 6.0


def test_determinant_matches_cofactor_oracle():
    rng = np.random.default_rng(0)
    for _ in range(50):
        m = rng.uniform(-1, 1, (3, 3))
        assert determinant(m) == pytest.approx(cofactor_det(m), abs=1e-12)


def test_singular_determinant_is_zero():
    assert abs(determinant([[1.0, 2.0], [2.0, 4.0]])) < 1e-12


def test_determinant_is_multiplicative():
    rng = np.random.default_rng(1)
    for d in range(1, 6):
        for _ in range(20):
            a, b = rng.normal(size=(d, d)), rng.normal(size=(d, d))
            assert determinant(a @ b) == pytest.approx(determinant(a) * determinant(b), rel=1e-8)


def test_identity_decomposes_trivially():
    dec = transvection_decompose(np.eye(3))
    assert dec.left == [] and dec.right == [] and dec.diag == [1.0, 1.0, 1.0]


def test_shear_is_one_transvection():
    c = 2.5
    dec = transvection_decompose([[1.0, c], [0.0, 1.0]])
    assert dec.left + dec.right == [Transvection(0, 1, c)]
    assert dec.diag == [1.0, 1.0]


def test_random_4x4_roundtrip():
    m = np.random.default_rng(2).uniform(-1, 1, (4, 4))
    dec = transvection_decompose(m)
    assert np.linalg.norm(dec.reconstruct() - m) <= 1e-10
    assert np.prod(dec.diag) == pytest.approx(determinant(m), rel=1e-8)


@pytest.mark.parametrize("m", [
    [[1.0, 0.0], [1.0, 0.0]],
    [[0.0, 0.0], [0.0, 0.0]],
    [[0.0, 1.0], [0.0, 0.0]],
    [[1.0, 2.0, 3.0], [2.0, 4.0, 6.0], [1.0, 0.0, 1.0]],
])
def test_singular_decomposition_has_zero_diagonal(m):
    dec = transvection_decompose(m)
    assert 0.0 in dec.diag
    assert np.linalg.norm(dec.reconstruct() - np.array(m)) <= 1e-10


def test_permutation_needs_no_permutation_factor():
    m = np.array([[0.0, 1.0], [1.0, 0.0]])
    dec = transvection_decompose(m)
    np.testing.assert_allclose(dec.reconstruct(), m, atol=1e-15)
    assert np.prod(dec.diag) == pytest.approx(-1.0)


def test_multipliers_bounded_by_pivot_choice():
    m = np.array([[1e-8, 1.0], [1.0, 1.0]])
    dec = transvection_decompose(m)
    assert np.linalg.norm(dec.reconstruct() - m) <= 1e-14


def test_transvections_have_unit_determinant():
    rng = np.random.default_rng(3)
    for d in range(2, 5):
        for _ in range(10):
            dec = transvection_decompose(rng.normal(size=(d, d)))
            for t in dec.left + dec.right:
                assert cofactor_det(t.matrix(d)) == 1.0


def test_transvection_rejects_diagonal_position():
    with pytest.raises(ValueError):
        Transvection(1, 1, 2.0)


def test_linear_image_of_diagonal():
    ratio, abs_det = linear_image_measure_check(np.diag([2.0, 3.0]), Box([0, 0], [1, 1]), SeededSampler(0), 10**4)
    assert abs_det == 6.0
    assert ratio == pytest.approx(6.0)  # the image fills its bounding box


def test_linear_image_of_shear_preserves_area():
    ratio, abs_det = linear_image_measure_check([[1.0, 1.0], [0.0, 1.0]], Box([0, 0], [1, 1]), SeededSampler(0), 10**5)
    assert abs_det == 1.0
    assert ratio == pytest.approx(1.0, rel=0.02)


def test_linear_image_of_singular_map():
    assert linear_image_measure_check([[1.0, 0.0], [1.0, 0.0]], Box([0, 0], [1, 1]), SeededSampler(0), 10**4) == (0.0, 0.0)


def test_linear_image_needs_enough_samples():
    with pytest.raises(ValueError):
        linear_image_measure_check(np.eye(2), Box([0, 0], [1, 1]), SeededSampler(0), 100)


@pytest.mark.parametrize("d, norm, radii, expected", [
    (1, Norm.EUCLIDEAN, (1.0, 2.0), 2.0),
    (2, Norm.SUP, (0.5, 1.0), 4.0),
])
def test_ball_volume_scaling_exact_cases(d, norm, radii, expected):
    out = ball_volume_scaling(1.5, d, norm, np.zeros(d), radii, SeededSampler(0), n=1000)
    assert [v for _, v in out] == [1.5 * expected] * len(radii)


def test_ball_volume_scaling_disc():
    out = ball_volume_scaling(1.0, 2, Norm.EUCLIDEAN, [3.0, -1.0], (0.1, 1.0, 7.0), SeededSampler(4), n=400_000)
    values = [v for _, v in out]
    assert values[0] == values[1] == values[2]
    # binomial standard error of 4 * p with p = pi / 4
    assert abs(values[0] - np.pi) <= 3 * 4 * np.sqrt(np.pi / 4 * (1 - np.pi / 4) / 400_000)


def test_doubling_for_lebesgue_is_two_to_the_d():
    for d in (1, 2, 3):
        r1, r2 = ball_volume_scaling(1.0, d, Norm.EUCLIDEAN, np.zeros(d), (0.3, 0.6), SeededSampler(1), n=50_000)
        assert r2[1] * 0.6**d / (r1[1] * 0.3**d) == pytest.approx(2.0**d, rel=1e-12)
