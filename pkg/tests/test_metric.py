import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from covmeasure.errors import BoundaryPointError
from covmeasure.geometry import Ball, Box
from covmeasure.metric import (ball_metric, boundary_escape_check, box_metric, extended_distance, halfspace_metric,
                               interval_metric)

unit_interval = interval_metric(0.0, 1.0)
inner = st.floats(min_value=1e-3, max_value=1 - 1e-3)


def test_same_point_is_at_distance_zero():
    assert extended_distance(unit_interval, [0.3], [0.3]) == 0.0


def test_worked_value_on_unit_interval():
    # |0.1 - 0.5| + |1/0.1 - 1/0.5| = 0.4 + 8 ... on (0, 1) the gaps are 0.1 and 0.5
    assert extended_distance(unit_interval, [0.1], [0.5]) == pytest.approx(0.4 + 8.0, abs=1e-12)


def test_worked_value_with_shared_gap_term():
    # x = 0.2 and y = 0.6 have gaps 0.2 and 0.4: 0.4 + |5 - 2.5| = 2.9
    assert extended_distance(unit_interval, [0.2], [0.6]) == pytest.approx(2.9, abs=1e-12)


def test_equidistant_points_see_only_the_base_metric():
    assert extended_distance(unit_interval, [0.25], [0.75]) == pytest.approx(0.5, abs=1e-15)
    m = ball_metric(Ball([0.0, 0.0], 2.0))
    assert extended_distance(m, [1.0, 0.0], [0.0, -1.0]) == pytest.approx(math.sqrt(2), abs=1e-15)


def test_boundary_point_is_rejected():
    with pytest.raises(BoundaryPointError):
        extended_distance(unit_interval, [0.0], [0.5])


@settings(max_examples=300, deadline=None)
@given(inner, inner, inner)
def test_axioms_on_the_interval(x, y, z):
    d = lambda a, b: extended_distance(unit_interval, [a], [b])
    assert d(x, y) == d(y, x)
    assert d(x, y) >= 0
    assert d(x, z) <= d(x, y) + d(y, z) + 1e-12
    assert d(x, y) >= abs(x - y)


def test_axioms_on_random_triples_in_a_box():
    box = Box([0.0, 0.0], [2.0, 1.0])
    m = box_metric(box)
    rng = np.random.default_rng(4)
    pts = box.lower + (0.001 + 0.998 * rng.random((10_000, 3, 2))) * box.widths
    for x, y, z in pts:
        dxy, dyx = extended_distance(m, x, y), extended_distance(m, y, x)
        assert abs(dxy - dyx) <= 1e-12
        assert extended_distance(m, x, z) <= dxy + extended_distance(m, y, z) + 1e-12
        assert dxy >= np.linalg.norm(x - y) - 1e-15


def test_halfspace_metric_gap():
    m = halfspace_metric([0.0, 2.0], 2.0)  # y > 1
    assert m.complement_distance(np.array([5.0, 3.0])) == pytest.approx(2.0)


def test_constant_sequence_passes():
    rep = boundary_escape_check(unit_interval, [[0.4]] * 10, 1.0)
    assert rep.cauchy and rep.passed and rep.tail_diameter == 0.0


def test_convergent_interior_sequence_keeps_its_distance():
    seq = [[0.5 + 0.1 / n] for n in range(1, 200)]
    rep = boundary_escape_check(unit_interval, seq, 1.0)
    assert rep.cauchy and rep.passed
    assert rep.min_complement_distance >= rep.required_distance


def test_sequence_running_into_the_boundary_is_not_cauchy():
    seq = [[1.0 / n] for n in range(2, 400)]
    rep = boundary_escape_check(unit_interval, seq, 1.0)
    assert not rep.cauchy and rep.passed
    assert rep.tail_diameter > 1.0


def test_tail_on_the_boundary_raises():
    with pytest.raises(BoundaryPointError):
        boundary_escape_check(unit_interval, [[0.5], [0.5], [1.0]], 1.0)


def test_same_convergent_sequences_in_both_metrics():
    # A sequence converging to an interior point converges in d' too, and d'-balls
    # of small radius sit inside d-balls of the same radius.
    x = 0.3
    seq = [x + 0.2 / n for n in range(1, 2000)]
    dp = [extended_distance(unit_interval, [s], [x]) for s in seq]
    assert dp[-1] < 1e-2
    assert all(a >= abs(s - x) for a, s in zip(dp, seq))
    # and conversely a d'-ball around x contains a d-ball: points within 1e-4
    # in d are within 1e-4 * (1 + 1/(gap^2 - small)) in d'
    near = np.linspace(x - 1e-4, x + 1e-4, 51)
    assert max(extended_distance(unit_interval, [p], [x]) for p in near) < 1e-4 * (1 + 1 / (0.3 - 1e-4) ** 2)


def test_triangle_inequality_near_the_boundary_up_to_rounding():
    # d' reaches ~1e6 here, so only an ulp-relative tolerance is meaningful
    rng = np.random.default_rng(8)
    for x, y, z in rng.uniform(1e-6, 1e-3, (2000, 3)):
        d = lambda a, b: extended_distance(unit_interval, [a], [b])
        lhs, rhs = d(x, z), d(x, y) + d(y, z)
        assert lhs <= rhs * (1 + 4 * np.finfo(float).eps)
