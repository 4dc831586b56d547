import math
from fractions import Fraction

import pytest

from services.errors import MetricError
from services.spaces import (
    Orientation,
    build_circle,
    build_circle_union,
    build_grid_net,
    circle_levels,
    directed_distance,
    make_space,
    net_parameters,
    orientation,
    subspace,
    validate_metric,
)


def test_valid_metric_builds_space():
    report = validate_metric(["a", "b", "c"], [[0, 1, 2], [1, 0, 1], [2, 1, 0]])
    assert report.valid
    assert report.space.size == 3
    assert report.space.d(0, 2) == Fraction(2)


def test_triangle_violation_reports_triple():
    report = validate_metric(["a", "b", "c"], [[0, 1, 5], [1, 0, 1], [5, 1, 0]])
    assert not report.valid
    triples = [v.indices for v in report.violations if v.kind == "triangle"]
    assert (0, 1, 2) in triples
    assert "triangle" in report.describe()
    assert "'a'" in report.describe()


def test_asymmetry_and_diagonal_are_both_reported():
    report = validate_metric(["a", "b"], [[1, 2], [3, 0]])
    kinds = {v.kind for v in report.violations}
    assert {"diagonal", "asymmetry"} <= kinds


def test_zero_distance_between_distinct_points():
    report = validate_metric(["a", "b"], [[0, 0], [0, 0]])
    assert [v.kind for v in report.violations] == ["separation"]


def test_malformed_matrix_raises():
    with pytest.raises(MetricError):
        validate_metric(["a", "b"], [[0, 1]])
    with pytest.raises(MetricError):
        make_space(["a", "a"], [[0, 1], [1, 0]])


def test_circle_distances():
    space = build_circle(10)
    assert space.size == 11
    assert space.d(0, 4) == 10
    assert space.d(1, 10) == 1
    assert space.d(2, 7) == 5
    assert space.d(3, 9) == 4


def test_circle_needs_three_points():
    with pytest.raises(MetricError):
        build_circle(2)


def test_circle_union_cross_distances():
    space = build_circle_union(2)
    assert space.size == 21
    a = space.index("c1_1")
    b = space.index("c2_9")
    c = space.index("c2_16")
    assert space.d(a, b) == 16
    assert space.d(0, a) == 4
    assert space.d(b, c) == 7
    levels = circle_levels(space)
    assert levels[0] == 0 and levels[a] == 1 and levels[b] == 2


def test_grid_net_parameters():
    space = build_grid_net(3)
    assert space.size == 16
    assert not space.exact
    alpha, beta = net_parameters(space)
    assert alpha == pytest.approx(1.0)
    assert beta == pytest.approx(math.sqrt(2) / 2)


def test_grid_cap():
    with pytest.raises(MetricError):
        build_grid_net(10, 2, cap=50)


def test_subspace_keeps_base_and_metadata():
    union = build_circle_union(2)
    rim = [x for x in range(union.size) if union.circle_of[x] == 16]
    circle = subspace(union, [0] + rim)
    assert circle.size == 17
    assert circle.base_index == 0
    assert circle.rim_index[1:] == tuple(range(1, 17))
    with pytest.raises(MetricError):
        subspace(union, rim)


def test_directed_distance():
    assert directed_distance(16, 5, 2, "left") == 3
    assert directed_distance(16, 5, 2, "right") == 13
    assert directed_distance(16, 2, 2, "right") == 0


def test_orientation_of_neighbours():
    assert orientation(8, 3, 4) is Orientation.RIGHT
    assert orientation(8, 3, 2) is Orientation.LEFT
    assert orientation(8, 3, 3) is Orientation.BOTH


def test_orientation_reference_values():
    assert orientation(10, 6, 2) is Orientation.LEFT
    assert orientation(10, 3, 7) is Orientation.RIGHT
    with pytest.raises(MetricError):
        orientation(10, 0, 3)


@pytest.mark.parametrize("n", range(3, 17))
def test_orientation_covers_the_rim(n):
    half = (n + 1) // 2
    for k in range(1, n + 1):
        assert orientation(n, k, k) is Orientation.BOTH
        for l in range(1, n + 1):
            found = orientation(n, k, l)
            assert found is not Orientation.NEITHER
            # left means at most half - 1 steps walking left
            left = directed_distance(n, k, l, "left") <= half - 1
            assert (found in (Orientation.LEFT, Orientation.BOTH)) == left


@pytest.mark.parametrize("n", [5, 8, 10, 16])
def test_rim_distance_is_the_shorter_walk(n):
    circle = build_circle(n)
    for x in range(1, n + 1):
        for y in range(1, n + 1):
            dl = directed_distance(n, x, y, "left")
            dr = directed_distance(n, x, y, "right")
            assert dl + dr == (0 if x == y else n)
            assert circle.d(x, y) == min(dl, dr)
