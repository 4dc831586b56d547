from fractions import Fraction

from services.exact_lp import fraction_rank, maximize


def test_two_variable_optimum_is_exact():
    result = maximize([[1, 2], [3, 1]], [4, 6], [1, 1])
    assert result.status == "optimal"
    assert result.value == Fraction(14, 5)
    assert result.x == [Fraction(8, 5), Fraction(6, 5)]


def test_negative_right_hand_side_goes_through_phase_one():
    # x + y >= 2 written as -x - y <= -2, with x <= 3, y <= 1
    result = maximize([[-1, -1], [1, 0], [0, 1]], [-2, 3, 1], [-1, -2])
    assert result.status == "optimal"
    assert result.value == Fraction(-2)
    assert result.x == [Fraction(2), Fraction(0)]


def test_infeasible():
    result = maximize([[1]], [-1], [1])
    assert result.status == "infeasible"


def test_unbounded():
    result = maximize([[-1]], [0], [1])
    assert result.status == "unbounded"


def test_degenerate_problem_terminates():
    A = [[1, 1], [1, 0], [0, 1], [1, -1]]
    b = [1, 1, 1, 0]
    result = maximize(A, b, [1, 1])
    assert result.status == "optimal"
    assert result.value == 1


def test_fraction_rank():
    assert fraction_rank([[1, 2], [2, 4]]) == 1
    assert fraction_rank([[1, 0, 0], [0, Fraction(1, 3), 0], [1, 1, 0]]) == 2
    assert fraction_rank([]) == 0
