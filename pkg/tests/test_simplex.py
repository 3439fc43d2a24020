from fractions import Fraction

import pytest

from src.numeric import FloatBackend, RationalBackend
from src.simplex import EQ, GE, LE, Infeasible, Unbounded, maximize


@pytest.mark.parametrize("backend", [FloatBackend(), RationalBackend()], ids=["float", "rational"])
def test_textbook_problem(backend):
    # max 3x + 5y, x <= 4, 2y <= 12, 3x + 2y <= 18
    solution = maximize(
        [3, 5],
        [[1, 0], [0, 2], [3, 2]],
        [LE, LE, LE],
        [4, 12, 18],
        backend,
    )
    assert solution.objective == pytest.approx(36)
    assert solution.x == pytest.approx([2, 6])


def test_equality_and_ge_constraints_exact():
    backend = RationalBackend()
    # max x + y, x + y = 1, x >= 1/3, y >= 1/4
    solution = maximize(
        [1, 1],
        [[1, 1], [1, 0], [0, 1]],
        [EQ, GE, GE],
        [1, Fraction(1, 3), Fraction(1, 4)],
        backend,
    )
    assert solution.objective == 1
    assert solution.x[0] >= Fraction(1, 3)
    assert solution.x[1] >= Fraction(1, 4)
    assert sum(solution.x) == 1


def test_negative_rhs_is_normalised():
    # max -x, -x <= -2  (i.e. x >= 2)
    solution = maximize([-1], [[-1]], [LE], [-2], RationalBackend())
    assert solution.objective == -2
    assert solution.x == [2]


def test_infeasible():
    with pytest.raises(Infeasible):
        maximize([1], [[1], [1]], [LE, GE], [1, 2], FloatBackend())


def test_unbounded():
    with pytest.raises(Unbounded):
        maximize([1, 0], [[1, -1]], [LE], [1], RationalBackend())


def test_redundant_equalities():
    # x + y = 1 stated twice
    solution = maximize([1, 2], [[1, 1], [1, 1]], [EQ, EQ], [1, 1], RationalBackend())
    assert solution.objective == 2
    assert solution.x == [0, 1]


def test_degenerate_problem_terminates():
    # Degenerate vertex at the origin; Bland's rule avoids cycling
    solution = maximize(
        [10, -57, -9, -24],
        [[Fraction(1, 2), Fraction(-11, 2), Fraction(-5, 2), 9],
         [Fraction(1, 2), Fraction(-3, 2), Fraction(-1, 2), 1],
         [1, 0, 0, 0]],
        [LE, LE, LE],
        [0, 0, 1],
        RationalBackend(),
    )
    assert solution.objective == 1
