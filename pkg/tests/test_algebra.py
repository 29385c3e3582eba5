from __future__ import annotations

import math

import pytest

from wulffcap.algebra import (
    admissible_index_tuples,
    check_coefficient_inequality,
    check_newton_maclaurin,
    coefficient_inequality_sweep,
    newton_maclaurin_sweep,
)
from wulffcap.errors import DomainError


def test_newton_maclaurin_on_a_known_vector():
    result = check_newton_maclaurin([1.0, 2.0, 3.0], (2, 0, 1, 0))
    assert result.lhs == pytest.approx(math.sqrt(11.0 / 3.0))
    assert result.rhs == pytest.approx(2.0)
    assert result.holds
    assert not result.equality


def test_newton_maclaurin_equality_on_umbilic_points():
    result = check_newton_maclaurin([1.5, 1.5, 1.5], (3, 1, 2, 0))
    assert result.equality
    assert result.lhs == pytest.approx(result.rhs)


def test_newton_maclaurin_outside_the_cone():
    with pytest.raises(DomainError, match="cone"):
        check_newton_maclaurin([-3.0, 1.0, 1.0], (1, 0, 1, 0))


def test_inadmissible_index_tuple():
    with pytest.raises(DomainError):
        check_newton_maclaurin([1.0, 2.0], (1, 1, 1, 0))


def test_index_tuples_are_admissible():
    tuples = admissible_index_tuples(2)
    assert (2, 0, 1, 0) in tuples
    assert all(k > l >= 0 and r > s >= 0 and k >= r and l >= s for k, l, r, s in tuples)


def test_coefficient_inequality_is_strict_off_umbilics():
    # l = 2, a = (1), b = (1, 1): b is rescaled by H_2 / (H_0 + H_1) = 11/9
    result = check_coefficient_inequality([1.0, 2.0, 3.0], 2, [1.0], [1.0, 1.0])
    assert result.details["b"] == pytest.approx([11.0 / 9.0, 11.0 / 9.0])
    assert result.lhs == pytest.approx(2.0)
    assert result.rhs == pytest.approx(33.0 / 18.0)
    assert result.holds
    assert result.lhs - result.rhs > 1e-3


def test_coefficient_inequality_equality_on_umbilics():
    result = check_coefficient_inequality([2.0, 2.0, 2.0], 2, [1.0], [1.0, 1.0])
    assert result.equality
    assert result.lhs == pytest.approx(result.rhs)


@pytest.mark.parametrize(
    "lower, a, b",
    [(0, [1.0], []), (2, [1.0], [1.0]), (1, [-1.0], [1.0]), (1, [0.0], [1.0])],
)
def test_coefficient_inequality_rejects_bad_coefficients(lower, a, b):
    with pytest.raises(DomainError):
        check_coefficient_inequality([1.0, 2.0, 3.0], lower, a, b)


def test_sweeps_find_no_violations():
    nm = newton_maclaurin_sweep(500, seed=11)
    coefficient = coefficient_inequality_sweep(500, seed=11)
    assert nm.passed and nm.instances > 500
    assert coefficient.passed and coefficient.instances == 500
    assert coefficient.equality_cases == 50
