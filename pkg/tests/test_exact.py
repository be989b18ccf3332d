from fractions import Fraction

import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

from rauzy_lab import exact

small_ints = st.integers(min_value=-5, max_value=5)


def square(d):
    return st.lists(st.lists(small_ints, min_size=d, max_size=d), min_size=d, max_size=d)


def test_det_of_known_matrices():
    assert exact.det([[2, 1], [1, 1]]) == 1
    assert exact.det([[0, 1, 1], [-1, 0, 1], [-1, -1, 0]]) == 0
    assert exact.det([[1, 2, 3], [4, 5, 6], [7, 8, 10]]) == -3


def test_rank_and_nullspace():
    m = [[0, 1, 1], [-1, 0, 1], [-1, -1, 0]]
    assert exact.rank(m) == 2
    (v,) = exact.nullspace(m)
    assert exact.matvec(m, v) == [0, 0, 0]
    assert all(isinstance(x, int) for x in v)
    assert sorted(abs(x) for x in v) == [1, 1, 1]


@settings(max_examples=60, deadline=None)
@given(square(3))
def test_det_matches_numpy(rows):
    assert abs(exact.det(rows) - np.linalg.det(np.array(rows, dtype=float))) < 1e-6


@settings(max_examples=60, deadline=None)
@given(square(4))
def test_nullspace_is_kernel(rows):
    basis = exact.nullspace(rows)
    assert len(basis) == 4 - exact.rank(rows)
    for v in basis:
        assert exact.matvec(rows, v) == [0] * 4


def test_clear_denominators():
    assert exact.clear_denominators([Fraction(1, 2), Fraction(-1, 3), 0]) == [3, -2, 0]


def test_matmul_identity_and_transpose():
    a = [[1, 2], [3, 4]]
    assert exact.matmul(exact.identity(2), a) == a
    assert exact.transpose(a) == [[1, 3], [2, 4]]
    assert exact.subtract(a, a) == [[0, 0], [0, 0]]
