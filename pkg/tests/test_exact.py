from fractions import Fraction

import numpy as np
import pytest

from ncgrass import _exact as E


def test_gauss_collapses_real_values():
    z = E.gauss(3, 0)
    assert not isinstance(z, E.GaussRational)
    assert z == E.mpq(3)


def test_gaussian_rational_arithmetic():
    z = E.gauss(1, 2)
    w = E.gauss(E.mpq(1, 2), -1)
    assert z * w == E.gauss(E.mpq(5, 2), E.mpq(0))
    assert z * z.inverse() == E.ONE
    assert (z / w) * w == z
    assert z.conjugate() == E.gauss(1, -2)
    assert complex(z) == 1 + 2j


@pytest.mark.parametrize("text,expected", [("3/4", Fraction(3, 4)), ("-2", Fraction(-2)), ("0/1", Fraction(0))])
def test_parse_rational(text, expected):
    assert E.parse_rational(text) == E.mpq(expected.numerator, expected.denominator)


def test_format_rational_always_has_denominator():
    assert E.format_rational(E.mpq(-6, 4)) == "-3/2"
    assert E.format_rational(E.mpq(5)) == "5/1"


def test_to_exact_from_float_is_exact_binary_value():
    assert E.to_exact(0.5) == E.mpq(1, 2)
    assert E.to_exact(0.1) == E.mpq(*Fraction(0.1).as_integer_ratio())


def test_inverse_of_hand_matrix():
    A = E.exact_array([[0, 1], [1, 1]])
    inv, rank = E.inverse(A)
    assert rank == 2
    assert inv.tolist() == E.exact_array([[-1, 1], [1, 0]]).tolist()


def test_singular_matrix_reports_rank():
    inv, rank = E.inverse(E.exact_array([[1, 1], [0, 0]]))
    assert inv is None and rank == 1


def test_inverse_matches_fraction_gauss_jordan(rng):
    # independent oracle: plain Fraction Gauss-Jordan
    def gj(M):
        n = len(M)
        A = [[Fraction(x) for x in row] + [Fraction(int(i == j)) for j in range(n)] for i, row in enumerate(M)]
        for c in range(n):
            p = next(r for r in range(c, n) if A[r][c] != 0)
            A[c], A[p] = A[p], A[c]
            piv = A[c][c]
            A[c] = [x / piv for x in A[c]]
            for r in range(n):
                if r != c and A[r][c] != 0:
                    f = A[r][c]
                    A[r] = [x - f * y for x, y in zip(A[r], A[c])]
        return [row[n:] for row in A]

    for _ in range(5):
        while True:
            M = rng.integers(-3, 4, size=(5, 5))
            if round(abs(np.linalg.det(M))) != 0:
                break
        inv, _ = E.inverse(E.exact_array(M.tolist()))
        expected = gj(M.tolist())
        assert [[Fraction(int(x.numerator), int(x.denominator)) for x in row] for row in inv] == expected


def test_gaussian_inverse_exact():
    A = np.empty((2, 2), dtype=object)
    A[0, 0], A[0, 1] = E.gauss(1, 1), E.gauss(2, 0)
    A[1, 0], A[1, 1] = E.gauss(0, 1), E.gauss(1, -1)
    inv, rank = E.inverse(A)
    assert rank == 2
    prod = A.dot(inv)
    assert all(prod[i, j] == (E.ONE if i == j else 0) for i in range(2) for j in range(2))


def test_rref_pivots():
    R, pivots = E.rref(E.exact_array([[0, 2, 4], [0, 1, 2], [1, 0, 1]]))
    assert list(pivots) == [0, 1]
    assert R[0].tolist() == E.exact_array([[1, 0, 1]])[0].tolist()
