from fractions import Fraction

import mpmath
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kleinmock.errors import NotPositiveDefinite, ReconstructionFailed
from kleinmock.numerics import (PrecisionContext, cholesky, int_det, integer_nullspace,
                                is_positive_definite, lattice_basis, lll, max_abs,
                                rational_reconstruct, to_fraction)


def test_precision_context_tolerances():
    ctx = PrecisionContext(40)
    assert ctx.eps < ctx.check_eps < 1
    assert ctx.check_eps == mpmath.mpf(10) ** -30


@pytest.mark.parametrize("digits", [19, 0, 40.5])
def test_precision_context_rejects_bad_digits(digits):
    with pytest.raises(ValueError):
        PrecisionContext(digits)


def test_cholesky_identity(ctx):
    L = cholesky(mpmath.eye(2), ctx)
    assert max_abs(L - mpmath.eye(2)) == 0


def test_cholesky_two_by_two(ctx):
    with ctx.work():
        L = cholesky(mpmath.matrix([[2, 1], [1, 1]]), ctx)
        r = mpmath.sqrt(2)
        expected = mpmath.matrix([[r, 0], [1 / r, 1 / r]])
        assert max_abs(L - expected) < ctx.eps * 10


def test_cholesky_indefinite(ctx):
    with pytest.raises(NotPositiveDefinite):
        cholesky(mpmath.matrix([[0, 1], [1, 0]]), ctx)


def test_cholesky_rejects_asymmetric(ctx):
    with pytest.raises(ValueError):
        cholesky(mpmath.matrix([[2, 1], [0, 2]]), ctx)


@settings(max_examples=25, deadline=None)
@given(st.lists(st.floats(min_value=-3, max_value=3), min_size=3, max_size=3),
       st.lists(st.floats(min_value=0.1, max_value=3), min_size=3, max_size=3))
def test_cholesky_round_trip(off, diag):
    ctx = PrecisionContext(30)
    with ctx.work():
        L = mpmath.matrix([[diag[0], 0, 0], [off[0], diag[1], 0], [off[1], off[2], diag[2]]])
        assert max_abs(cholesky(L * L.T, ctx) - L) < ctx.check_eps


def test_positive_definite_hermitian(ctx):
    assert is_positive_definite(mpmath.matrix([[2, 1j], [-1j, 2]]), ctx)
    assert not is_positive_definite(mpmath.matrix([[1, 2j], [-2j, 1]]), ctx)


def test_rational_reconstruct_examples():
    with mpmath.workdps(30):
        assert rational_reconstruct(mpmath.mpf(27) / 43, 100, mpmath.mpf("1e-8")) == Fraction(27, 43)
        assert rational_reconstruct(mpmath.mpf("0.5"), 10, mpmath.mpf("1e-12")) == Fraction(1, 2)
        assert rational_reconstruct(mpmath.mpf("3.14159265358979"), 50, mpmath.mpf("1e-12")) is None


def test_no_rational_near_pi_exhaustive():
    # oracle for the negative example above: scan every p/q with q <= 50
    x = Fraction("3.14159265358979")
    for q in range(1, 51):
        p = round(x * q)
        assert abs(x - Fraction(p, q)) > Fraction(1, 10 ** 12)


@settings(max_examples=60, deadline=None)
@given(st.integers(-10**6, 10**6), st.integers(1, 500), st.floats(-0.5, 0.5))
def test_rational_reconstruct_property(p, q, t):
    with mpmath.workdps(40):
        tol = mpmath.mpf("1e-15")
        x = mpmath.mpf(p) / q + t * tol
        assert rational_reconstruct(x, q, tol) == Fraction(p, q)


def test_to_fraction_failure():
    with mpmath.workdps(30):
        with pytest.raises(ReconstructionFailed):
            to_fraction(mpmath.pi, 100, mpmath.mpf("1e-20"))
        with pytest.raises(ReconstructionFailed):
            to_fraction(mpmath.mpc(1, 1), 100, mpmath.mpf("1e-20"))


def test_integer_nullspace_examples():
    assert integer_nullspace([[1, -1]]) == [[1, 1]]
    assert integer_nullspace([[1, 0], [0, 1]]) == []


def test_integer_nullspace_random_rank_three():
    A = [[2, -1, 3, 0, 5], [1, 4, -2, 7, 1], [0, 3, 1, -1, 2]]
    ker = integer_nullspace(A)
    assert len(ker) == 2
    for v in ker:
        assert all(sum(a * x for a, x in zip(row, v)) == 0 for row in A)
    assert int_det([[1 if i == j else 0 for j in range(2)] for i in range(2)]) == 1


def test_integer_nullspace_from_reals():
    with mpmath.workdps(30):
        A = [[mpmath.mpf(1) / 3, mpmath.mpf(2) / 3]]
        assert integer_nullspace(A) == [[2, -1]] or integer_nullspace(A) == [[-2, 1]]


def test_lattice_basis_and_lll():
    B = lattice_basis([[2, 0], [0, 2], [1, 1]])
    assert abs(int_det(B)) == 2
    R = lll([[1, 0], [100, 1]])
    assert abs(int_det(R)) == 1
    assert max(abs(x) for row in R for x in row) == 1
