import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.polynomial import polynomial as P

from qpseries.errors import (AverageMismatch, EvenOrderZero, ValidationError,
                             ZeroLeadingCoefficient)
from qpseries.model import Nonlinearity, Problem, recenter, shifted_g_tail, validate

from conftest import COS1, make_e1, make_e3


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(-3, 3), min_size=1, max_size=6), st.floats(-2, 2))
def test_recenter_matches_polynomial_shift(coeffs, c0):
    # oracle: evaluate g(c0 + y) as a polynomial in y by composition
    ref = np.zeros(len(coeffs))
    shifted = np.array([1.0])
    for j, c in enumerate(coeffs):
        term = c * shifted
        ref[: len(term)] += term
        shifted = P.polymul(shifted, [c0, 1.0])
    assert np.allclose(recenter(coeffs, c0), ref, atol=1e-9 * (1 + np.abs(ref).max()))


def test_nonlinearity_evaluates_original_polynomial():
    coeffs = [2.0, -1.0, 0.5, 3.0]
    g = Nonlinearity.from_polynomial(coeffs, c0=0.7)
    x = np.linspace(-2, 2, 11)
    assert np.allclose(g(x), P.polyval(x, coeffs), atol=1e-12)


def test_e1_and_e3_validate():
    r1 = validate(make_e1())
    assert (r1.gotn, r1.a, r1.N, r1.solver) == (1, 1.0, 1, "n1")
    r3 = validate(make_e3())
    assert (r3.gotn, r3.a, r3.solver) == (3, 1.0, "n3")


def test_shifted_tail():
    assert list(shifted_g_tail(make_e1().nonlinearity)) == [0.0, 0.0, 1.0]
    assert list(shifted_g_tail(make_e3().nonlinearity)) == [0.0, 0.0, 0.0, 1.0]
    assert shifted_g_tail(Nonlinearity.from_polynomial([0.0, 1.0])).size == 0


def test_recentred_zero_of_order_three():
    # g(x) = (x - 1)^3 + 2 with f0 = 2 has a triple zero at c0 = 1
    coeffs = P.polyadd(P.polypow([-1.0, 1.0], 3), [2.0])
    f = {(0,): 2.0, **COS1}
    p = Problem.build([1.0], f, coeffs, c0=1.0, epsilon=0.1)
    rep = validate(p)
    assert rep.gotn == 3 and rep.a == pytest.approx(1.0)


def test_rejections():
    with pytest.raises(AverageMismatch):
        validate(Problem.build([1.0], COS1, [1.0, 1.0], 0.0, 0.1))
    with pytest.raises(EvenOrderZero):
        validate(Problem.build([1.0], COS1, [0.0, 0.0, 1.0], 0.0, 0.1))
    with pytest.raises(ZeroLeadingCoefficient):
        validate(Problem.build([1.0], COS1, [0.0], 0.0, 0.1))
    with pytest.raises(ValidationError):
        validate(Problem.build([1.0], {(1,): 1.0}, [0.0, 1.0], 0.0, 0.1))
    with pytest.raises(ValueError):
        Problem.build([1.0, 2.0], COS1, [0.0, 1.0])


def test_even_order_error_is_a_validation_error():
    assert issubclass(EvenOrderZero, ValidationError)
    assert issubclass(ValidationError, ValueError)


def test_problem_helpers(e2):
    assert e2.dim == 2 and e2.degree == 1
    assert e2.with_epsilon(0.2).epsilon == 0.2
    assert np.allclose(e2.frequencies([[1, 1]]), [1 + e2.omega[1]])
    assert (0, 0) not in e2.f_tilde
