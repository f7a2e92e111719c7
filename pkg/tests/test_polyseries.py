from fractions import Fraction as F

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import gauss_legendre_01, numpy_eval, rpoly
from hamplate.errors import BackendMismatch, MinDegreeViolation
from hamplate.polyseries import (
    F64,
    RATIONAL,
    BigFloatBackend,
    Polynomial,
    add,
    definite_integral_01,
    differentiate,
    evaluate,
    integral_over_y_on_01,
    integrate_twice_from_zero,
    mul,
    parse_backend,
    scale,
    shift_down_by_y,
    shift_down_by_y2,
    truncate,
)

fractions = st.fractions(min_value=-50, max_value=50, max_denominator=60)
rational_polys = st.lists(fractions, max_size=12).map(lambda cs: Polynomial(cs, RATIONAL))


def test_add_examples():
    assert add(rpoly(1, 1), rpoly(-1, 1)) == rpoly(0, 2)
    p = rpoly("-1/2", "1/2").shift_up(1)
    assert add(p, Polynomial.zero()) == p
    assert p + rpoly(0, "1/2") == rpoly(0, 0, "1/2")


def test_mul_examples():
    p = rpoly(0, "-1/2", "1/2")
    assert mul(p, p) == rpoly(0, 0, "1/4", "-1/2", "1/4")
    assert mul(p, rpoly(1)) == p
    assert mul(p, Polynomial.zero()).is_zero()


def test_integrate_twice_examples():
    assert integrate_twice_from_zero(rpoly(1)) == rpoly(0, 0, "1/2")
    assert integrate_twice_from_zero(rpoly(0, 0, 1)) == rpoly(0, 0, 0, 0, "1/12")
    assert integrate_twice_from_zero(Polynomial.zero()).is_zero()


def test_shift_down_by_y2_examples():
    assert shift_down_by_y2(rpoly(0, 0, 1)) == rpoly(1)
    assert shift_down_by_y2(rpoly(0, 0, 0, 3, -1)) == rpoly(0, 3, -1)
    with pytest.raises(MinDegreeViolation):
        shift_down_by_y2(rpoly(1, 0, 1))


def test_shift_down_float_tolerance():
    # stray low-order roundoff is cleared, real low-order mass is rejected
    p = Polynomial([1e-15, -2e-16, 1.0, 2.0], F64)
    assert shift_down_by_y2(p) == Polynomial([1.0, 2.0], F64)
    with pytest.raises(MinDegreeViolation):
        shift_down_by_y2(Polynomial([0.1, 0.0, 1.0], F64))
    with pytest.raises(MinDegreeViolation):
        shift_down_by_y(rpoly(F(1, 10**9), 1))


def test_integral_over_y_examples():
    assert integral_over_y_on_01(rpoly(0, -2, 2)) == -1
    assert integral_over_y_on_01(rpoly(0, 1)) == 1
    assert integral_over_y_on_01(Polynomial.zero()) == 0
    with pytest.raises(MinDegreeViolation):
        integral_over_y_on_01(rpoly(1, 1))


def test_definite_integral_examples():
    assert definite_integral_01(rpoly(1)) == 1
    assert definite_integral_01(rpoly(0, 0, 1)) == F(1, 3)
    assert definite_integral_01(rpoly(0, 1, -1)) == F(1, 6)


def test_truncate_evaluate_differentiate():
    assert truncate(rpoly(0, 1, 0, 1), 2) == rpoly(0, 1)
    assert evaluate(rpoly(0, "-1/2", "1/2"), 1) == 0
    assert differentiate(rpoly(0, 0, 1)) == rpoly(0, 2)
    assert scale(rpoly(1, 2), F(1, 2)) == rpoly("1/2", 1)
    with pytest.raises(ValueError):
        truncate(rpoly(1), -1)


def test_normalization_and_zero():
    p = Polynomial([1, 2, 0, 0])
    assert p.degree == 1 and p.coeffs == (1, 2)
    z = Polynomial.zero()
    assert z.degree == -1 and z.is_zero() and len(z) == 0
    assert (rpoly(1, 1) - rpoly(1, 1)).is_zero()


def test_immutable():
    p = rpoly(1, 2)
    with pytest.raises(ValueError):
        p.array[0] = 5


def test_mixed_backends_rejected():
    with pytest.raises(BackendMismatch):
        rpoly(1) + Polynomial([1.0], F64)
    with pytest.raises(BackendMismatch):
        mul(rpoly(1), Polynomial([1.0], "bigfloat:128"))


def test_backend_parsing():
    assert parse_backend("rational") is RATIONAL
    assert parse_backend("f64") is F64
    b = parse_backend("bigfloat:300")
    assert isinstance(b, BigFloatBackend) and b.bits == 300
    assert parse_backend(b) is b
    with pytest.raises(ValueError):
        parse_backend("float128")


def test_rational_coercion_reads_decimals():
    assert RATIONAL.coerce(0.3) == F(3, 10)
    assert RATIONAL.coerce(np.float64(-0.28)) == F(-7, 25)
    with pytest.raises(ValueError):
        RATIONAL.coerce(float("nan"))


def test_bigfloat_precision_is_honoured():
    b = BigFloatBackend(200)
    third = Polynomial([F(1, 3)], b)
    # arithmetic stays at 200 bits even though the default context is 53
    prod = (third * third).coeff(0)
    err = abs(RATIONAL.coerce(prod) - F(1, 9))
    assert 0 < err < F(1, 2**195)
    assert abs(RATIONAL.coerce(third.coeff(0)) - F(1, 3)) < F(1, 2**200)


def test_to_backend_round_trip():
    p = rpoly("1/4", "-3/8", 5)
    assert p.to_backend("bigfloat:128").to_backend(RATIONAL) == p
    assert np.allclose(p.to_backend(F64).to_numpy(), [0.25, -0.375, 5.0])


@given(rational_polys)
def test_integrate_twice_inverts_second_derivative(p):
    r = integrate_twice_from_zero(p)
    assert differentiate(differentiate(r)) == p
    assert r.coeff(0) == 0 and r.coeff(1) == 0


@given(rational_polys)
def test_shift_down_inverts_multiplication_by_y2(p):
    assert shift_down_by_y2(mul(p, rpoly(0, 0, 1))) == p


@given(rational_polys, rational_polys)
def test_rational_arithmetic_is_exact(p, q):
    assert (p + q) - q == p
    assert mul(p, q) == mul(q, p)


@settings(max_examples=40, deadline=None)
@given(st.lists(st.floats(-1, 1), min_size=1, max_size=8), st.integers(0, 392))
def test_definite_integral_matches_quadrature(head, shift):
    # degrees up to 400, compared with 64-point Gauss-Legendre
    p = Polynomial(head, F64).shift_up(shift) + Polynomial([0.5], F64)
    exact = definite_integral_01(p)
    oracle = gauss_legendre_01(numpy_eval(p))
    assert exact == pytest.approx(oracle, rel=1e-10, abs=1e-14)


@settings(max_examples=40, deadline=None)
@given(st.lists(st.floats(-1e3, 1e3), max_size=30))
def test_float_integrate_twice_relative_accuracy(cs):
    p = Polynomial(cs, F64)
    back = differentiate(differentiate(integrate_twice_from_zero(p)))
    scale_ = max([abs(c) for c in cs] + [1.0])
    assert np.allclose(back.to_numpy(), p.to_numpy(), rtol=1e-12, atol=1e-12 * scale_)


def test_evaluate_matches_numpy():
    p = Polynomial(np.linspace(-1, 1, 50), F64)
    for y in (0.0, 0.3, 1.0):
        assert evaluate(p, y) == pytest.approx(numpy_eval(p)(y), rel=1e-12)
