from fractions import Fraction

import numpy as np
import pytest

from hamplate.plate import BoundaryKind, make_boundary
from hamplate.polyseries import RATIONAL, Polynomial

ALL_KINDS = list(BoundaryKind)


def rpoly(*coeffs):
    """Rational polynomial from ints, Fractions or 'p/q' strings."""
    return Polynomial([Fraction(c) for c in coeffs], RATIONAL)


def gauss_legendre_01(f, points=64):
    """Independent quadrature oracle on [0, 1]."""
    x, w = np.polynomial.legendre.leggauss(points)
    y = 0.5 * (x + 1.0)
    return 0.5 * float(np.sum(w * f(y)))


def numpy_eval(p):
    """Evaluate through numpy's own polynomial class (an independent path)."""
    return np.polynomial.Polynomial(p.to_numpy())


@pytest.fixture(params=ALL_KINDS, ids=lambda k: k.value)
def any_boundary(request):
    return make_boundary(request.param)


@pytest.fixture
def clamped():
    return make_boundary(BoundaryKind.CLAMPED)
