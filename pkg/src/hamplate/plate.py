"""Von Kármán equations for a clamped/supported circular plate.

Dimensionless variables: ``y = r²/R²``, slope variable ``phi = y W'(y)``,
membrane variable ``S`` and load ``Q``.  The two nonlinear operators are::

    N1 = y² phi'' - phi S - Q y²
    N2 = y² S'' + phi² / 2

with ``phi(0) = S(0) = 0`` and a mixed condition at the edge ``y = 1`` whose
coefficients ``lambda`` and ``mu`` encode the support type.
"""
from __future__ import annotations

import enum
import math
import time
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .errors import InvalidPoisson, NonFiniteCoefficient
from .polyseries import (
    RATIONAL,
    Backend,
    Polynomial,
    definite_integral_01,
    differentiate,
    evaluate,
    integral_over_y_on_01,
    parse_backend,
    shift_down_by_y,
)

DEFAULT_NU = Fraction(3, 10)


class BoundaryKind(enum.Enum):
    CLAMPED = "clamped"
    MOVEABLE_CLAMPED = "moveable-clamped"
    SIMPLE_SUPPORT = "simple-support"
    SIMPLE_HINGED = "simple-hinged"

    @classmethod
    def parse(cls, value) -> "BoundaryKind":
        if isinstance(value, cls):
            return value
        key = str(value).strip().lower().replace("_", "-").replace(" ", "-")
        aliases = {
            "clamped": cls.CLAMPED,
            "moveable-clamped": cls.MOVEABLE_CLAMPED,
            "movable-clamped": cls.MOVEABLE_CLAMPED,
            "simple-support": cls.SIMPLE_SUPPORT,
            "simply-supported": cls.SIMPLE_SUPPORT,
            "simple-hinged": cls.SIMPLE_HINGED,
            "simple-hinged-support": cls.SIMPLE_HINGED,
        }
        try:
            return aliases[key]
        except KeyError:
            raise ValueError(f"unknown boundary kind {value!r}") from None


def _exact(x) -> Fraction:
    return RATIONAL.coerce(x)


@dataclass(frozen=True)
class BoundaryCondition:
    """Edge support type with its exact ``(lambda, mu)`` coefficients.

    The edge relations read ``phi(1) = lam/(lam-1) phi'(1)`` and
    ``S(1) = mu/(mu-1) S'(1)``.
    """

    kind: BoundaryKind
    nu: Fraction
    lam: Fraction
    mu: Fraction

    def __post_init__(self):
        if not 0 < self.nu < Fraction(1, 2):
            raise InvalidPoisson(f"Poisson ratio must lie in (0, 1/2), got {self.nu}")
        if self.lam == 1 or self.mu == 1:
            raise ValueError("lambda and mu must differ from 1")

    @property
    def label(self) -> str:
        return self.kind.value


def make_boundary(kind, nu=DEFAULT_NU) -> BoundaryCondition:
    kind = BoundaryKind.parse(kind)
    nu = _exact(nu)
    if not 0 < nu < Fraction(1, 2):
        raise InvalidPoisson(f"Poisson ratio must lie in (0, 1/2), got {nu}")
    hinge = 2 / (1 + nu)
    membrane = 2 / (1 - nu)
    lam, mu = {
        BoundaryKind.CLAMPED: (Fraction(0), membrane),
        BoundaryKind.MOVEABLE_CLAMPED: (Fraction(0), Fraction(0)),
        BoundaryKind.SIMPLE_SUPPORT: (hinge, Fraction(0)),
        BoundaryKind.SIMPLE_HINGED: (hinge, membrane),
    }[kind]
    return BoundaryCondition(kind, nu, lam, mu)


def edge_defect(p: Polynomial, coef):
    """``(c - 1) p(1) - c p'(1)``; zero iff ``p(1) = c/(c-1) p'(1)``."""
    backend = p.backend
    c = backend.coerce(coef)
    with backend.context():
        return (c - 1) * evaluate(p, 1) - c * evaluate(differentiate(p), 1)


@dataclass(frozen=True)
class PlateState:
    """An approximate solution: slope variable, membrane variable, load and W(0)."""

    phi: Polynomial
    s: Polynomial
    q_load: object
    a: object

    @property
    def backend(self) -> Backend:
        return self.phi.backend


@dataclass
class ResidualReport:
    e_total: object
    r1: Polynomial
    r2: Polynomial
    q_load: object
    order_or_iter: int = 0
    cpu_seconds: float = 0.0
    e_floor: float = 0.0

    @property
    def resolved_bound(self) -> float:
        """Upper bound on the true residual given rounding noise."""
        return max(float(self.e_total), 0.0) + self.e_floor

    @property
    def e_float(self) -> float:
        return float(self.e_total)


def _y2(backend) -> Polynomial:
    return Polynomial.monomial(2, 1, backend)


def _y2_second(p: Polynomial) -> Polynomial:
    """``y² p''`` computed coefficient-wise as ``k(k-1) c_k y^k``."""
    backend = p.backend
    if p.degree < 2:
        return Polynomial.zero(backend)
    k = backend.indices(0, len(p))
    with backend.context():
        return Polynomial._wrap(p.array * (k * (k - 1)), backend)


y2_second_derivative = _y2_second


def operator_n1(state: PlateState) -> Polynomial:
    backend = state.backend
    return _y2_second(state.phi) - state.phi * state.s - _y2(backend) * state.q_load


def operator_n2(state: PlateState) -> Polynomial:
    half = state.backend.coerce(Fraction(1, 2))
    return _y2_second(state.s) + (state.phi * state.phi) * half


def squared_residual(state: PlateState, order_or_iter: int = 0) -> ResidualReport:
    """Integrate ``N1² + N2²`` over ``[0, 1]`` exactly (no quadrature)."""
    t0 = time.process_time()
    r1 = operator_n1(state)
    r2 = operator_n2(state)
    with state.backend.context():
        e = definite_integral_01(r1 * r1 + r2 * r2)
    floor = 0.0
    if not state.backend.exact:
        if not (r1.all_finite() and r2.all_finite() and state.backend.is_finite(e)):
            raise NonFiniteCoefficient(f"residual overflow at order/iteration {order_or_iter}",
                                       order=order_or_iter)
        try:
            floor = _rounding_floor(state, r1, r2, e)
        except OverflowError:
            floor = math.inf
    return ResidualReport(e, r1, r2, state.q_load, order_or_iter, time.process_time() - t0, floor)


def _rounding_floor(state: PlateState, r1: Polynomial, r2: Polynomial, e) -> float:
    """Heuristic size of rounding noise in the computed residual.

    Monomial coefficients of the operators are far larger than their values
    on [0, 1] once the approximation is good, so cancellation dominates.
    """
    eps = 2.0 ** -(53 if state.backend.dtype is np.float64 else state.backend.bits)

    def l1(p):
        return float(np.abs(p.to_numpy()).sum())

    phi, s = l1(state.phi), l1(state.s)
    a1 = l1(_y2_second(state.phi)) + phi * s + abs(float(state.q_load))
    a2 = l1(_y2_second(state.s)) + 0.5 * phi * phi
    conv = l1(r1) ** 2 + l1(r2) ** 2
    root = math.sqrt(max(float(e), 0.0))
    return 4.0 * (eps * conv + (eps * a1) ** 2 + (eps * a2) ** 2 + 2.0 * eps * (a1 + a2) * root)


def deflection(phi: Polynomial) -> Polynomial:
    """``W(y) = -∫_y^1 phi(e)/e de`` as a polynomial with ``W(1) = 0``."""
    backend = phi.backend
    g = shift_down_by_y(phi)
    if g.is_zero():
        return g
    k = backend.indices(1, len(g) + 1)
    with backend.context():
        body = g.array / k
        antider = Polynomial._wrap(np.concatenate([backend.zeros(1), body]), backend)
        return antider - evaluate(antider, 1)


def central_deflection(phi: Polynomial):
    """``W(0) = -∫_0^1 phi(e)/e de``."""
    return -integral_over_y_on_01(phi)


@dataclass(frozen=True)
class PhysicalRecord:
    w0_over_h: float
    pR4_over_Eh4: float
    membrane_force: Polynomial | None = field(default=None, compare=False)


def to_physical(a, q_load, nu=DEFAULT_NU, s: Polynomial | None = None) -> PhysicalRecord:
    """Map dimensionless ``(W(0), Q)`` to ``w(0)/h`` and ``p R⁴/(E h⁴)``.

    When the membrane variable ``s`` is given, the radial membrane force is
    returned as the polynomial ``N_r R²/(E h³) = S / (3 (1 - nu²) y)``.
    """
    nu_exact = _exact(nu)
    if not 0 < nu_exact < Fraction(1, 2):
        raise InvalidPoisson(f"Poisson ratio must lie in (0, 1/2), got {nu}")
    k = 3.0 * (1.0 - float(nu_exact) ** 2)
    w0 = float(a) / math.sqrt(k)
    p = 4.0 * float(q_load) / k**1.5
    nr = None
    if s is not None:
        nr = shift_down_by_y(s) * s.backend.coerce(1 / (3 * (1 - nu_exact**2)))
    return PhysicalRecord(w0, p, nr)


def state_to_backend(state: PlateState, backend) -> PlateState:
    backend = parse_backend(backend)
    return PlateState(
        state.phi.to_backend(backend),
        state.s.to_backend(backend),
        backend.coerce(state.q_load),
        backend.coerce(state.a),
    )
