"""Homotopy-series solution of the plate equations.

With auxiliary operator ``L = d²/dy²`` and auxiliary functions
``H1 = H2 = 1/y²`` the m-th order deformation equations integrate in closed
form::

    phi_m = chi_m phi_{m-1} + c0 ∫0^y ∫0^η delta1_{m-1}(t)/t² dt dη + D1 y
    S_m   = chi_m S_{m-1}   + c0 ∫0^y ∫0^η delta2_{m-1}(t)/t² dt dη + D3 y

The load term ``Q_{m-1}`` enters ``delta1`` linearly, so ``(Q_{m-1}, D1)``
follow from a single 2x2 solve (edge condition plus the integral restriction
pinning the central deflection).  ``D3`` follows from the edge condition on
``S`` alone.
"""
from __future__ import annotations

import math
import time
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from typing import NamedTuple

from .errors import (
    DegenerateLambda,
    NonFiniteCoefficient,
    OutOfValidatedRange,
    SingularBoundarySystem,
)
from .plate import (
    BoundaryCondition,
    PlateState,
    ResidualReport,
    edge_defect,
    squared_residual,
    y2_second_derivative,
)
from .polyseries import (
    F64,
    RATIONAL,
    Backend,
    Polynomial,
    integral_over_y_on_01,
    integrate_twice_from_zero,
    parse_backend,
    shift_down_by_y2,
    truncate,
)


def chi(m: int) -> int:
    return 0 if m <= 1 else 1


@dataclass(frozen=True)
class HamConfig:
    c0: object
    order_m: int
    bc: BoundaryCondition
    a: object
    backend: Backend = F64

    def __post_init__(self):
        object.__setattr__(self, "backend", parse_backend(self.backend))
        if self.c0 == 0:
            raise ValueError("the convergence-control parameter must be nonzero")
        if self.order_m < 1:
            raise ValueError("order_m must be at least 1")


@dataclass
class SolutionSeries:
    """Homotopy terms ``phi_m``, ``S_m`` (m = 0..M) and loads ``Q_m`` (m = 0..M-1)."""

    phi_terms: list
    s_terms: list
    q_terms: list
    bc: BoundaryCondition
    a: object
    reports: dict = field(default_factory=dict)

    @property
    def backend(self) -> Backend:
        return self.phi_terms[0].backend

    @property
    def order(self) -> int:
        return len(self.phi_terms) - 1

    def phi(self, order: int | None = None) -> Polynomial:
        return _psum(self.phi_terms[: _upto(order, self) + 1], self.backend)

    def s(self, order: int | None = None) -> Polynomial:
        return _psum(self.s_terms[: _upto(order, self) + 1], self.backend)

    def q(self, order: int | None = None):
        """Load after ``order`` steps: ``Q_0 + ... + Q_{order-1}``."""
        terms = self.q_terms[: _upto(order, self)]
        with self.backend.context():
            total = self.backend.coerce(0)
            for t in terms:
                total = total + t
        return total

    def state(self, order: int | None = None) -> PlateState:
        backend = self.backend
        return PlateState(self.phi(order), self.s(order), self.q(order), backend.coerce(self.a))


def _upto(order, series) -> int:
    return series.order if order is None else order


def _psum(terms, backend) -> Polynomial:
    total = Polynomial.zero(backend)
    for t in terms:
        total = total + t
    return total


def initial_guesses(bc: BoundaryCondition, a, backend=F64):
    """Quadratic starting profiles satisfying every boundary condition.

    ``phi0 = -2a((lam+1) y - y²)/(2 lam + 1)`` and ``S0 = (mu+1) y - y²``.
    """
    backend = parse_backend(backend)
    if 2 * bc.lam + 1 == 0:
        raise DegenerateLambda("2*lambda + 1 vanishes")
    lam, mu = backend.coerce(bc.lam), backend.coerce(bc.mu)
    a = backend.coerce(a)
    with backend.context():
        k = -2 * a / (2 * lam + 1)
        phi0 = Polynomial([0, k * (lam + 1), -k], backend)
        s0 = Polynomial([0, mu + 1, -1], backend)
    return phi0, s0


class DeformationRHS(NamedTuple):
    """Right-hand sides of the order-m deformation equations (before ``c0 H``).

    ``delta1 = d1_known + Q_{m-1} * q_slot`` where ``q_slot = -y²``.
    """

    d1_known: Polynomial
    d2: Polynomial
    q_slot: Polynomial


def deformation_rhs(series: SolutionSeries, m: int) -> DeformationRHS:
    if m < 1 or len(series.phi_terms) < m or len(series.s_terms) < m:
        raise ValueError(f"terms 0..{m - 1} are required for order {m}")
    backend = series.backend
    phis, ss = series.phi_terms, series.s_terms
    d1 = y2_second_derivative(phis[m - 1])
    d2 = y2_second_derivative(ss[m - 1])
    cross = Polynomial.zero(backend)
    for k in range(m):
        cross = cross + phis[k] * ss[m - 1 - k]
    d1 = d1 - cross
    # sum of phi_k phi_{m-1-k} is symmetric: pair off the terms
    sq = Polynomial.zero(backend)
    for k in range((m + 1) // 2):
        j = m - 1 - k
        prod = phis[k] * phis[j]
        sq = sq + (prod if k == j else prod * 2)
    d2 = d2 + sq * backend.coerce(Fraction(1, 2))
    return DeformationRHS(d1, d2, Polynomial.monomial(2, -1, backend))


def _check_finite(p: Polynomial, what: str, m: int):
    if not p.all_finite():
        raise NonFiniteCoefficient(f"non-finite coefficient in {what} at order {m}", order=m)


def _rhs_particular(delta: Polynomial, c0, truncation):
    """``c0 ∫∫ trunc_N(delta / y²)``."""
    h = shift_down_by_y2(delta)
    if truncation is not None:
        h = truncate(h, truncation)
    return integrate_twice_from_zero(h) * c0


def solve_phi_unknowns(known: Polynomial, slot: Polynomial, lam, restriction):
    """Find ``(x, D)`` so ``known + x*slot + D*y`` meets the edge relation and
    ``∫0^1 (.)/e de = restriction``.
    """
    backend = known.backend
    y = Polynomial.monomial(1, 1, backend)
    with backend.context():
        a11, a12 = edge_defect(slot, lam), edge_defect(y, lam)
        a21, a22 = integral_over_y_on_01(slot), integral_over_y_on_01(y)
        b1 = -edge_defect(known, lam)
        b2 = backend.coerce(restriction) - integral_over_y_on_01(known)
        det = a11 * a22 - a12 * a21
        if det == 0 or (not backend.exact and abs(det) < 1e-300):
            raise SingularBoundarySystem("edge/restriction system is singular")
        x = (b1 * a22 - a12 * b2) / det
        d = (a11 * b2 - a21 * b1) / det
    return x, d


def solve_edge_only(known: Polynomial, coef) -> Polynomial:
    """Add ``D y`` to ``known`` so that the edge relation with ``coef`` holds."""
    backend = known.backend
    y = Polynomial.monomial(1, 1, backend)
    with backend.context():
        # edge_defect(y) = -1 for every coefficient
        d = edge_defect(known, coef) / -edge_defect(y, coef)
    return known + y * d


def solve_s_step(series: SolutionSeries, m: int, c0, truncation=None, rhs=None) -> Polynomial:
    backend = series.backend
    c0 = backend.coerce(c0)
    rhs = rhs or deformation_rhs(series, m)
    known = _rhs_particular(rhs.d2, c0, truncation)
    if chi(m):
        known = known + series.s_terms[m - 1]
    s_m = solve_edge_only(known, series.bc.mu)
    _check_finite(s_m, "S", m)
    return s_m


def solve_phi_step(series: SolutionSeries, m: int, c0, truncation=None, rhs=None):
    backend = series.backend
    c0 = backend.coerce(c0)
    rhs = rhs or deformation_rhs(series, m)
    known = _rhs_particular(rhs.d1_known, c0, truncation)
    if chi(m):
        known = known + series.phi_terms[m - 1]
    # the load slot -y² contributes c0 * ∫∫(-1) = -c0 y²/2 per unit Q_{m-1}
    slot = integrate_twice_from_zero(shift_down_by_y2(rhs.q_slot)) * c0
    q_prev, d1 = solve_phi_unknowns(known, slot, series.bc.lam, 0)
    with backend.context():
        phi_m = known + slot * q_prev + Polynomial.monomial(1, d1, backend)
    _check_finite(phi_m, "phi", m)
    return phi_m, q_prev


def solve_order_step(series: SolutionSeries, m: int, c0, truncation=None):
    """Return ``(phi_m, S_m, Q_{m-1})`` from terms ``0..m-1``."""
    if m < 1:
        raise ValueError("order step requires m >= 1")
    rhs = deformation_rhs(series, m)
    phi_m, q_prev = solve_phi_step(series, m, c0, truncation, rhs)
    s_m = solve_s_step(series, m, c0, truncation, rhs)
    return phi_m, s_m, q_prev


def start_series(bc: BoundaryCondition, a, backend=F64, phi0=None, s0=None) -> SolutionSeries:
    backend = parse_backend(backend)
    if phi0 is None or s0 is None:
        g_phi, g_s = initial_guesses(bc, a, backend)
        phi0 = g_phi if phi0 is None else phi0
        s0 = g_s if s0 is None else s0
    return SolutionSeries([phi0], [s0], [], bc, a)


def extend(series: SolutionSeries, order: int, c0, truncation=None) -> SolutionSeries:
    """Append deformation terms in place until the series reaches ``order``."""
    with series.backend.context():
        for m in range(series.order + 1, order + 1):
            phi_m, s_m, q_prev = solve_order_step(series, m, c0, truncation)
            series.phi_terms.append(phi_m)
            series.s_terms.append(s_m)
            series.q_terms.append(q_prev)
    return series


def solve_ham(config: HamConfig, checkpoints=()):
    """Run orders 1..M from the quadratic initial guesses.

    Returns the series and the residual report of the order-M approximation.
    Residual reports for each order in ``checkpoints`` are stored in
    ``series.reports``.
    """
    backend = config.backend
    series = start_series(config.bc, config.a, backend)
    wanted = sorted({int(c) for c in checkpoints if 0 <= int(c) <= config.order_m} | {config.order_m})
    t0 = time.process_time()
    with backend.context():
        for target in wanted:
            extend(series, target, config.c0)
            report = squared_residual(series.state(target), target)
            report.cpu_seconds = time.process_time() - t0
            series.reports[target] = report
    return series, series.reports[config.order_m]


def empirical_c0_noniter(a) -> float:
    """Residual-optimal ``c0`` for the clamped plate without iteration (0 <= a <= 5)."""
    a = float(a)
    if not 0 <= a <= 5:
        warnings.warn(f"a={a} lies outside the validated range [0, 5]", OutOfValidatedRange, stacklevel=2)
    return -50.0 / (50.0 + 0.45 * abs(a) ** 3.5)


# -- the geometric-series illustration of convergence control -------------

def geometric_homotopy_terms(c0, m: int, n: int):
    """Coefficient of ``(-t)^n`` in the order-m homotopy approximation of ``1/(1+t)``."""
    if not 0 <= n <= m:
        raise ValueError("need 0 <= n <= m")
    if n == 0:
        return c0 * 0 + 1
    total = 0
    base = 1 + c0
    power = c0 * 0 + 1
    for k in range(m - n + 1):
        total = total + math.comb(n - 1 + k, k) * power
        power = power * base
    return (-c0) ** n * total


def geometric_homotopy_sum(c0, m: int, t):
    """Partial sum ``sum_n mu(c0, m, n) (-t)^n``; tends to ``1/(1+t)``.

    Summed in exact rationals (floats read by their decimal repr) because the
    alternating terms grow like ``t**m`` and would cancel catastrophically.
    A float result is returned unless both inputs were already exact.
    """
    exact = all(isinstance(v, (int, Fraction)) for v in (c0, t))
    c0_q, t_q = RATIONAL.coerce(c0), RATIONAL.coerce(t)
    total = sum(geometric_homotopy_terms(c0_q, m, n) * (-t_q) ** n for n in range(m + 1))
    return total if exact else float(total)


# -- zero-initial-guess variant used for the perturbation correspondence ----

@dataclass
class ZeroGuessSeries:
    """Terms of the homotopy built from zero initial guesses, orders 1..K."""

    phi_terms: list
    s_terms: list
    q_terms: list
    w_terms: list
    embedding: str
    zeta: object


def ham_zero_guess_series(bc: BoundaryCondition, orders: int, c0, embedding="load",
                          zeta=1, backend="rational") -> ZeroGuessSeries:
    """Homotopy with ``phi_0 = S_0 = 0`` and the load or deflection embedded linearly.

    ``embedding="load"`` fixes ``Q~_1 = zeta`` and ``Q~_m = 0`` afterwards;
    ``embedding="deflection"`` fixes ``W~_1 = zeta`` and ``W~_m = 0``, solving
    each ``Q~_m`` from the restriction.  The order-m equations are::

        y² (phi_m - chi_m phi_{m-1})'' = c0 (y² phi_{m-1}'' - sum_{i<m} phi_i S_{m-i} - Q~_m y²)
        y² (S_m - chi_m S_{m-1})''     = c0 (y² S_{m-1}'' + 1/2 sum_{i=1..m} phi_i phi_{m+1-i})
    """
    if embedding not in ("load", "deflection"):
        raise ValueError("embedding must be 'load' or 'deflection'")
    backend = parse_backend(backend)
    zero = Polynomial.zero(backend)
    phis, ss, qs, ws = [zero], [zero], [], []
    with backend.context():
        c0 = backend.coerce(c0)
        zeta = backend.coerce(zeta)
        half = backend.coerce(Fraction(1, 2))
        y = Polynomial.monomial(1, 1, backend)
        for m in range(1, orders + 1):
            d1 = y2_second_derivative(phis[m - 1])
            for i in range(1, m):
                d1 = d1 - phis[i] * ss[m - i]
            known = integrate_twice_from_zero(shift_down_by_y2(d1)) * c0
            if chi(m):
                known = known + phis[m - 1]
            slot = Polynomial.monomial(2, -c0 * half, backend)
            if embedding == "load":
                q_m = zeta if m == 1 else backend.coerce(0)
                phi_m = solve_edge_only(known + slot * q_m, bc.lam)
            else:
                w_m = zeta if m == 1 else backend.coerce(0)
                q_m, d = solve_phi_unknowns(known, slot, bc.lam, -w_m)
                phi_m = known + slot * q_m + y * d
            phis.append(phi_m)
            qs.append(q_m)
            ws.append(-integral_over_y_on_01(phi_m))

            d2 = y2_second_derivative(ss[m - 1])
            for i in range(1, m + 1):
                d2 = d2 + phis[i] * phis[m + 1 - i] * half
            known_s = integrate_twice_from_zero(shift_down_by_y2(d2)) * c0
            if chi(m):
                known_s = known_s + ss[m - 1]
            ss.append(solve_edge_only(known_s, bc.mu))
    return ZeroGuessSeries(phis[1:], ss[1:], qs, ws, embedding, zeta)
