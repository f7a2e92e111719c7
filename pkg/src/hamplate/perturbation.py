"""Classical perturbation and modified-iteration schemes for the plate.

Every scheme here reduces to a sequence of linear problems of the form
``y² u'' = f`` with ``u(0) = 0``, an edge relation at ``y = 1`` and, for the
slope variable, possibly an unknown load multiplying ``y²`` fixed by an
integral side condition.  These are solved directly (no homotopy machinery)
so that the correspondence checks at the bottom of the module compare two
independent computations.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from fractions import Fraction

from .errors import EquivalenceViolation, SingularBoundarySystem
from .ham import ZeroGuessSeries, ham_zero_guess_series
from .iterate import IterateConfig, iteration_steps
from .plate import BoundaryCondition, edge_defect
from .polyseries import (
    RATIONAL,
    Polynomial,
    integral_over_y_on_01,
    integrate_twice_from_zero,
    parse_backend,
    shift_down_by_y2,
)


class Quantity(enum.Enum):
    LOAD = "load"
    CENTRAL_DEFLECTION = "central-deflection"
    GENERIC = "generic"


@dataclass
class PerturbationSeries:
    """Order-indexed terms; ``phi_terms[i]`` multiplies ``zeta**(2i+1)``."""

    phi_terms: list
    s_terms: list
    q_terms: list
    w_terms: list
    quantity: Quantity

    @property
    def orders(self) -> int:
        return len(self.phi_terms)

    def evaluate(self, zeta):
        """Sum the series at perturbation quantity ``zeta``: ``(phi, S, Q, W(0))``."""
        if not self.phi_terms:
            raise ValueError("empty series")
        backend = self.phi_terms[0].backend
        zeta = backend.coerce(zeta)
        with backend.context():
            phi = Polynomial.zero(backend)
            s = Polynomial.zero(backend)
            q = w = backend.coerce(0)
            for i in range(self.orders):
                odd, even = zeta ** (2 * i + 1), zeta ** (2 * i + 2)
                phi = phi + self.phi_terms[i] * odd
                s = s + self.s_terms[i] * even
                q = q + self.q_terms[i] * odd
                w = w + self.w_terms[i] * odd
        return phi, s, q, w


@dataclass(frozen=True)
class QuantityLink:
    """Linear side condition ``load_weight*Q_m + deflection_weight*W_m = (1 if m == 1 else 0)``.

    It ties the perturbation quantity to the physical unknowns; ``load()``
    expands in the load and ``central_deflection()`` in ``W(0)``.
    """

    load_weight: Fraction
    deflection_weight: Fraction

    @classmethod
    def load(cls) -> "QuantityLink":
        return cls(Fraction(1), Fraction(0))

    @classmethod
    def central_deflection(cls) -> "QuantityLink":
        return cls(Fraction(0), Fraction(1))

    def rhs(self, m: int) -> Fraction:
        return Fraction(1) if m == 1 else Fraction(0)


# -- direct linear solves ---------------------------------------------------

def _particular(f: Polynomial) -> Polynomial:
    """A solution of ``y² u'' = f`` vanishing with its slope at 0."""
    return integrate_twice_from_zero(shift_down_by_y2(f))


def _fix_edge(u: Polynomial, coef) -> Polynomial:
    backend = u.backend
    with backend.context():
        # adding D*y changes the edge defect by -D
        d = edge_defect(u, coef)
    return u + Polynomial.monomial(1, d, backend)


def _solve_slope(f: Polynomial, lam, load_weight, deflection_weight, rhs):
    """Solve ``y² u'' = f + Q y²`` with the edge relation and the linear link
    ``load_weight*Q + deflection_weight*W = rhs`` where ``W = -∫0^1 u/e``.

    Returns ``(u, Q, W)``.
    """
    backend = f.backend
    with backend.context():
        half_y2 = Polynomial.monomial(2, Fraction(1, 2), backend)
        base = _fix_edge(_particular(f), lam)
        unit = _fix_edge(half_y2, lam)  # response to Q = 1
        w_base = -integral_over_y_on_01(base)
        w_unit = -integral_over_y_on_01(unit)
        alpha, beta = backend.coerce(load_weight), backend.coerce(deflection_weight)
        denom = alpha + beta * w_unit
        if denom == 0:
            raise SingularBoundarySystem("perturbation link does not determine the load")
        q = (backend.coerce(rhs) - beta * w_base) / denom
        u = base + unit * q
        w = w_base + w_unit * q
    return u, q, w


def _membrane(f: Polynomial, mu) -> Polynomial:
    return _fix_edge(_particular(f), mu)


def _half(backend):
    return backend.coerce(Fraction(1, 2))


# -- the expansions -----------------------------------------------------------

def vincent_series(bc: BoundaryCondition, orders: int, backend=RATIONAL) -> PerturbationSeries:
    """Expansion in powers of the load ``Q`` (odd powers for phi, even for S)."""
    if orders < 1:
        raise ValueError("orders must be at least 1")
    backend = parse_backend(backend)
    phis, ss, ws = [], [], []
    with backend.context():
        y2 = Polynomial.monomial(2, 1, backend)
        for i in range(orders):
            if i == 0:
                f = y2
            else:
                f = Polynomial.zero(backend)
                for j in range(i):
                    f = f + phis[j] * ss[i - 1 - j]
            phi = _fix_edge(_particular(f), bc.lam)
            phis.append(phi)
            ws.append(-integral_over_y_on_01(phi))
            g = Polynomial.zero(backend)
            for j in range(i + 1):
                g = g + phis[j] * phis[i - j]
            ss.append(_membrane(g * -_half(backend), bc.mu))
        qs = [backend.coerce(1)] + [backend.coerce(0)] * (orders - 1)
    return PerturbationSeries(phis, ss, qs, ws, Quantity.LOAD)


def chien_series(bc: BoundaryCondition, orders: int, backend=RATIONAL) -> PerturbationSeries:
    """Expansion in powers of the central deflection ``W(0)``."""
    if orders < 1:
        raise ValueError("orders must be at least 1")
    backend = parse_backend(backend)
    phis, ss, qs = [], [], []
    with backend.context():
        for i in range(orders):
            f = Polynomial.zero(backend)
            for j in range(i):
                f = f + phis[j] * ss[i - 1 - j]
            # -∫ phi_1/e = 1 and -∫ phi_i/e = 0 beyond the first order
            phi, q, _ = _solve_slope(f, bc.lam, 0, 1, 1 if i == 0 else 0)
            phis.append(phi)
            qs.append(q)
            g = Polynomial.zero(backend)
            for j in range(i + 1):
                g = g + phis[j] * phis[i - j]
            ss.append(_membrane(g * -_half(backend), bc.mu))
        ws = [backend.coerce(1)] + [backend.coerce(0)] * (orders - 1)
    return PerturbationSeries(phis, ss, qs, ws, Quantity.CENTRAL_DEFLECTION)


def generic_perturbation(bc: BoundaryCondition, orders: int, quantity_link: QuantityLink,
                         backend=RATIONAL) -> PerturbationSeries:
    """Expansion in an arbitrary quantity tied to ``(Q, W(0))`` by ``quantity_link``."""
    backend = parse_backend(backend)
    phis, ss, qs, ws = [], [], [], []
    with backend.context():
        s_prev = [Polynomial.zero(backend)]  # S_0 = 0
        for m in range(1, orders + 1):
            f = Polynomial.zero(backend)
            for i in range(1, m):
                f = f + phis[i - 1] * s_prev[m - i]
            phi, q, w = _solve_slope(f, bc.lam, quantity_link.load_weight,
                                     quantity_link.deflection_weight, quantity_link.rhs(m))
            phis.append(phi)
            qs.append(q)
            ws.append(w)
            g = Polynomial.zero(backend)
            for i in range(1, m + 1):
                g = g + phis[i - 1] * phis[m - i]
            s_m = _membrane(g * -_half(backend), bc.mu)
            ss.append(s_m)
            s_prev.append(s_m)
    if quantity_link == QuantityLink.load():
        quantity = Quantity.LOAD
    elif quantity_link == QuantityLink.central_deflection():
        quantity = Quantity.CENTRAL_DEFLECTION
    else:
        quantity = Quantity.GENERIC
    return PerturbationSeries(phis, ss, qs, ws, quantity)


# -- modified iteration ---------------------------------------------------------

@dataclass
class ModifiedIterationState:
    theta: Polynomial  # slope iterate after the cycle
    psi: Polynomial  # membrane iterate used in the cycle
    q_n: object
    n: int
    a: object


def modified_iteration_history(bc: BoundaryCondition, a, iterations: int, backend=RATIONAL) -> list:
    """Alternate membrane and slope solves starting from the quadratic slope profile.

    Entry ``n-1`` holds ``(theta_{n+1}, psi_n, Q_n)`` for cycle ``n``.
    """
    if iterations < 1:
        raise ValueError("iterations must be at least 1")
    backend = parse_backend(backend)
    history = []
    with backend.context():
        lam = backend.coerce(bc.lam)
        a_b = backend.coerce(a)
        k = -2 * a_b / (2 * lam + 1)
        theta = Polynomial([0, k * (lam + 1), -k], backend)
        for n in range(1, iterations + 1):
            psi = _membrane(theta * theta * -_half(backend), bc.mu)
            theta_next, q_n, _ = _solve_slope(theta * psi, bc.lam, 0, 1, a_b)
            history.append(ModifiedIterationState(theta_next, psi, q_n, n, a_b))
            theta = theta_next
    return history


def modified_iteration(bc: BoundaryCondition, a, iterations: int, backend=RATIONAL):
    """Run the modified iteration; return ``(final_state, [Q_1, ..., Q_n])``."""
    history = modified_iteration_history(bc, a, iterations, backend)
    return history[-1], [h.q_n for h in history]


# -- correspondence checks ------------------------------------------------------

@dataclass
class EquivalenceReport:
    check: str
    boundary: str
    compared: int
    passed: bool
    mismatch: str | None = None
    details: list = field(default_factory=list)

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        tail = "" if self.passed else f" -- first mismatch: {self.mismatch}"
        return f"{status} {self.check} [{self.boundary}] {self.compared} terms compared{tail}"


def _first_difference(label: str, p: Polynomial, q: Polynomial) -> str | None:
    if p == q:
        return None
    n = max(len(p), len(q))
    for k in range(n):
        if p.coeff(k) != q.coeff(k):
            return f"{label}: coefficient of y^{k} is {p.coeff(k)} vs {q.coeff(k)}"
    return f"{label}: backends differ"


def _scalar_difference(label, x, y) -> str | None:
    return None if x == y else f"{label}: {x} vs {y}"


def _finish(report: EquivalenceReport, diffs: list, raise_on_failure: bool) -> EquivalenceReport:
    report.details = diffs
    if diffs:
        report.passed = False
        report.mismatch = diffs[0]
        if raise_on_failure:
            raise EquivalenceViolation(report.line(), detail=report)
    return report


def check_perturbation_equivalence(bc: BoundaryCondition, orders: int, method: str = "vincent",
                                 c0=-1, zeta=1, raise_on_failure: bool = True) -> EquivalenceReport:
    """Compare the zero-guess homotopy at ``c0`` with a perturbation expansion.

    ``method="vincent"`` embeds the load, ``method="chien"`` the central
    deflection.  Term ``m`` of the homotopy must equal the perturbation term
    scaled by ``zeta**(2m-1)`` (slope, load, deflection) or ``zeta**(2m)``
    (membrane), exactly.
    """
    if orders > 6:
        raise ValueError("orders above 6 are refused (rational coefficient growth)")
    if method not in ("vincent", "chien"):
        raise ValueError("method must be 'vincent' or 'chien'")
    embedding = "load" if method == "vincent" else "deflection"
    zeta = RATIONAL.coerce(zeta)
    ham: ZeroGuessSeries = ham_zero_guess_series(bc, orders, c0, embedding, zeta, RATIONAL)
    ref = vincent_series(bc, orders) if method == "vincent" else chien_series(bc, orders)
    diffs = []
    for i in range(orders):
        m = i + 1
        odd, even = zeta ** (2 * m - 1), zeta ** (2 * m)
        for d in (
            _first_difference(f"phi_{m}", ham.phi_terms[i], ref.phi_terms[i] * odd),
            _first_difference(f"S_{m}", ham.s_terms[i], ref.s_terms[i] * even),
            _scalar_difference(f"Q_{m}", ham.q_terms[i], ref.q_terms[i] * odd),
            _scalar_difference(f"W_{m}", ham.w_terms[i], ref.w_terms[i] * odd),
        ):
            if d:
                diffs.append(d)
    report = EquivalenceReport(f"zero-guess homotopy vs {method} c0={c0}", bc.label, 4 * orders, True)
    return _finish(report, diffs, raise_on_failure)


def check_iteration_equivalence(bc: BoundaryCondition, a, cycles: int, c0=-1,
                                 raise_on_failure: bool = True) -> EquivalenceReport:
    """Compare first-order homotopy iteration (membrane first, no truncation)
    with the modified iteration, cycle by cycle and exactly.
    """
    if cycles > 4:
        raise ValueError("cycles above 4 are refused (rational coefficient growth)")
    history = modified_iteration_history(bc, a, cycles)
    config = IterateConfig(bc=bc, a=RATIONAL.coerce(a), c0=RATIONAL.coerce(c0), truncation_n=None,
                           inner_order=1, ordering="s_first", backend=RATIONAL,
                           max_iterations=cycles, target_residual=1e-300)
    diffs = []
    steps = iteration_steps(config)
    for n in range(1, cycles + 1):
        step = next(steps)
        ref = history[n - 1]
        for d in (
            _first_difference(f"theta_{n + 1}", step.state.phi, ref.theta),
            _first_difference(f"psi_{n}", step.state.s, ref.psi),
            _scalar_difference(f"Q_{n}", step.state.q_load, ref.q_n),
        ):
            if d:
                diffs.append(d)
    report = EquivalenceReport(f"iteration vs modified iteration c0={c0}", bc.label, 3 * cycles, True)
    return _finish(report, diffs, raise_on_failure)
