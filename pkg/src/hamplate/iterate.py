"""Iterated homotopy solver.

Each pass runs ``inner_order`` deformation steps, then restarts from the
resulting partial sums.  Deformation right-hand sides are truncated to degree
``N`` so the polynomial degree stays bounded across passes.
"""
from __future__ import annotations

import math
import time
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

from .errors import HamError, NonFiniteCoefficient, NotConverged, OutOfValidatedRange
from .ham import (
    SolutionSeries,
    deformation_rhs,
    extend,
    initial_guesses,
    solve_phi_step,
    solve_s_step,
)
from .plate import BoundaryCondition, BoundaryKind, PlateState, ResidualReport, squared_residual, to_physical
from .polyseries import F64, Backend, Polynomial, parse_backend

# truncation-order slope per boundary kind: N = max(100, gamma * a)
GAMMA = {
    BoundaryKind.CLAMPED: 10,
    BoundaryKind.MOVEABLE_CLAMPED: 13,
    BoundaryKind.SIMPLE_SUPPORT: 7,
    BoundaryKind.SIMPLE_HINGED: 5,
}

# (numerator k, exponent p, validated a_max) for c0 = -k / (k + a**p)
_C0_ITER = {
    BoundaryKind.CLAMPED: (26.0, 2.0, 35.0),
    BoundaryKind.MOVEABLE_CLAMPED: (39.0, 2.0, 35.0),
    BoundaryKind.SIMPLE_SUPPORT: (80.0, 2.0, 50.0),
    BoundaryKind.SIMPLE_HINGED: (40.0, 2.5, 50.0),
}

ORDERINGS = ("main", "s_first")


def truncation_order(bc: BoundaryCondition, a) -> int:
    if float(a) < 0:
        raise ValueError("a must be non-negative")
    return max(100, math.ceil(GAMMA[bc.kind] * float(a) - 1e-9))


def empirical_c0_iter(bc: BoundaryCondition, a) -> float:
    k, p, a_max = _C0_ITER[bc.kind]
    a = float(a)
    if not 0 <= a <= a_max:
        warnings.warn(f"a={a} lies outside the validated range [0, {a_max:g}] for {bc.label}",
                      OutOfValidatedRange, stacklevel=2)
    return -k / (k + abs(a) ** p)


def default_target(backend: Backend) -> float:
    return 1e-16 if backend == F64 else 1e-24


def default_q_rtol(backend: Backend) -> float:
    """Load-stall tolerance: a few ulps above the working precision."""
    if backend == F64:
        return 1e-12
    if backend.exact:
        return 0.0
    return max(2.0 ** -(backend.bits - 12), 1e-300)


@dataclass(frozen=True)
class IterateConfig:
    bc: BoundaryCondition
    a: object
    c0: object
    truncation_n: int | None = 100
    inner_order: int = 1
    max_iterations: int = 200
    target_residual: float | None = None
    backend: Backend = F64
    q_rtol: float | None = None
    q_window: int = 3
    ordering: str = "main"

    def __post_init__(self):
        object.__setattr__(self, "backend", parse_backend(self.backend))
        if self.target_residual is None:
            object.__setattr__(self, "target_residual", default_target(self.backend))
        if self.q_rtol is None:
            object.__setattr__(self, "q_rtol", default_q_rtol(self.backend))
        if self.inner_order < 1:
            raise ValueError("inner_order must be at least 1")
        if self.truncation_n is not None and self.truncation_n < 2:
            raise ValueError("truncation order must be at least 2")
        if not self.target_residual > 0:
            raise ValueError("target_residual must be positive")
        if self.c0 == 0:
            raise ValueError("c0 must be nonzero")
        if self.ordering not in ORDERINGS:
            raise ValueError(f"ordering must be one of {ORDERINGS}")
        if self.ordering == "s_first" and self.inner_order != 1:
            raise ValueError("s_first ordering is defined for first-order iteration only")


@dataclass
class IterationStep:
    index: int
    state: PlateState
    series: SolutionSeries


def iteration_steps(config: IterateConfig, phi0=None, s0=None):
    """Yield the restarted state after each pass (without residual evaluation).

    With ``ordering="s_first"`` the membrane variable is updated first and the
    slope update already uses it, as in the alternating modified iteration.
    """
    backend = config.backend
    with backend.context():
        if phi0 is None or s0 is None:
            g_phi, g_s = initial_guesses(config.bc, config.a, backend)
            phi0 = g_phi if phi0 is None else phi0
            s0 = g_s if s0 is None else s0
        c0 = backend.coerce(config.c0)
        index = 0
        while True:
            index += 1
            series = SolutionSeries([phi0], [s0], [], config.bc, config.a)
            if config.ordering == "main":
                extend(series, config.inner_order, c0, config.truncation_n)
            else:
                s1 = solve_s_step(series, 1, c0, config.truncation_n)
                series = SolutionSeries([phi0], [s0 + s1], [], config.bc, config.a)
                phi1, q0 = solve_phi_step(series, 1, c0, config.truncation_n,
                                          deformation_rhs(series, 1))
                series = SolutionSeries([phi0, phi1], [s0 + s1, Polynomial.zero(backend)], [q0], config.bc, config.a)
            state = series.state()
            yield IterationStep(index, state, series)
            phi0, s0 = state.phi, state.s


@dataclass
class IterationResult:
    state: PlateState
    trace: list = field(default_factory=list)
    converged: bool = False
    reason: str = ""

    @property
    def iterations(self) -> int:
        return len(self.trace)


def run_iteration(config: IterateConfig, keep_polynomials: bool = False) -> IterationResult:
    """Iterate until the residual target or the load-stall rule is met.

    Never raises :class:`NotConverged`; inspect ``result.converged``.
    ``trace`` holds one :class:`ResidualReport` per pass; the residual
    polynomials are kept only for the final pass unless ``keep_polynomials``.
    """
    backend = config.backend
    trace = []
    best_state, best_e = None, math.inf
    t0 = time.process_time()
    stall = 0
    prev_q = None
    with backend.context():
        for step in iteration_steps(config):
            report = squared_residual(step.state, step.index)
            report.cpu_seconds = time.process_time() - t0
            e = float(report.e_total)
            if not math.isfinite(e) or not math.isfinite(float(step.state.q_load)):
                raise NonFiniteCoefficient(f"non-finite residual at iteration {step.index}",
                                           order=step.index)
            if trace and not keep_polynomials:
                trace[-1].r1 = trace[-1].r2 = None
            trace.append(report)
            if e < best_e or best_state is None:
                best_state, best_e = step.state, e
            if report.resolved_bound <= config.target_residual:
                return IterationResult(step.state, trace, True, "residual")
            q = step.state.q_load
            if prev_q is not None and config.q_rtol > 0:
                change = abs(float(q - prev_q))
                scale = abs(float(q))
                stall = stall + 1 if change <= config.q_rtol * scale else 0
                if stall >= config.q_window:
                    return IterationResult(step.state, trace, True, "load-stall")
            prev_q = q
            if step.index >= config.max_iterations:
                break
    return IterationResult(best_state, trace, False, "max-iterations")


def iterate(config: IterateConfig):
    """Run the iteration; return ``(final_state, trace)``.

    Raises :class:`NotConverged` (carrying the best state and the trace) when
    the iteration budget runs out first.
    """
    result = run_iteration(config)
    if not result.converged:
        raise NotConverged(
            f"no convergence within {config.max_iterations} iterations "
            f"(best residual {min(float(r.e_total) for r in result.trace):.3g})",
            state=result.state, trace=result.trace,
        )
    return result.state, result.trace


@dataclass
class SweepRow:
    boundary: str
    a: float
    c0: float
    N: int | None
    iterations: int
    Q: float
    residual: float
    w0_over_h: float
    p_phys: float
    converged: bool = True
    error: str = ""

    CSV_FIELDS = ("boundary", "a", "c0", "N", "iterations", "Q", "residual", "w0_over_h", "p_phys")

    def as_dict(self) -> dict:
        return {k: getattr(self, k) for k in self.CSV_FIELDS + ("converged", "error")}


def _sweep_row(bc: BoundaryCondition, a, overrides: dict) -> SweepRow:
    opts = dict(overrides)
    c0 = opts.pop("c0", None)
    n = opts.pop("truncation_n", opts.pop("N", None))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", OutOfValidatedRange)
        c0 = empirical_c0_iter(bc, a) if c0 is None else c0
    n = truncation_order(bc, a) if n is None else n
    opts.setdefault("max_iterations", 50000)
    config = IterateConfig(bc=bc, a=a, c0=c0, truncation_n=n, **opts)
    try:
        result = run_iteration(config)
    except HamError as exc:
        return SweepRow(bc.label, float(a), float(c0), n, 0, math.nan, math.nan,
                        math.nan, math.nan, False, f"{type(exc).__name__}: {exc}")
    q = float(result.state.q_load)
    phys = to_physical(a, q, bc.nu)
    return SweepRow(bc.label, float(a), float(c0), n, result.iterations, q,
                    float(result.trace[-1].e_total), phys.w0_over_h, phys.pR4_over_Eh4,
                    result.converged, "" if result.converged else "NotConverged")


def sweep(bc: BoundaryCondition, a_list, overrides: dict | None = None, workers: int = 1) -> list:
    """One iteration per load level ``a``; rows come back in input order.

    ``overrides`` may set ``c0`` and ``truncation_n`` (otherwise the empirical
    formulas apply) and any other :class:`IterateConfig` field.
    """
    a_list = list(a_list)
    if not a_list:
        raise ValueError("a_list must be non-empty")
    overrides = dict(overrides or {})
    if workers > 1 and len(a_list) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(_sweep_row, [bc] * len(a_list), a_list,
                                 [overrides] * len(a_list)))
    return [_sweep_row(bc, a, overrides) for a in a_list]
