"""Choosing the convergence-control parameter by minimising the squared residual.

The residual ``E(c0)`` of a short probe run (a fixed homotopy order, or a
fixed number of iterations) is sampled on a uniform grid, then the best grid
cell is refined by golden-section search.
"""
from __future__ import annotations

import enum
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import AllEvaluationsDiverged, HamError
from .ham import HamConfig, solve_ham
from .iterate import IterateConfig, run_iteration
from .plate import BoundaryCondition
from .polyseries import F64, Backend, parse_backend

_INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0
NON_ITERATIVE_BACKEND = "bigfloat:128"
REFINED_DIPS = 3


class SearchMode(enum.Enum):
    NON_ITERATIVE = "non-iterative"
    ITERATIVE = "iterative"


@dataclass(frozen=True)
class SearchSpec:
    """Search settings.

    ``probe_order`` is the homotopy order in non-iterative mode and the number
    of passes in iterative mode.  ``truncation_n`` and ``inner_order`` only
    matter for iterative probes.  ``backend`` defaults to 128-bit floats for
    non-iterative probes, whose high-order coefficients defeat float64
    cancellation, and to float64 for iterative probes.
    """

    bracket: tuple = (-1.5, -0.01)
    probe_order: int = 40
    mode: SearchMode = SearchMode.NON_ITERATIVE
    grid_points: int = 15
    refine_tolerance: float = 1e-3
    backend: Backend | str | None = None
    truncation_n: int | None = 100
    inner_order: int = 1

    def __post_init__(self):
        object.__setattr__(self, "mode", SearchMode(self.mode))
        backend = self.backend
        if backend is None:
            backend = NON_ITERATIVE_BACKEND if self.mode is SearchMode.NON_ITERATIVE else F64
        object.__setattr__(self, "backend", parse_backend(backend))
        lo, hi = (float(v) for v in self.bracket)
        if not lo < hi < 0:
            raise ValueError("bracket must satisfy lo < hi < 0")
        object.__setattr__(self, "bracket", (lo, hi))
        if self.grid_points < 5:
            raise ValueError("grid_points must be at least 5")
        if self.probe_order < 1:
            raise ValueError("probe_order must be at least 1")
        if not self.refine_tolerance > 0:
            raise ValueError("refine_tolerance must be positive")

    @classmethod
    def iterative(cls, **kw) -> "SearchSpec":
        """Iterative-mode settings; 30 passes place the minimum near its converged location."""
        kw.setdefault("probe_order", 30)
        return cls(mode=SearchMode.ITERATIVE, **kw)


def residual_at(bc: BoundaryCondition, a, c0: float, spec: SearchSpec) -> float:
    """Probe residual at ``c0``; ``inf`` when the run breaks down.

    In floating point the rounding-aware upper bound is used, so probes whose
    residual drowns in cancellation noise cannot look spuriously small.
    """
    try:
        # divergent probes overflow by design; their warnings are noise here
        with np.errstate(all="ignore"):
            if spec.mode is SearchMode.NON_ITERATIVE:
                _, report = solve_ham(HamConfig(c0, spec.probe_order, bc, a, spec.backend))
            else:
                config = IterateConfig(bc=bc, a=a, c0=c0, truncation_n=spec.truncation_n,
                                       inner_order=spec.inner_order,
                                       max_iterations=spec.probe_order,
                                       backend=spec.backend, q_rtol=0.0)
                report = run_iteration(config).trace[-1]
        e = float(report.e_total) if spec.backend.exact else report.resolved_bound
    except (HamError, ArithmeticError, OverflowError, ValueError):
        return math.inf
    return e if math.isfinite(e) else math.inf


def _golden(f, lo: float, hi: float, tol: float, probes: list):
    """Golden-section search on ``[lo, hi]`` until the interval is narrower than ``tol``."""
    x1 = hi - _INV_PHI * (hi - lo)
    x2 = lo + _INV_PHI * (hi - lo)
    f1, f2 = f(x1), f(x2)
    probes += [(x1, f1), (x2, f2)]
    while hi - lo >= tol:
        if f1 <= f2:
            hi, x2, f2 = x2, x1, f1
            x1 = hi - _INV_PHI * (hi - lo)
            f1 = f(x1)
            probes.append((x1, f1))
        else:
            lo, x1, f1 = x1, x2, f2
            x2 = lo + _INV_PHI * (hi - lo)
            f2 = f(x2)
            probes.append((x2, f2))
    return probes


def search(objective, spec: SearchSpec, grid_values=None):
    """Grid-then-golden minimisation of ``objective`` over ``spec.bracket``.

    Golden-section refinement runs in the neighbouring cells of each of the
    lowest grid-local minima, and the best probe overall wins.

    ``grid_values`` may supply precomputed grid residuals.  Returns
    ``(c0_star, curve)`` with the curve sorted by ``c0``.
    """
    lo, hi = spec.bracket
    n = spec.grid_points
    grid = [lo + (hi - lo) * i / (n - 1) for i in range(n)]
    values = list(grid_values) if grid_values is not None else [objective(c) for c in grid]
    if all(math.isinf(v) for v in values):
        raise AllEvaluationsDiverged(f"every probe in {spec.bracket} diverged")
    probes = list(zip(grid, values))
    if all(v == 0 for v in values):
        return 0.5 * (lo + hi), sorted(probes)
    # the curve may have several dips; refine the deepest few grid minima
    dips = [i for i in range(n)
            if values[i] <= values[max(i - 1, 0)] and values[i] <= values[min(i + 1, n - 1)]]
    for best in sorted(dips, key=lambda i: values[i])[:REFINED_DIPS]:
        left, right = grid[max(best - 1, 0)], grid[min(best + 1, n - 1)]
        _golden(objective, left, right, spec.refine_tolerance, probes)
    curve = sorted(probes)
    c0_star = min(curve, key=lambda p: p[1])[0]
    return c0_star, curve


def _probe(args):
    bc, a, c0, spec = args
    return residual_at(bc, a, c0, spec)


def optimize_c0(bc: BoundaryCondition, a, spec: SearchSpec | None = None, workers: int = 1):
    """Return ``(c0_star, curve)`` where ``curve`` lists every ``(c0, E)`` probed."""
    spec = spec or SearchSpec()
    lo, hi = spec.bracket
    n = spec.grid_points
    grid = [lo + (hi - lo) * i / (n - 1) for i in range(n)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            values = list(pool.map(_probe, [(bc, a, c, spec) for c in grid]))
    else:
        values = [residual_at(bc, a, c, spec) for c in grid]
    return search(lambda c: residual_at(bc, a, c, spec), spec, values)
