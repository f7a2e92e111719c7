"""Homotopy-series solutions of the large-deflection circular plate equations."""

__version__ = "0.1.0"

from .c0search import SearchMode, SearchSpec, optimize_c0
from .errors import (
    AllEvaluationsDiverged,
    BackendMismatch,
    DegenerateLambda,
    EquivalenceViolation,
    HamError,
    InvalidPoisson,
    MinDegreeViolation,
    NonFiniteCoefficient,
    NotConverged,
    OutOfValidatedRange,
    SingularBoundarySystem,
)
from .ham import (
    HamConfig,
    SolutionSeries,
    deformation_rhs,
    empirical_c0_noniter,
    geometric_homotopy_sum,
    geometric_homotopy_terms,
    ham_zero_guess_series,
    initial_guesses,
    solve_ham,
)
from .iterate import (
    IterateConfig,
    empirical_c0_iter,
    iterate,
    run_iteration,
    sweep,
    truncation_order,
)
from .perturbation import (
    QuantityLink,
    check_perturbation_equivalence,
    check_iteration_equivalence,
    chien_series,
    generic_perturbation,
    modified_iteration,
    vincent_series,
)
from .plate import (
    BoundaryCondition,
    BoundaryKind,
    PlateState,
    central_deflection,
    deflection,
    make_boundary,
    squared_residual,
    to_physical,
)
from .polyseries import F64, RATIONAL, BigFloatBackend, Polynomial, parse_backend
