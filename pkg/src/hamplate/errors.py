"""Exception hierarchy shared by the solver modules."""


class HamError(Exception):
    """Base class for all solver errors."""


class BackendMismatch(HamError, TypeError):
    pass


class MinDegreeViolation(HamError, ValueError):
    """A polynomial carries low-degree terms an operator cannot accept."""


class InvalidPoisson(HamError, ValueError):
    pass


class DegenerateLambda(HamError, ValueError):
    pass


class SingularBoundarySystem(HamError, ArithmeticError):
    pass


class NonFiniteCoefficient(HamError, ArithmeticError):
    def __init__(self, message, order=None):
        super().__init__(message)
        self.order = order


class NotConverged(HamError):
    """Raised when an iteration exhausts its budget.

    The best state found and the residual trace travel with the exception so
    callers can still report them.
    """

    def __init__(self, message, state=None, trace=None):
        super().__init__(message)
        self.state = state
        self.trace = trace if trace is not None else []


class EquivalenceViolation(HamError, AssertionError):
    def __init__(self, message, detail=None):
        super().__init__(message)
        self.detail = detail


class AllEvaluationsDiverged(HamError):
    pass


class OutOfValidatedRange(UserWarning):
    """An empirical formula was evaluated outside the range it was fitted on."""
