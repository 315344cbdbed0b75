"""Exception hierarchy for linres."""


class LinresError(Exception):
    """Base class for all errors raised by linres."""


class ValidationError(LinresError, ValueError):
    """Invalid input: wrong shape, non-finite entries, bad parameter."""


class NumericalError(LinresError, ArithmeticError):
    """A numerical routine failed or produced an untrustworthy result."""


class ConvergenceError(NumericalError):
    """An iterative eigen-solver did not converge."""


class ConditioningError(NumericalError):
    """The characteristic polynomial could not be recovered reliably."""


class DivergenceError(NumericalError):
    """Coefficients or states blew up, typically because rho >= 1."""


class FullRankError(LinresError):
    """The controllability matrix has no nullspace to work with."""
