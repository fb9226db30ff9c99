"""Exception hierarchy shared by every module."""


class SingMinError(Exception):
    """Base class for all errors raised by :mod:`singmin`."""


class ValidationError(SingMinError, ValueError):
    """Malformed input: wrong shapes, non-finite numbers, bad parameters."""


class DomainError(SingMinError, ValueError):
    """A point leaves the open halfspace ``g(q, u) > 0``.

    ``point`` holds the offending coordinates when known.
    """

    def __init__(self, message, point=None):
        super().__init__(message)
        self.point = point


class EvaluationError(SingMinError, ArithmeticError):
    """A function, gradient or Hessian produced non-finite values."""


class SingularityError(SingMinError, ArithmeticError):
    """An ODE trajectory reached the singular set ``f = 0``."""

    def __init__(self, message, abscissa=None):
        super().__init__(message)
        self.abscissa = abscissa


class NonConvergenceError(SingMinError, RuntimeError):
    """An iteration stopped without meeting its tolerance.

    ``best`` carries the best iterate found and ``residual`` its residual.
    """

    def __init__(self, message, best=None, residual=None):
        super().__init__(message)
        self.best = best
        self.residual = residual
