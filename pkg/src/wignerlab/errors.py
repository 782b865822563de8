"""Exception types shared across the package.

Input problems raise ``ValueError`` (or a subclass); failures of an
iterative or quadrature routine raise :class:`NumericalError`.
"""


class NumericalError(RuntimeError):
    """An algorithm failed to converge or produced an unusable result."""


class ConvergenceError(NumericalError):
    pass


class ProjectionError(NumericalError):
    pass


class SaddleError(NumericalError):
    def __init__(self, message, trace=()):
        super().__init__(message)
        self.trace = list(trace)


class PoleError(ValueError):
    """Evaluation point collides with a pole of the integrand."""
