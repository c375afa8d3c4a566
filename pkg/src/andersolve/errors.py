"""Exception hierarchy shared by the solver modules."""


class AndersolveError(Exception):
    """Base class for all package errors."""


class SingularMatrix(AndersolveError):
    """Raised by the LU solve when a pivot is numerically zero."""


class EmptyWindow(AndersolveError):
    """Least-squares request with no columns."""


class NoConvergence(AndersolveError):
    """Iterative linear solve did not reach its tolerance.

    The best iterate and its relative residual are attached so the caller
    can decide whether to accept them.
    """

    def __init__(self, achieved, solution=None, iterations=0):
        super().__init__(f"GMRES stopped at relative residual {achieved:.3e}")
        self.achieved = achieved
        self.solution = solution
        self.iterations = iterations


class NotOrthogonal(AndersolveError):
    pass


class DegenerateDamping(AndersolveError):
    """LM damping vanished on a singular normal matrix."""


class EvaluationError(AndersolveError):
    """Residual or Jacobian evaluation produced an unusable value."""


class ZeroResidual(AndersolveError):
    """The pNM step is exactly zero; the iteration has converged."""


class DegenerateDifference(AndersolveError):
    """Consecutive pNM steps coincide, so the depth-1 coefficient is undefined."""


class InvalidInput(AndersolveError, ValueError):
    pass


class ConfigError(AndersolveError, ValueError):
    pass


class InsufficientHistory(AndersolveError):
    pass
