"""Exception and warning types raised by signum."""


class SignumError(Exception):
    """Base class for all library errors."""


class ShapeError(SignumError, ValueError):
    pass


class SingularMatrix(SignumError, ArithmeticError):
    """An LU pivot fell below the singularity floor."""


class SingularIterate(SingularMatrix):
    """A Newton iterate could not be inverted.

    Usually means an eigenvalue of the input sits on (or very near) the
    imaginary axis, where the sign function is undefined.
    """


class SingularW12(SingularMatrix):
    """The (1, 2) block of the Riccati sign matrix is not invertible."""


class SolverFailure(SignumError):
    """Base for iteration failures; ``result`` holds the partial run."""

    def __init__(self, message, result=None):
        super().__init__(message)
        self.result = result


class MaxIterExceeded(SolverFailure):
    pass


class Diverged(SolverFailure):
    pass


class ConsistencyError(SignumError):
    """A post-condition check on a derived quantity failed."""


class MatrixMarketError(SignumError, ValueError):
    pass


class NsPreconditionWarning(UserWarning):
    """``||I - A^2|| >= 1``: Newton-Schulz convergence is not guaranteed."""
