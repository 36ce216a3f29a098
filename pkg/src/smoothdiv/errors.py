"""Exception types shared by all modules."""


class SmoothdivError(Exception):
    """Base class for package errors."""


class DomainError(SmoothdivError, ValueError):
    """Input outside the mathematical domain of an operation."""


class ConvergenceFailure(SmoothdivError, ArithmeticError):
    """An iterative linear-algebra routine did not converge."""


class SingularInput(SmoothdivError, ValueError):
    """Support handling cannot make an operator invertible."""


class DimensionCap(SmoothdivError, ValueError):
    """Requested Hilbert-space dimension exceeds the supported cap."""


class NumericalFailure(SmoothdivError, ArithmeticError):
    """The interior-point solver stalled.

    Parameters
    ----------
    message : str
        Human readable reason.
    trace : list of dict, optional
        Per-iteration residual history.
    """

    def __init__(self, message, trace=None):
        super().__init__(message)
        self.trace = list(trace or [])


class HypothesisViolated(SmoothdivError, ValueError):
    """A lemma hypothesis (such as rho <= A + Q) fails beyond tolerance.

    Parameters
    ----------
    message : str
        Human readable reason.
    min_eig : float
        Most negative eigenvalue of the operator that should be PSD.
    """

    def __init__(self, message, min_eig=float("nan")):
        super().__init__(message)
        self.min_eig = min_eig
