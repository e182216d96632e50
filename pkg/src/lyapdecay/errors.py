"""Exception hierarchy shared by all modules."""


class LyapunovError(Exception):
    """Base class for every error raised by lyapdecay."""


class DimensionError(LyapunovError, ValueError):
    """Operand shapes are inconsistent."""


class SymmetryError(LyapunovError, ValueError):
    """A symmetric operand was required."""


class SolvabilityError(LyapunovError):
    """The Lyapunov operator is (numerically) singular.

    ``pair`` holds the offending eigenvalue indices ``(i, j)`` when known.
    """

    def __init__(self, message, pair=None, value=None):
        super().__init__(message)
        self.pair = pair
        self.value = value


class SizeLimitError(LyapunovError):
    """Problem is larger than a configured cap."""


class ConventionError(LyapunovError, ValueError):
    """Coefficient matrix has the wrong sign convention for this solver."""


class QuadratureError(LyapunovError):
    """Quadrature refinement did not converge."""

    def __init__(self, message, estimate=None, error_estimate=None):
        super().__init__(message)
        self.estimate = estimate
        self.error_estimate = error_estimate


class UnboundedError(LyapunovError):
    """A decay bound degenerates (e.g. the spectral segment touches the origin)."""


class IndefiniteFactorWarning(UserWarning):
    """A supposedly semidefinite matrix has eigenvalues of both signs."""


class TermFailureError(LyapunovError):
    """One or more terms of a split solve failed.

    ``failures`` is a list of ``(term_index, exception)`` pairs.
    """

    def __init__(self, failures):
        lines = ", ".join(f"term {k}: {exc}" for k, exc in failures)
        super().__init__(f"{len(failures)} term solve(s) failed ({lines})")
        self.failures = failures
