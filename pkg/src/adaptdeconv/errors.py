"""Exception hierarchy shared by every module of the package."""


class DeconvError(Exception):
    """Base class for all package errors."""


class ParameterError(DeconvError, ValueError):
    """An argument lies outside its admissible domain."""


class NTooSmall(ParameterError):
    """The sample size is below the floor where a closed-form recipe is defined.

    ``min_n`` carries the smallest admissible sample size when it is known.
    """

    def __init__(self, message, min_n=None):
        super().__init__(message)
        self.min_n = min_n


class NumericalError(DeconvError, ArithmeticError):
    """A numerical procedure failed or produced an untrustworthy value."""


class QuadratureError(NumericalError):
    pass


class DivergenceError(NumericalError):
    """A truncated integral whose integrand does not decay at the truncation edge."""


class KernelOverflowError(NumericalError):
    """exp((1/h)^s) would overflow double precision.

    ``max_cutoff`` is the largest frequency cutoff 1/h that is representable.
    """

    def __init__(self, message, max_cutoff=None):
        super().__init__(message)
        self.max_cutoff = max_cutoff


class OrderingError(NumericalError):
    """The pipe thresholds are not strictly decreasing at the chosen frequency."""


class OracleMisuse(ParameterError):
    """A brute-force oracle was called on an input too large for it."""
