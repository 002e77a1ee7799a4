"""Library specific exception definitions."""
from typing import Optional
import logging


logger = logging.getLogger(__name__)


class XYGibbsError(Exception):
    """Base xygibbs exception that all others inherit.

    This is done to not pollute the built-in exceptions, which *could* result
    in unintended errors being unexpectedly and incorrectly handled within
    implementers code.

    Every subclass carries a machine-readable ``code`` and the ``exit_code``
    the command-line interface terminates with.
    """
    code = "error"
    exit_code = 1

    def __init__(self, message: Optional[str] = None):
        self.message = message
        super().__init__(self.error_string)

    @property
    def error_string(self):
        return self.message or self.code


### Configuration Errors ###

class ConfigError(XYGibbsError):
    """A family, run or cylinder specification could not be understood."""
    code = "config_error"
    exit_code = 2


### Numerical Errors ###
# These map to exit status 3 on the command line.

class DomainError(XYGibbsError):
    """An argument lies outside the domain interval, or F is not finite."""
    code = "domain_error"
    exit_code = 3

    def __init__(self, value: float, lo: float, hi: float, message: Optional[str] = None):
        """
        :param float value:
            The offending argument.
        :param float lo:
            Lower end of the domain.
        :param float hi:
            Upper end of the domain.
        """
        self.value = value
        self.lo = lo
        self.hi = hi
        super().__init__(message)

    @property
    def error_string(self):
        if self.message:
            return self.message
        return f'{self.value!r} is outside the domain [{self.lo!r}, {self.hi!r}]'


class DivergenceError(XYGibbsError):
    """A tail or double-tail series does not converge at the given argument."""
    code = "divergence_error"
    exit_code = 3

    def __init__(self, series: str, argument: float, message: Optional[str] = None):
        """
        :param str series:
            Name of the series that diverges (``tail``, ``double_tail``...).
        :param float argument:
            The point at which it was evaluated.
        """
        self.series = series
        self.argument = argument
        super().__init__(message)

    @property
    def error_string(self):
        if self.message:
            return self.message
        return f'{self.series} diverges at {self.argument!r}'


class AccuracyError(XYGibbsError):
    """Adaptive quadrature hit its subdivision limit before meeting tolerance."""
    code = "accuracy_error"
    exit_code = 3

    def __init__(self, best_estimate: float, abs_error_estimate: float, panels: int):
        """
        :param float best_estimate:
            The integral estimate reached when the limit was hit.
        :param float abs_error_estimate:
            Its estimated absolute error.
        :param int panels:
            Number of panels in use.
        """
        self.best_estimate = best_estimate
        self.abs_error_estimate = abs_error_estimate
        self.panels = panels
        super().__init__()

    @property
    def error_string(self):
        return (
            f'subdivision limit of {self.panels} panels reached: best estimate '
            f'{self.best_estimate!r} with error {self.abs_error_estimate!r}')


class NumericalError(XYGibbsError):
    """An unexpected arithmetic failure inside a computation.

    The command-line interface wraps ``ValueError``, ``TypeError`` and
    ``ArithmeticError`` escaping a command in this error, so the run still
    ends with a report.
    """
    code = "numerical_error"
    exit_code = 3

    def __init__(self, cause: BaseException):
        """
        :param BaseException cause:
            The original exception.
        """
        self.cause = cause
        super().__init__()

    @property
    def error_string(self):
        return f'{type(self.cause).__name__}: {self.cause}'


### Peak Errors ###
# There are really 3 ways the zero-temperature analysis can refuse a potential
# 1. More than two maximising points, or a flat maximum
# 2. A maximum sitting on an end of the domain
# 3. A maximum where F'' does not give a nondegenerate concave peak
# All of them map to exit status 4 on the command line.

class PeakError(XYGibbsError):
    """Base error for maxima the zero-temperature analysis does not cover."""
    code = "peak_error"
    exit_code = 4


class UnsupportedMultiplicityError(PeakError):
    code = "unsupported_multiplicity"

    def __init__(self, count: Optional[int], message: Optional[str] = None):
        """
        :param int count:
            Number of maximising peaks found, ``None`` for a flat maximum.
        """
        self.count = count
        super().__init__(message)

    @property
    def error_string(self):
        if self.message:
            return self.message
        if self.count is None:
            return 'F attains its maximum on a flat plateau'
        return f'F has {self.count} maximising peaks, only one or two are supported'


class EndpointPeakError(PeakError):
    code = "endpoint_peak"

    def __init__(self, location: float):
        """
        :param float location:
            The endpoint where F is maximal.
        """
        self.location = location
        super().__init__()

    @property
    def error_string(self):
        return f'F is maximal at the domain endpoint {self.location!r}; only interior peaks are supported'


class DegeneratePeakError(PeakError):
    code = "degenerate_peak"

    def __init__(self, location: Optional[float], curvature: float):
        """
        :param float location:
            Location of the peak, if known.
        :param float curvature:
            The offending second derivative.
        """
        self.location = location
        self.curvature = curvature
        super().__init__()

    @property
    def error_string(self):
        return f'F\'\' = {self.curvature!r} at {self.location!r} is not strictly negative'


class NonConcavePeakError(DegeneratePeakError):
    """The Laplace leading term needs F'' < 0 at the peak."""
    code = "non_concave_peak"
