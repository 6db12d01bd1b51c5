"""Exception and warning types shared across the package."""


class PhasequantError(Exception):
    """Base class for all library errors."""


class InvalidParameterError(PhasequantError, ValueError):
    """A constructor or operation received an out-of-domain parameter."""


class PrefixTooShortError(PhasequantError):
    """An associated-function supremum was attained at the end of the stored
    prefix, so the returned value would be an underestimate."""


class OverflowRefusalError(PhasequantError):
    """Conversion to linear-domain floats would overflow.

    Carries the offending flat indices in ``.indices`` (at most the first 16).
    """

    def __init__(self, message, indices=()):
        super().__init__(message)
        self.indices = tuple(indices)


class StepCollapseError(PhasequantError):
    """Richardson levels of a finite difference disagree beyond tolerance."""


class NotAdmissibleError(PhasequantError):
    """Symbol growth exceeds the admissibility threshold of the window pair."""


class DivergentIntegrandError(PhasequantError):
    """A quadrature tail is non-decreasing: the integral does not exist and
    no truncated value is returned."""


class MildModeRefusalError(PhasequantError):
    """The direct localisation route needs an ultrapolynomially bounded
    symbol; use the convolution route instead."""


class ExtrapolationUnstableError(PhasequantError):
    """Damped oscillatory-integral extrapolation spread exceeds tolerance."""


class InfeasibleFitError(PhasequantError):
    """No candidate envelope fits with an admissible constant."""


class GridCompatibilityError(PhasequantError, ValueError):
    """Grids passed to an operation do not satisfy its alignment contract."""


class ConfigError(PhasequantError):
    """A CLI configuration file failed validation."""


class TruncationWarning(UserWarning):
    """Integrand has not decayed below threshold at the quadrature boundary.

    Carries ``.ratio``, the boundary-to-peak magnitude ratio in log scale.
    """

    def __init__(self, message, log_ratio=None):
        super().__init__(message)
        self.log_ratio = log_ratio


class CancellationWarning(UserWarning):
    """A log-domain sum lost nearly all significant digits to cancellation."""


class InterpolationWarning(UserWarning):
    """Values at off-grid points were linearly interpolated in log magnitude."""
