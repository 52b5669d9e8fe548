"""Exception and warning types shared across the package."""


class NvUnmixError(Exception):
    """Base class for every error raised by this package."""


class ValidationError(NvUnmixError, ValueError):
    """Input violates a documented precondition or type invariant."""


class RangeError(NvUnmixError, ValueError):
    """Requested wavelengths or field values fall outside the available grid."""


class GridMismatchError(NvUnmixError, ValueError):
    """Operands live on different wavelength grids or map shapes."""


class IdentifiabilityError(NvUnmixError, ArithmeticError):
    """The data cannot pin down the requested quantity."""


class SingularityError(NvUnmixError, ZeroDivisionError):
    """A denominator vanished; the requested ratio is undefined."""


class NoMinimumError(NvUnmixError, ArithmeticError):
    """The scanned column has no detectable minimum."""


class ParseError(NvUnmixError, ValueError):
    """A data file does not conform to its declared format."""


class NvUnmixWarning(UserWarning):
    """Base class for diagnostic warnings."""


class ModelViolationWarning(NvUnmixWarning):
    """Data departs from the two-component model assumptions."""


class NonPhysicalWarning(NvUnmixWarning):
    """A derived quantity took a value outside its physical range."""


class ConditioningWarning(NvUnmixWarning):
    """Inputs leave a downstream inversion poorly conditioned."""


class FlatWarning(NvUnmixWarning):
    """A scanned column is constant; the result is a tie-break convention."""


class ClampedNegativeWarning(NvUnmixWarning):
    """Negative raw values were clamped to zero on load."""
