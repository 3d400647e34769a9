"""Exception hierarchy shared by every module of the package."""

from typing import Optional


class BernoulliTVError(Exception):
    """Base class for all errors raised by this package"""


class ConfigurationError(BernoulliTVError, ValueError):
    """A configuration file or environment override could not be used"""


class InvalidParameterError(BernoulliTVError, ValueError):
    """A parameter vector entry is missing, non-finite or outside [0, 1]"""


class DimensionMismatchError(BernoulliTVError, ValueError):
    """Two objects that must share a dimension do not"""


class DimensionTooLargeError(BernoulliTVError):
    """Exact enumeration was requested above the configured limit"""

    def __init__(self, n: int, limit: int):
        self.n = n
        self.limit = limit
        super().__init__(
            f"n={n} exceeds the exact-enumeration limit {limit}; use the bounds instead"
        )


class RegimeMismatchError(BernoulliTVError):
    """A regime-specific check was called on a pair outside that regime"""


class NTooSmallError(BernoulliTVError, ValueError):
    """The dimension is below the minimum a statement requires"""


class OddsUndefinedError(BernoulliTVError, ValueError):
    """Odds r/(1-r) were requested for a probability equal to 1"""


class OddsConstraintError(BernoulliTVError):
    """The odds sum exceeds 1, so the monotonicity hypothesis fails"""


class LambdaTooLargeError(BernoulliTVError, ValueError):
    """The extremal cap lambda exceeds 1/(N+1)"""


class IndexOutOfRangeError(BernoulliTVError, IndexError):
    """A slice, coordinate or order index lies outside its valid range"""


class NotQuasiSymmetricError(BernoulliTVError):
    """The sqrt(2) l2 bound was requested for a pair that is not quasi-symmetric"""


class InputValidationError(BernoulliTVError, ValueError):
    """An input document failed to parse or validate"""

    def __init__(self, message: str, field: Optional[str] = None):
        self.field = field
        if field:
            message = f"field '{field}': {message}"
        super().__init__(message)
