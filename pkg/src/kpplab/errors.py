"""Exception hierarchy shared by all kpplab modules."""


class KPPLabError(Exception):
    """Base class for every error raised by this package."""


class DomainError(KPPLabError, ValueError):
    """A parameter lies outside the mathematically admissible range."""


class RegimeError(KPPLabError, ValueError):
    """An operation was requested in a parameter regime where it is undefined."""


class UnsupportedRegimeError(RegimeError):
    """Parameter combination whose behavior is an open problem (beta=2, eta >= 1/2)."""


class ConvergenceError(KPPLabError, RuntimeError):
    """An iterative or integration procedure failed to meet its tolerance."""


class QuadratureError(KPPLabError, RuntimeError):
    """Adaptive quadrature did not converge to the requested tolerance."""


class ConfigError(KPPLabError, ValueError):
    """A run configuration is invalid (unknown keys, unsatisfiable sizes, ...)."""


class NumericalError(KPPLabError, RuntimeError):
    """A solver produced values violating a hard invariant (bug signal)."""


class FitError(KPPLabError, RuntimeError):
    """A regression could not be performed (degenerate window, underflow, ...)."""


class DataError(KPPLabError, ValueError):
    """Input field or trace data is malformed (NaNs, missing crossing, ...)."""
