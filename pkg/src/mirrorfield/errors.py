"""Exception hierarchy shared by all modules."""


class MirrorfieldError(Exception):
    """Base class for library errors."""


class ValidationError(MirrorfieldError, ValueError):
    """Bad arguments or a violated precondition."""


class SupportError(ValidationError):
    """A test function's support violates a region requirement."""


class SingularConfigurationError(ValidationError):
    """A kernel was requested at a null-related (or timelike image) configuration."""


class ObstructionError(ValidationError):
    """A local construction was requested where it is not globally defined."""


class ConvergenceError(MirrorfieldError, ArithmeticError):
    """A numerical estimate failed to reach its tolerance.

    ``estimate`` carries the measured error (or disagreement) when known.
    """

    def __init__(self, message, estimate=None):
        super().__init__(message)
        self.estimate = estimate
