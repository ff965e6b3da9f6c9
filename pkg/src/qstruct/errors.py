"""Exception and warning types shared across qstruct."""


class QStructError(Exception):
    """Base class for all qstruct errors."""


class FactorizationMismatch(QStructError, ValueError):
    pass


class InvalidPartition(QStructError, ValueError):
    pass


class DimensionError(QStructError, ValueError):
    pass


class DimensionMismatch(QStructError, ValueError):
    pass


class UnsupportedDimension(QStructError, ValueError):
    pass


class DependentPairs(QStructError, ValueError):
    """Relative-coordinate pairs do not span N-1 independent differences."""


class ConstraintViolated(QStructError, ValueError):
    """A physical-sensibility constraint of a restructured model failed.

    Attributes:
        which: names of the failed inequalities, e.g. ``["M*Omega^2 > 0"]``.
    """

    def __init__(self, message, which=()):
        super().__init__(message)
        self.which = list(which)


class NotPositiveDefinite(QStructError, ValueError):
    pass


class InvalidCoefficients(QStructError, ValueError):
    pass


class InvalidSpec(QStructError, ValueError):
    pass


class DomainError(QStructError, ValueError):
    pass


class StepSizeTooLarge(QStructError, RuntimeError):
    pass


class ConfigError(QStructError):
    """Bad experiment configuration (CLI exit code 2)."""


class NumericalFailure(QStructError, RuntimeError):
    """A numerical invariant was violated (CLI exit code 3).

    Attributes:
        invariant: short name of the violated invariant.
    """

    def __init__(self, invariant, message=""):
        super().__init__(f"{invariant}: {message}" if message else invariant)
        self.invariant = invariant


class TruncationWarning(UserWarning):
    """Population at the top of a truncated Fock space is not negligible."""
