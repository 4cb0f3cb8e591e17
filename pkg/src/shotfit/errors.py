"""Exception and warning types raised by shotfit."""


class ShotfitError(Exception):
    """Base class for all shotfit errors."""


class InsufficientData(ShotfitError, ValueError):
    """Fewer datapoints than model parameters."""


class LengthMismatch(ShotfitError, ValueError):
    pass


class InvalidProbability(ShotfitError, ValueError):
    """A ground-truth model value lies outside [0, 1]."""


class NonFiniteModel(ShotfitError, ArithmeticError):
    pass


class NonPositiveWeight(ShotfitError, ValueError):
    pass


class DofNonPositive(ShotfitError, ValueError):
    """Model violation needs more datapoints than parameters."""


class NonFiniteResidual(ShotfitError, ArithmeticError):
    pass


class NonFiniteCost(ShotfitError, ArithmeticError):
    pass


class FitError(ShotfitError):
    """The OLS stage of a fit failed; ``partial`` holds the last iterate."""

    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial


class ParseError(ShotfitError, ValueError):
    """Malformed dataset, scenario or results file."""


class DegenerateDataWarning(UserWarning):
    """All fractions are equal; the initial guess has zero amplitude."""
