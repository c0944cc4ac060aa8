"""Exception types shared across the package."""


class SibsonmiError(Exception):
    """Base class for every error raised by this package."""


class ValidationError(SibsonmiError, ValueError):
    """An input violates a documented invariant (sign, mass, range)."""


class ShapeMismatchError(SibsonmiError, ValueError):
    """Objects that must share an alphabet or shape do not."""


class ResourceLimitError(SibsonmiError, RuntimeError):
    """A configured size cap (tensor cells, DP states) would be exceeded."""


class PreconditionError(SibsonmiError, ValueError):
    """A structural precondition (e.g. a Markov factorisation) fails."""


class InequalityViolation(SibsonmiError, ArithmeticError):
    """A checked inequality failed beyond its tolerance."""


class EventSyntaxError(SibsonmiError, ValueError):
    """An event expression could not be parsed."""


class InputFormatError(SibsonmiError, ValueError):
    """A distribution file could not be parsed or fails validation."""
