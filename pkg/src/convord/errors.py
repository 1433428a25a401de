"""Exception hierarchy shared by all convord modules."""


class ConvordError(Exception):
    """Base class for every error raised by convord."""


class InputError(ConvordError, ValueError):
    """Raised when user-supplied data violates a precondition."""


class NonUnitMass(InputError):
    pass


class EmptySupport(InputError):
    pass


class NonIntegerCount(InputError):
    pass


class NonIntegerSupport(InputError):
    pass


class OutOfInterval(InputError):
    pass


class NotCxOrdered(InputError):
    pass


class NotIcxOrdered(InputError):
    pass


class NegativeJumpSupport(InputError):
    pass


class NonIntegerDecomposition(InputError):
    pass


class NegativeTime(InputError):
    pass


class TooFewSamples(InputError):
    pass


class EmptySample(InputError):
    pass


class ValueOutsideSupport(InputError):
    """A simulated value does not belong to the support of the exact law.

    The coupling can never emit such a value, so this is a hard failure
    rather than a statistical one.
    """


class SchemaError(InputError):
    """A samples CSV or JSON document does not match the expected layout."""


class InternalOrderViolation(ConvordError, RuntimeError):
    """No admissible triple exists although the remaining masses should
    still be convex ordered. Indicates a bug, never bad input."""
