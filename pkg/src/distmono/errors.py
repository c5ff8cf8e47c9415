"""Exception types shared across the package."""


class CarrierViolation(ValueError):
    """A value or structure is not compatible with the carrier."""


class UnsupportedOperation(ValueError):
    """A truncated sum has no maximum in the carrier.

    Carries the offending pair in ``witness``.
    """

    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


class PreconditionError(ValueError):
    """An operation was called outside its stated precondition."""


class AmalgamationFailure(Exception):
    """No admissible linking distance exists; carries the four-values data."""

    def __init__(self, message, quadruple=None):
        super().__init__(message)
        self.quadruple = quadruple


class FormulaSyntaxError(ValueError):
    """Parse error with a character position."""

    def __init__(self, message, position):
        super().__init__(f"{message} (at position {position})")
        self.position = position
