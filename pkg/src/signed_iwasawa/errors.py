"""Exception types shared across the package.

The CLI maps these onto exit codes, so every failure mode that a user can
trigger from a config file raises one of them.
"""


class InputError(ValueError):
    """Malformed or mathematically inadmissible input.

    ``field`` names the offending config key when there is one.
    """

    def __init__(self, message: str, field: str | None = None):
        super().__init__(message)
        self.field = field


class PrecisionExhausted(ArithmeticError):
    """A quantity could not be certified at the working precision."""


class NotFinite(ArithmeticError):
    """A module that was required to be finite has a free part."""


class NotInField(ArithmeticError):
    """An element failed the Galois-invariance test for a subfield."""


class NotExact(ArithmeticError):
    """Supplied maps do not form a short exact sequence."""
