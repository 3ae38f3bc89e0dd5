"""Exception types shared across modules; the CLI maps them to exit codes."""


class DomainError(ValueError):
    """Inputs outside the model's domain (|t| >= gamma, bad nome, n out of range)."""


class PrecisionExhausted(ArithmeticError):
    """The exact solver could not certify a result within its precision ladder."""

    def __init__(self, message: str, precision_bits: int | None = None, ladder: tuple = ()):
        super().__init__(message)
        self.precision_bits = precision_bits
        self.ladder = tuple(ladder)


class QuadratureError(ArithmeticError):
    """A quadrature failed to converge or produced a non-finite value."""
