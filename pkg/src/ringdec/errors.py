"""Exception types raised across the package."""


class RingDecError(Exception):
    """Base class for all errors raised by ringdec."""


class InvalidParameterError(RingDecError, ValueError):
    pass


class RingMismatchError(RingDecError, ValueError):
    pass


class RingAxiomError(RingDecError, ValueError):
    """A candidate ring table violates an axiom.

    ``axiom`` names the failed property and ``witness`` holds the offending
    element indices.
    """

    def __init__(self, axiom, witness):
        self.axiom = axiom
        self.witness = tuple(witness)
        super().__init__(f"ring axiom violated: {axiom} (witness {self.witness})")


class NotIntegralError(RingDecError, ValueError):
    pass


class EnumerationBoundError(RingDecError):
    """Refusal to enumerate a space larger than the configured bound."""

    def __init__(self, what, size, bound):
        self.size = size
        self.bound = bound
        super().__init__(f"{what}: size {size} exceeds bound {bound}")


class PskIncompatibleError(RingDecError, ValueError):
    pass


class UndefinedLlrError(RingDecError, ArithmeticError):
    pass


class LpSolverError(RingDecError, RuntimeError):
    def __init__(self, message, diagnostics=None):
        self.diagnostics = diagnostics or {}
        super().__init__(message)


class ConfigError(RingDecError, ValueError):
    pass
