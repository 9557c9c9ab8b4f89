"""Exception hierarchy. Every error subclasses ``ValueError`` so callers that
only care about bad input can catch that."""


class BlockspecError(ValueError):
    """Base class for all errors raised by this package."""


class RhoInvalid(BlockspecError):
    pass


class EntryOutOfRange(BlockspecError):
    pass


class SymmetryViolation(BlockspecError):
    pass


class NotIdentifiable(BlockspecError):
    pass


class DegenerateFactors(BlockspecError):
    pass


class DimensionError(BlockspecError):
    pass


class EmptyInput(BlockspecError):
    pass


class OmegaOutOfRange(BlockspecError):
    pass


class TooLargeForExact(BlockspecError):
    pass


class ThetaOutOfRange(BlockspecError):
    pass


class LengthMismatch(BlockspecError):
    pass


class NotOrthonormal(BlockspecError):
    pass


class ConfigError(BlockspecError):
    pass


class NoKFound(BlockspecError):
    """No candidate block count met the residual threshold.

    The full selection trace is attached as ``trace`` so the failure can be
    inspected rather than silently capped.
    """

    def __init__(self, message, trace=None):
        super().__init__(message)
        self.trace = trace
