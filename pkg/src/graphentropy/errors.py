"""Exception types shared across the package."""


class GraphEntropyError(Exception):
    """Base class for all package errors."""


class AsymmetricMatrix(GraphEntropyError):
    pass


class ValueOutOfRange(GraphEntropyError):
    pass


class EmptyMatrix(GraphEntropyError):
    pass


class LoopEdge(GraphEntropyError):
    pass


class DuplicateEdge(GraphEntropyError):
    pass


class MotifTooLarge(GraphEntropyError):
    pass


class DisconnectedMotif(GraphEntropyError):
    pass


class UnsupportedPower(GraphEntropyError):
    pass


class EdgeDensityMismatch(GraphEntropyError):
    pass


class Infeasible(GraphEntropyError):
    """No optimization start reached the constraint tolerance."""

    def __init__(self, message, result=None):
        super().__init__(message)
        self.result = result


class NotConverged(GraphEntropyError):
    """Feasible point found but the KKT tolerance was not met."""

    def __init__(self, message, result=None):
        super().__init__(message)
        self.result = result


class DegenerateFit(GraphEntropyError):
    pass


class TooLarge(GraphEntropyError):
    pass


class NoTransitionFound(GraphEntropyError):
    pass


class SignPatternUnexpected(GraphEntropyError):
    pass


class EmptyTable(GraphEntropyError):
    pass


class FormatError(GraphEntropyError):
    """Malformed graphon/motif file."""
