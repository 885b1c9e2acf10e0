"""Exception hierarchy shared across the package."""


class TrolleyBatchError(Exception):
    """Base class for all errors raised by this package."""


class LayoutRangeError(TrolleyBatchError, IndexError):
    """An aisle, block, cross-aisle or offset index is outside the layout."""


class InstanceValidationError(TrolleyBatchError, ValueError):
    """An instance document violates a structural or feasibility rule.

    ``path`` names the offending field (e.g. ``orders[3].baskets``) and
    ``constraint`` a short tag such as ``"order capacity"``.
    """

    def __init__(self, message, path="", constraint=""):
        self.path = path
        self.constraint = constraint
        prefix = f"{path}: " if path else ""
        super().__init__(prefix + message)


class InfeasibleInstanceError(TrolleyBatchError):
    """Total demand cannot be carried by the available trolleys."""


class MpsNameError(TrolleyBatchError, ValueError):
    """Variable or row names collide after MPS sanitization."""


class SolverError(TrolleyBatchError):
    """The external solver failed or returned something unusable."""

    def __init__(self, message, result=None):
        super().__init__(message)
        self.result = result


class ExtractionError(TrolleyBatchError):
    """A solution does not encode a valid batching (fractional or duplicated z)."""


class RoutingCapacityError(TrolleyBatchError):
    """A reversal routing task has more products than the exact DP allows."""


class CutLoopError(TrolleyBatchError):
    """The connectivity cut loop did not converge within its iteration cap."""


class OracleLimitError(TrolleyBatchError):
    """An input is too large for exhaustive enumeration."""


class HeuristicError(TrolleyBatchError):
    """A heuristic could not produce a feasible batching."""
