"""Exception hierarchy shared by all modules."""

from __future__ import annotations


class IfszetaError(Exception):
    """Base class for all library errors."""


class NoSignChange(IfszetaError):
    """The isolating interval does not bracket a sign change of the polynomial."""


class RootOutOfUnit(IfszetaError):
    """The isolating interval is not contained in the open unit interval."""


class ZeroConstantTerm(IfszetaError):
    """The defining polynomial has constant term zero, so the root is not invertible."""


class ContextMismatch(IfszetaError):
    """Operands belong to incompatible algebraic contexts."""


class IndexOutOfRange(IfszetaError):
    """A word letter is outside 1..m."""


class BudgetExceeded(IfszetaError):
    """Distinct-cylinder budget overrun; carries the last completed level."""

    def __init__(self, message: str, level_reached: int):
        super().__init__(message)
        self.level_reached = level_reached


class NonpositiveWeight(IfszetaError):
    """A cylinder weight fed to the zeta sum is zero or negative."""


class GridTooLarge(IfszetaError):
    """Requested scan grid exceeds the point budget."""


class GridTooCoarse(IfszetaError):
    """Boundary diagnostics need more grid points than were supplied."""


class OverlapDetected(IfszetaError):
    """Level-1 cylinders are not strictly separated; the classical oracle requires it."""


class ConfigError(IfszetaError):
    """Invalid run configuration; names the offending field."""

    def __init__(self, field: str, message: str):
        super().__init__(f"config field '{field}': {message}")
        self.field = field
