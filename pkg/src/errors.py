# src/errors.py
from typing import Optional


class CurrentStatusError(ValueError):
    """Base class for every domain error raised by the package."""


class EmptySampleError(CurrentStatusError):
    """A sample (or a sample group in an input file) has no observations."""


class GridMismatchError(CurrentStatusError):
    """Grid functions that must share one grid do not, or a range falls outside it."""


class BandwidthError(CurrentStatusError):
    """The bandwidth is too large for the observation window."""


class DegenerateStatisticError(CurrentStatusError):
    """A statistic's normalization is zero (e.g. all indicators equal)."""


class ScenarioError(CurrentStatusError):
    """A scenario block is malformed or names unknown laws."""


class InputFormatError(CurrentStatusError):
    """Malformed user CSV; carries the offending line and column when known."""

    def __init__(self, message: str, line: Optional[int] = None, column: Optional[str] = None):
        self.line = line
        self.column = column
        where = []
        if line is not None:
            where.append(f"line {line}")
        if column is not None:
            where.append(f"column '{column}'")
        prefix = f"{', '.join(where)}: " if where else ""
        super().__init__(f"{prefix}{message}")
