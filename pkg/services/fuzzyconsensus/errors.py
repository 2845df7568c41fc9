"""
Exception hierarchy for fuzzyconsensus.

Every exception carries the process exit code the command-line front
end reports for it.
"""

from typing import Optional


class FuzzyConsensusError(Exception):
    """Base class for all library errors."""

    exit_code = 3


class InvalidInputError(FuzzyConsensusError, ValueError):
    """Rejected input: empty samples, negative errors, mixed dimensions."""

    exit_code = 1


class ParseError(InvalidInputError):
    """Malformed CSV input, located by row and column."""

    def __init__(self, message: str, row: Optional[int] = None, column: Optional[str] = None):
        self.message = message
        self.row = row
        self.column = column
        super().__init__(self._render())

    def _render(self) -> str:
        location = []
        if self.row is not None:
            location.append(f"row {self.row}")
        if self.column is not None:
            location.append(f"column {self.column}")
        if location:
            return f"{', '.join(location)}: {self.message}"
        return self.message


class UnsupportedDimensionError(FuzzyConsensusError):
    """Exact crisp consensus is only available for d in {1, 2}."""

    exit_code = 2

    def __init__(self, dimension: int):
        self.dimension = dimension
        super().__init__(
            f"crisp consensus supports 1 or 2 dimensions, got {dimension}; "
            "use grid mode (consensus_grid / --mode grid) for higher dimensions"
        )


class GridTooLargeError(FuzzyConsensusError):
    """Grid evaluation would exceed the configured cell limit."""

    exit_code = 2

    def __init__(self, cells: int, limit: int):
        self.cells = cells
        self.limit = limit
        super().__init__(f"grid has {cells} cells, above the limit of {limit}")


class DegenerateScaleError(FuzzyConsensusError):
    """MAD scale is zero: more than half of the sample is tied."""


class NonConvergenceError(FuzzyConsensusError):
    """IRLS could not proceed (every weight is zero)."""
