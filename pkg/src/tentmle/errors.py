"""Exception types shared across the package.

Every failure mode that callers are expected to handle gets its own class so
that the command line front end can map them to distinct exit codes.
"""


class TentMLEError(Exception):
    """Base class for all package-specific errors."""


class DimensionMismatch(TentMLEError, ValueError):
    """An input has the wrong length or shape for the operation."""


class NumericalFailure(TentMLEError, RuntimeError):
    """An iterative numeric routine exceeded its cap or lost precision."""


class OutsideHull(TentMLEError, ValueError):
    """A query point lies outside the convex hull of the data."""


class DegenerateChord(TentMLEError, RuntimeError):
    """A chord intersects the hull in a segment too degenerate to walk."""


class StuckChain(TentMLEError, RuntimeError):
    """Hit-and-run failed to find a usable direction after many redraws."""


class RankDeficient(TentMLEError, ValueError):
    """A sample covariance is singular beyond tolerance."""


class VanishingLevelSet(TentMLEError, RuntimeError):
    """A level set carries no detectable volume at the requested level."""


class UnsupportedDimension(TentMLEError, ValueError):
    """The operation is only available in low ambient dimension."""


class DegenerateGeometry(TentMLEError, ValueError):
    """The data does not span a full-dimensional convex hull."""


class ParseError(TentMLEError, ValueError):
    """An input file could not be parsed.

    Carries 1-based ``row`` and ``column`` coordinates when they are known.
    """

    def __init__(self, message: str, row: int | None = None, column: int | None = None):
        super().__init__(message)
        self.row = row
        self.column = column
