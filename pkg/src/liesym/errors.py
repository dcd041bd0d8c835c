"""Exceptions raised by the liesym pipeline.

Every error subclasses both `LiesymError` and `ValueError`, so callers may
catch either the package-specific base or the broader builtin.
"""


class LiesymError(Exception):
    """Base class of every liesym-specific failure."""


class DegenerateStencilError(LiesymError, ValueError):
    """A neighbour stencil cannot support the requested local fit."""


class DegenerateFractionError(LiesymError, ValueError):
    """Too many points of a cloud were flagged degenerate in one stage."""


class LevelExhaustedError(LiesymError, ValueError):
    """A cloud cannot be lifted past the order its layout allows."""


class OrderOverflowError(LiesymError, ValueError):
    """A total derivative produced a coordinate outside the jet ring."""


class CSVFormatError(LiesymError, ValueError):
    """A point-cloud file does not follow the liesym CSV layout."""
