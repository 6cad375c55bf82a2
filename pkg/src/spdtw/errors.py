"""Exception hierarchy.

Every error raised on bad input derives from :class:`SpdtwError` and from
``ValueError`` so callers can catch either.
"""


class SpdtwError(ValueError):
    """Base class for all library errors."""


class FormatError(SpdtwError):
    """Malformed input file (ragged rows, unparsable tokens, bad header)."""


class ParseError(FormatError):
    """A token that should be numeric could not be parsed."""


class EmptyInputError(SpdtwError):
    """An input file or collection contained no data."""


class DegenerateError(SpdtwError):
    """Input is structurally valid but carries no usable information."""


class DegenerateSeriesError(DegenerateError):
    """A series has zero variance where a non-constant one is required."""


class DimensionError(SpdtwError):
    """Series lengths or matrix shapes do not agree."""


class ParameterError(SpdtwError):
    """A hyperparameter is outside its valid range."""


class EmptyGridError(SpdtwError):
    """An occupancy grid or parameter lattice has no usable cells."""


class InsufficientDataError(SpdtwError):
    """Too few series to carry out the requested operation."""


class OverThresholdError(SpdtwError):
    """The count threshold removes the grid corners.

    ``max_theta`` holds the largest admissible threshold.
    """

    def __init__(self, message, max_theta=None):
        super().__init__(message)
        self.max_theta = max_theta


class KernelError(SpdtwError):
    """A Gram matrix is not symmetric positive semi-definite within tolerance."""
