"""Exception types raised across the package."""


class ShapeCompError(Exception):
    """Base class for all library errors."""


class DimensionMismatchError(ShapeCompError, ValueError):
    pass


class GridMismatchError(ShapeCompError, ValueError):
    pass


class EmptyMaskError(ShapeCompError, ValueError):
    pass


class DegenerateInputError(ShapeCompError, ValueError):
    """Input has no variation (constant image, zero-variance field, ...)."""


class EmptyDictionaryError(ShapeCompError, ValueError):
    pass


class SearchSpaceTooLargeError(ShapeCompError, ValueError):
    pass


class RedundantCompositionError(ShapeCompError, ValueError):
    pass


class LinkageNotUniqueError(ShapeCompError, ValueError):
    """The linkage program has no unique solution (composition is not basic)."""


class SingularSystemError(ShapeCompError, ValueError):
    pass


class BoundsViolatedError(ShapeCompError, ArithmeticError):
    """Bearing constants fall outside their guaranteed range."""


class HypothesisViolatedError(ShapeCompError, ValueError):
    """Certificate hypotheses do not hold (e.g. a plateau value lies in (0, 1))."""


class FormatError(ShapeCompError, ValueError):
    """Malformed input file."""
