"""Exception and warning types raised across the package."""


class CkadaError(Exception):
    """Base class for all package-specific errors."""


class ZeroSampleError(CkadaError, ValueError):
    """A sample row has (near-)zero Euclidean norm and cannot be normalized."""

    def __init__(self, row):
        self.row = row
        super().__init__(f"sample row {row} has norm below 1e-12; "
                         "angular methods are undefined for zero vectors")


class ParseError(CkadaError, ValueError):
    """A CSV cell could not be parsed as a number."""

    def __init__(self, line, column, message=""):
        self.line = line
        self.column = column
        super().__init__(f"line {line}, column {column}: {message or 'invalid numeric value'}")


class RaggedRowsError(CkadaError, ValueError):
    """A CSV row has a different number of columns than the first row."""

    def __init__(self, line):
        self.line = line
        super().__init__(f"line {line}: inconsistent column count")


class SampleCountMismatchError(CkadaError, ValueError):
    """Sources in a manifest do not share the same number of samples."""

    def __init__(self, source_id, expected, actual):
        self.source_id = source_id
        super().__init__(f"source '{source_id}' has {actual} samples, expected {expected}")


class EmptyClassError(CkadaError, ValueError):
    """A declared class has no samples."""

    def __init__(self, label):
        self.label = label
        super().__init__(f"class {label!r} has no samples")


class InsufficientClassError(CkadaError, ValueError):
    """A class does not have enough samples for the requested split."""

    def __init__(self, label, available, requested):
        self.label = label
        self.available = available
        super().__init__(f"class {label} has only {available} samples; "
                         f"need more than {requested}")


class InfeasibleSeparationError(CkadaError, ValueError):
    """Requested class-mean directions cannot fit in the given dimension."""


class EmptyCloudError(CkadaError, ValueError):
    """A point cloud contains no points."""


class DimensionMismatchError(CkadaError, ValueError):
    """Feature dimensions of two operands disagree."""


class ShapeMismatchError(CkadaError, ValueError):
    """Matrix shapes of two operands disagree."""


class InvalidWeightsError(CkadaError, ValueError):
    """Kernel mixture weights are not a valid point on the simplex."""


class TooFewSamplesError(CkadaError, ValueError):
    """An operation needs more samples than were provided."""


class NotPositiveDefiniteError(CkadaError, ValueError):
    """The regularized within matrix failed its Cholesky factorization."""

    def __init__(self, ridge):
        self.ridge = ridge
        super().__init__(f"within matrix is not positive definite at ridge={ridge:g}; "
                         "try a larger ridge")


class ClassTooSmallError(CkadaError, ValueError):
    """A class has too few samples for the requested operation."""

    def __init__(self, label, available, needed):
        self.label = label
        super().__init__(f"class {label} has {available} samples, needs at least {needed}")


class NumericalBreakdownError(CkadaError, RuntimeError):
    """An active-set least squares system became singular."""


class LengthMismatchError(CkadaError, ValueError):
    """Predicted and true label vectors have different lengths."""


class DegenerateNeighborhoodWarning(UserWarning):
    """The k-th nearest neighbor coincides with the query point; local scale was clamped."""


class EffectiveRankWarning(UserWarning):
    """The Gram matrix has lower effective rank than the requested dimension."""


class LowConfidenceWarning(UserWarning):
    """A sparse-representation query had no usable coefficients; tie rule applied."""
