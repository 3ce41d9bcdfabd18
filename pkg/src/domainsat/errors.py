"""Exception types shared across the toolbox.

Everything raised on purpose derives from ToolboxError so callers can
catch one base class at pipeline and service boundaries.  Built-in
ValueError is reserved for malformed numeric content (non-finite cells,
labels outside {0, 1}).
"""


class ToolboxError(Exception):
    """Base class for all toolbox-specific errors."""


class IoError(ToolboxError):
    """A file could not be read or written."""


class SchemaError(ToolboxError):
    """Structural problem: missing/duplicate columns, shape mismatch."""


class ParseError(ToolboxError):
    """A CSV cell could not be parsed; carries its 1-based location."""

    def __init__(self, message: str, line: int | None = None, column: str | None = None):
        super().__init__(message)
        self.line = line
        self.column = column


class RangeError(ToolboxError):
    """A probability fell outside [0, 1]."""


class MissingLabels(ToolboxError):
    """An operation needed labels that the input does not carry."""


class InsufficientData(ToolboxError):
    """Not enough rows (or rows per class) to satisfy a request."""


class InvalidFraction(ToolboxError):
    """Split fraction outside the open interval (0, 1)."""


class InvalidBatchSize(ToolboxError):
    """Batch size < 1."""


class InvalidConfig(ToolboxError):
    """A configuration value violates its documented range."""


class DimensionMismatch(ToolboxError):
    """Reference and target disagree on feature count or names."""


class TooFewSamples(ToolboxError):
    """A detector or test needs more samples per side than it got."""


class EmptySample(ToolboxError):
    """An empty sample reached a statistic that requires data."""


class EmptyPredictions(ToolboxError):
    """An empty prediction set reached a confidence index."""


class SingleClass(ToolboxError):
    """Labelled AUC requested but only one class is present."""


class ZeroVector(ToolboxError):
    """L2 normalisation of an (exactly) zero vector."""


class SingularCovariance(ToolboxError):
    """Covariance not invertible and shrinkage is zero."""


class DegenerateBinning(ToolboxError):
    """Fewer than two usable bins survived binning."""


class UnknownMetric(ToolboxError):
    """An algorithm id is not in the catalog; message lists valid ids."""


class UnknownFeature(ToolboxError):
    """A selector named a feature the dataset does not have."""
