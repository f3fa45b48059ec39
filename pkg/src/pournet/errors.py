"""Shared exception types."""


class NumericalError(RuntimeError):
    """A computation produced non-finite values or missed a numeric tolerance."""


class DatasetFormatError(ValueError):
    """A dataset, manifest, or checkpoint file cannot be parsed or fails validation."""
