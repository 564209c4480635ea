"""Custom exceptions for dataset construction and storage."""

from cropd.exceptions import CropdError


class DatasetError(CropdError):
    """Base exception for dataset-related errors."""

    pass


class InvalidDatasetParameterError(DatasetError):
    """Raised when a generator or policy receives an out-of-range parameter."""

    pass


class DatasetNotFoundError(DatasetError):
    """Raised when a dataset container does not exist on disk."""

    pass


class DatasetFormatError(DatasetError):
    """Raised when a dataset container is corrupt or inconsistent."""

    pass
