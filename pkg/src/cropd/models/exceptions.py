"""Custom exceptions for model construction, use and storage."""

from cropd.exceptions import CropdError


class ModelError(CropdError):
    """Base exception for model-related errors."""

    pass


class ShapeMismatchError(ModelError):
    """Raised when a tensor does not match the shape a model expects."""

    pass


class FrozenModelError(ModelError):
    """Raised when a parameter update is attempted on a frozen model."""

    pass


class CheckpointError(ModelError):
    """Raised when a checkpoint cannot be written, read or rebuilt."""

    pass
