from cropd.exceptions import CropdError


class TrainingError(CropdError):
    """Base exception for training errors"""

    pass


class TrainingDivergedError(TrainingError):
    """Raised when a training loss becomes NaN or infinite"""

    pass


class UnsupportedVariantError(TrainingError):
    """Raised when a pipeline variant has no trainable pre-processor"""

    pass


class UnfrozenComponentError(TrainingError):
    """Raised when head training finds a trainable upstream component"""

    pass
