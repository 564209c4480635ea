from cropd.exceptions import CropdError


class LossError(CropdError):
    """Base exception for loss errors"""

    pass


class ZeroVectorError(LossError):
    """Raised when a cosine similarity receives a zero vector"""

    pass


class EmptyNegativesError(LossError):
    """Raised when a contrastive loss has no negatives"""

    pass


class BatchTooSmallError(LossError):
    """Raised when a batch cannot provide at least one negative per anchor"""

    pass


class InvalidLabelError(LossError):
    """Raised when a class label falls outside [0, K)"""

    pass
