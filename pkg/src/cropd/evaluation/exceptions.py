from cropd.exceptions import CropdError


class EvaluationError(CropdError):
    """Base exception for evaluation errors"""

    pass


class EmptyCorrectnessError(EvaluationError):
    """Raised when a bootstrap receives an empty correctness vector"""

    pass


class PipelineShapeError(EvaluationError):
    """Raised when pipeline components or inputs have incompatible shapes"""

    pass


class PipelineConfigurationError(EvaluationError):
    """Raised when a pipeline's variant, auto-encoder or freeze state disagree"""

    pass
