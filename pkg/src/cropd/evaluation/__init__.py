from cropd.evaluation.pipeline import Pipeline, pipeline_forward, preprocess
from cropd.evaluation.evaluation_types import EvalResult
from cropd.evaluation.bootstrap import bootstrap_ci, DEFAULT_REPEATS
from cropd.evaluation.evaluate import evaluate, transfer_evaluate
from cropd.evaluation.exceptions import (
    EvaluationError,
    EmptyCorrectnessError,
    PipelineShapeError,
    PipelineConfigurationError,
)

__all__ = [
    "Pipeline",
    "pipeline_forward",
    "preprocess",
    "EvalResult",
    "bootstrap_ci",
    "DEFAULT_REPEATS",
    "evaluate",
    "transfer_evaluate",
    "EvaluationError",
    "EmptyCorrectnessError",
    "PipelineShapeError",
    "PipelineConfigurationError",
]
