from dataclasses import dataclass
from typing import Optional

import torch

from cropd.evaluation.exceptions import PipelineConfigurationError, PipelineShapeError
from cropd.models.autoencoder import Autoencoder
from cropd.models.backbone import FeatureBackbone
from cropd.models.head import LinearHead
from cropd.models.model_types import PipelineVariant
from cropd.models.operations import decode, encode, foundation_forward, head_forward


@dataclass
class Pipeline:
    """
    Pre-processor, frozen foundation backbone and linear head.

    forward(x) = head(foundation(decode(encode(x)))), or head(foundation(x))
    for the Identity variant, which carries no auto-encoder.
    """

    variant: PipelineVariant
    foundation: FeatureBackbone
    head: LinearHead
    autoencoder: Optional[Autoencoder] = None

    def __post_init__(self) -> None:
        self.variant = PipelineVariant(self.variant)
        if (self.variant is PipelineVariant.IDENTITY) != (self.autoencoder is None):
            raise PipelineConfigurationError(
                f"Variant {self.variant.value} {'must not' if self.autoencoder is not None else 'must'} "
                "carry an auto-encoder"
            )
        if self.foundation.trainable:
            raise PipelineConfigurationError("The foundation backbone of a pipeline must be frozen")
        if self.autoencoder is not None and self.autoencoder.spec.input_shape != self.foundation.spec.input_shape:
            raise PipelineShapeError(
                f"Auto-encoder reconstructs {self.autoencoder.spec.input_shape} but the backbone "
                f"expects {self.foundation.spec.input_shape}"
            )
        if self.head.spec.feature_dim != self.foundation.feature_dim:
            raise PipelineShapeError(
                f"Head expects {self.head.spec.feature_dim} features, backbone yields {self.foundation.feature_dim}"
            )

    @property
    def input_shape(self) -> tuple[int, ...]:
        return self.foundation.spec.input_shape

    def __call__(self, x: torch.Tensor) -> torch.Tensor:
        return pipeline_forward(self, x)


def preprocess(pipe: Pipeline, x: torch.Tensor) -> torch.Tensor:
    """Pre-processor output fed to the backbone (x itself for Identity)."""
    if pipe.autoencoder is None:
        return x
    return decode(pipe.autoencoder, encode(pipe.autoencoder, x))


def pipeline_forward(pipe: Pipeline, x: torch.Tensor) -> torch.Tensor:
    """
    Logits of the full chain; differentiable with respect to x.

    Raises:
        PipelineShapeError: If x does not match the pipeline's input shape
    """
    if tuple(x.shape[1:]) != pipe.input_shape:
        raise PipelineShapeError(f"Pipeline expects samples of shape {pipe.input_shape}, got {tuple(x.shape[1:])}")
    return head_forward(pipe.head, foundation_forward(pipe.foundation, preprocess(pipe, x)))
