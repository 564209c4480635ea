import math
from typing import Any

import torch
from torch import nn

from cropd.models.base_model import TensorModel, build_mlp
from cropd.models.exceptions import ShapeMismatchError
from cropd.models.model_types import BackboneSpec
from cropd.utils.seeding import seeded


class FeatureBackbone(TensorModel):
    """
    Feature extractor f_pre standing in for a pre-trained foundation model.

    Every forward call increments `forward_calls`, which lets callers prove
    that a procedure never queried the backbone.
    """

    kind = "backbone"

    def __init__(self, spec: BackboneSpec) -> None:
        super().__init__(dtype=spec.dtype)
        self.spec = spec
        self.input_size = math.prod(spec.input_shape)
        self.forward_calls = 0
        if spec.kind == "identity":
            self.body: nn.Module = nn.Identity()
            self.feature_dim = self.input_size
        else:
            self.body = build_mlp(
                [self.input_size, *spec.hidden_widths, spec.feature_dim], spec.activation
            )
            self.feature_dim = spec.feature_dim
        self.to(self.dtype)

    @classmethod
    def build(cls, spec: BackboneSpec, seed: int) -> "FeatureBackbone":
        with seeded(seed):
            return cls(spec)

    def spec_dict(self) -> dict[str, Any]:
        return self.spec.to_dict()

    @classmethod
    def from_spec_dict(cls, spec: dict[str, Any]) -> "FeatureBackbone":
        return cls(BackboneSpec(**spec))

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        if tuple(x.shape[1:]) != self.spec.input_shape:
            raise ShapeMismatchError(
                f"Backbone expects samples of shape {self.spec.input_shape}, got {tuple(x.shape[1:])}"
            )
        self.forward_calls += 1
        return self.body(self.cast_input(x).reshape(x.shape[0], -1))
