from typing import Any

import torch
from torch import nn

from cropd.models.base_model import TensorModel
from cropd.models.exceptions import ShapeMismatchError
from cropd.models.model_types import HeadSpec
from cropd.utils.seeding import seeded


class LinearHead(TensorModel):
    """Linear classification layer f_last."""

    kind = "head"

    def __init__(self, spec: HeadSpec) -> None:
        super().__init__(dtype=spec.dtype)
        self.spec = spec
        self.linear = nn.Linear(spec.feature_dim, spec.num_classes)
        self.to(self.dtype)

    @classmethod
    def build(cls, spec: HeadSpec, seed: int) -> "LinearHead":
        with seeded(seed):
            return cls(spec)

    def spec_dict(self) -> dict[str, Any]:
        return self.spec.to_dict()

    @classmethod
    def from_spec_dict(cls, spec: dict[str, Any]) -> "LinearHead":
        return cls(HeadSpec(**spec))

    def forward(self, features: torch.Tensor) -> torch.Tensor:
        if features.dim() != 2 or features.shape[1] != self.spec.feature_dim:
            raise ShapeMismatchError(
                f"Head expects (batch, {self.spec.feature_dim}) features, got {tuple(features.shape)}"
            )
        return self.linear(self.cast_input(features))
