from abc import ABC, abstractmethod
from typing import Any, ClassVar

import torch
from torch import nn

from cropd.models.exceptions import FrozenModelError, ModelError
from cropd.models.model_types import DTYPES


def activation_module(name: str) -> nn.Module:
    if name == "relu":
        return nn.ReLU()
    if name == "gelu":
        return nn.GELU()
    raise ModelError(f"Unknown activation '{name}'")


def build_mlp(widths: list[int], activation: str) -> nn.Sequential:
    """Linear layers over consecutive widths with the activation between them."""
    layers: list[nn.Module] = []
    for i, (fan_in, fan_out) in enumerate(zip(widths[:-1], widths[1:])):
        layers.append(nn.Linear(fan_in, fan_out))
        if i < len(widths) - 2:
            layers.append(activation_module(activation))
    return nn.Sequential(*layers)


class TensorModel(nn.Module, ABC):
    """Base class for every differentiable component of a pipeline.

    A model starts trainable. `freeze()` turns off parameter gradients and
    switches to evaluation mode; afterwards any attempt to obtain parameters
    for an update raises FrozenModelError, while gradients with respect to the
    inputs stay available.
    """

    kind: ClassVar[str]

    def __init__(self, dtype: str = "float64") -> None:
        super().__init__()
        self._trainable = True
        self._dtype_name = dtype

    @property
    def trainable(self) -> bool:
        return self._trainable

    @property
    def dtype(self) -> torch.dtype:
        return DTYPES[self._dtype_name]

    def freeze(self) -> "TensorModel":
        """Freeze parameters in place and return self."""
        for param in self.parameters():
            param.requires_grad_(False)
        self._trainable = False
        self.eval()
        return self

    def trainable_parameters(self) -> list[nn.Parameter]:
        """Parameters an optimizer may update.

        Raises:
            FrozenModelError: If the model is frozen
        """
        if not self._trainable:
            raise FrozenModelError(f"{self.__class__.__name__} is frozen; parameters cannot be updated")
        return [p for p in self.parameters() if p.requires_grad]

    def get_params(self) -> dict[str, torch.Tensor]:
        """Detached copies of every parameter and buffer, keyed by path."""
        return {name: value.detach().clone() for name, value in self.state_dict().items()}

    def set_params(self, params: dict[str, torch.Tensor]) -> None:
        """Overwrite parameters and buffers from a path-keyed mapping.

        Raises:
            FrozenModelError: If the model is frozen
        """
        if not self._trainable:
            raise FrozenModelError(f"{self.__class__.__name__} is frozen; parameters cannot be set")
        self.load_state_dict(params, strict=True)

    def cast_input(self, x: torch.Tensor) -> torch.Tensor:
        return x.to(self.dtype)

    @abstractmethod
    def spec_dict(self) -> dict[str, Any]:
        """Architecture description stored in checkpoints."""
        pass

    @classmethod
    @abstractmethod
    def from_spec_dict(cls, spec: dict[str, Any]) -> "TensorModel":
        """Rebuild an untrained instance from `spec_dict()` output."""
        pass
