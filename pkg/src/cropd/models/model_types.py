"""Model specification types."""

from dataclasses import asdict, dataclass
from enum import Enum
from typing import Any, Literal

import torch

from cropd.models.exceptions import ModelError

Activation = Literal["relu", "gelu"]

DTYPES = {"float32": torch.float32, "float64": torch.float64}


class PipelineVariant(str, Enum):
    """Pre-processor variant of a pipeline."""

    IDENTITY = "Identity"
    VANILLA = "Vanilla"
    ARAE = "ARAE"
    CROPD = "CRoPD"

    @property
    def uses_autoencoder(self) -> bool:
        return self is not PipelineVariant.IDENTITY


def _as_tuple(values: Any) -> tuple[int, ...]:
    return tuple(int(v) for v in values)


@dataclass(frozen=True)
class AutoencoderSpec:
    """Architecture of the pre-processing auto-encoder and its projector."""

    input_shape: tuple[int, ...]
    encoder_widths: tuple[int, ...] = (64,)
    decoder_widths: tuple[int, ...] = (64,)
    latent_dim: int = 16
    projector_hidden: int = 128
    projector_out: int = 128
    mask_fraction: float = 0.0
    mask_deterministic: bool = True
    mask_seed: int = 0
    activation: Activation = "gelu"
    encoder_kind: Literal["mlp", "conv"] = "mlp"
    conv_channels: tuple[int, ...] = (8, 16)
    dtype: str = "float64"

    def __post_init__(self) -> None:
        for name in ("input_shape", "encoder_widths", "decoder_widths", "conv_channels"):
            object.__setattr__(self, name, _as_tuple(getattr(self, name)))
        if self.projector_out < 2:
            raise ModelError("projector_out must be at least 2")
        if not 0.0 <= self.mask_fraction < 1.0:
            raise ModelError("mask_fraction must lie in [0, 1)")
        if self.latent_dim < 1:
            raise ModelError("latent_dim must be positive")
        if self.encoder_kind == "conv" and len(self.input_shape) != 3:
            raise ModelError("The conv encoder needs (c, h, w) inputs")
        if self.dtype not in DTYPES:
            raise ModelError(f"Unsupported dtype '{self.dtype}'")

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)


@dataclass(frozen=True)
class BackboneSpec:
    """Architecture of the frozen feature extractor.

    kind: "trained" (clean pre-training, then frozen), "random" (fixed random
    features) or "identity" (features are the flattened inputs).
    """

    input_shape: tuple[int, ...]
    hidden_widths: tuple[int, ...] = (64,)
    feature_dim: int = 32
    activation: Activation = "gelu"
    kind: Literal["trained", "random", "identity"] = "trained"
    dtype: str = "float64"

    def __post_init__(self) -> None:
        object.__setattr__(self, "input_shape", _as_tuple(self.input_shape))
        object.__setattr__(self, "hidden_widths", _as_tuple(self.hidden_widths))
        if self.dtype not in DTYPES:
            raise ModelError(f"Unsupported dtype '{self.dtype}'")

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)


@dataclass(frozen=True)
class HeadSpec:
    """Linear classification head."""

    feature_dim: int
    num_classes: int
    dtype: str = "float64"

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)


@dataclass(frozen=True)
class GradCheckReport:
    """Analytic vs central finite-difference gradient comparison."""

    max_rel_err_params: float
    max_rel_err_input: float
    coordinates_checked: int
    tol: float

    @property
    def max_rel_err(self) -> float:
        return max(self.max_rel_err_params, self.max_rel_err_input)

    @property
    def passed(self) -> bool:
        # Strict comparison: tol=0 can never pass.
        return self.max_rel_err < self.tol
