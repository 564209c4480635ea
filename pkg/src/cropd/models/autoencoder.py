import logging
import math
from typing import Any

import torch
from torch import nn

from cropd.models.base_model import TensorModel, activation_module, build_mlp
from cropd.models.exceptions import ShapeMismatchError
from cropd.models.model_types import AutoencoderSpec
from cropd.utils.seeding import seeded, torch_generator

logger = logging.getLogger(__name__)


class ConvEncoder(nn.Module):
    """Strided conv stack followed by a linear map to the latent space."""

    def __init__(self, spec: AutoencoderSpec) -> None:
        super().__init__()
        channels, height, width = spec.input_shape
        layers: list[nn.Module] = []
        previous = channels
        for out_channels in spec.conv_channels:
            layers.append(nn.Conv2d(previous, out_channels, kernel_size=3, stride=2, padding=1))
            layers.append(activation_module(spec.activation))
            previous = out_channels
        layers.append(nn.Flatten())
        self.features = nn.Sequential(*layers)
        with torch.no_grad():
            flat = self.features(torch.zeros(1, channels, height, width)).shape[1]
        self.to_latent = nn.Linear(flat, spec.latent_dim)

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        return self.to_latent(self.features(x))


class Autoencoder(TensorModel):
    """
    Pre-processing auto-encoder f_de(f_en(x)) with a contrastive projector.

    The decoder consumes the pre-projection latent z = f_en(x); the projector
    maps z to a unit-norm embedding used only by the contrastive objective.
    With masking enabled, a fixed coordinate mask (drawn once from
    `spec.mask_seed`) zeroes a `mask_fraction` share of the input before
    encoding; non-deterministic masking draws a fresh mask per call in
    training mode and is disabled in evaluation mode.
    """

    kind = "autoencoder"

    def __init__(self, spec: AutoencoderSpec) -> None:
        super().__init__(dtype=spec.dtype)
        self.spec = spec
        self.input_size = math.prod(spec.input_shape)

        if spec.encoder_kind == "conv":
            self.encoder: nn.Module = ConvEncoder(spec)
        else:
            self.encoder = build_mlp(
                [self.input_size, *spec.encoder_widths, spec.latent_dim], spec.activation
            )
        self.decoder = build_mlp(
            [spec.latent_dim, *spec.decoder_widths, self.input_size], spec.activation
        )
        self.projector = nn.Sequential(
            nn.Linear(spec.latent_dim, spec.projector_hidden),
            activation_module(spec.activation),
            nn.Linear(spec.projector_hidden, spec.projector_out),
        )

        mask = torch.ones(self.input_size)
        if spec.mask_fraction > 0:
            masked = round(spec.mask_fraction * self.input_size)
            order = torch.randperm(self.input_size, generator=torch_generator(spec.mask_seed))
            mask[order[:masked]] = 0.0
        self.register_buffer("mask", mask)
        self.to(self.dtype)

    @classmethod
    def build(cls, spec: AutoencoderSpec, seed: int) -> "Autoencoder":
        """Construct with weights drawn from `seed`."""
        with seeded(seed):
            return cls(spec)

    @classmethod
    def identity(cls, dim: int, seed: int = 0, **overrides: Any) -> "Autoencoder":
        """Single-layer encoder and decoder set to the identity matrix."""
        spec = AutoencoderSpec(
            input_shape=(dim,),
            encoder_widths=(),
            decoder_widths=(),
            latent_dim=dim,
            **overrides,
        )
        model = cls.build(spec, seed)
        with torch.no_grad():
            for layer in (model.encoder[0], model.decoder[0]):
                layer.weight.copy_(torch.eye(dim, dtype=model.dtype))
                layer.bias.zero_()
        return model

    def spec_dict(self) -> dict[str, Any]:
        return self.spec.to_dict()

    @classmethod
    def from_spec_dict(cls, spec: dict[str, Any]) -> "Autoencoder":
        return cls(AutoencoderSpec(**spec))

    def _apply_mask(self, flat: torch.Tensor) -> torch.Tensor:
        if self.spec.mask_fraction == 0:
            return flat
        if self.spec.mask_deterministic:
            return flat * self.mask
        if not self.training:
            return flat
        keep = (torch.rand(self.input_size, dtype=flat.dtype) >= self.spec.mask_fraction).to(flat.dtype)
        return flat * keep

    def encode(self, x: torch.Tensor) -> torch.Tensor:
        if tuple(x.shape[1:]) != self.spec.input_shape:
            raise ShapeMismatchError(
                f"Encoder expects samples of shape {self.spec.input_shape}, got {tuple(x.shape[1:])}"
            )
        flat = self._apply_mask(self.cast_input(x).reshape(x.shape[0], -1))
        if self.spec.encoder_kind == "conv":
            return self.encoder(flat.reshape(x.shape[0], *self.spec.input_shape))
        return self.encoder(flat)

    def decode(self, z: torch.Tensor) -> torch.Tensor:
        if z.dim() != 2 or z.shape[1] != self.spec.latent_dim:
            raise ShapeMismatchError(
                f"Decoder expects (batch, {self.spec.latent_dim}) latents, got {tuple(z.shape)}"
            )
        out = self.decoder(self.cast_input(z))
        return out.reshape(z.shape[0], *self.spec.input_shape)

    def project_with_flags(self, z: torch.Tensor) -> tuple[torch.Tensor, torch.Tensor]:
        """Unit-norm embeddings plus a mask of rows that were exactly zero.

        Zero rows are replaced by the first standard basis vector.
        """
        if z.dim() != 2 or z.shape[1] != self.spec.latent_dim:
            raise ShapeMismatchError(
                f"Projector expects (batch, {self.spec.latent_dim}) latents, got {tuple(z.shape)}"
            )
        raw = self.projector(self.cast_input(z))
        norms = raw.norm(dim=1, keepdim=True)
        degenerate = norms.squeeze(1) == 0
        if degenerate.any():
            logger.warning("Projector produced %d zero rows; using a fixed unit vector", int(degenerate.sum()))
            fallback = torch.zeros_like(raw)
            fallback[:, 0] = 1.0
            safe = torch.where(norms == 0, torch.ones_like(norms), norms)
            return torch.where(degenerate.unsqueeze(1), fallback, raw / safe), degenerate
        return raw / norms, degenerate

    def project(self, z: torch.Tensor) -> torch.Tensor:
        return self.project_with_flags(z)[0]

    def embed(self, x: torch.Tensor) -> torch.Tensor:
        """Contrastive embedding project(encode(x))."""
        return self.project(self.encode(x))

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        return self.decode(self.encode(x))
