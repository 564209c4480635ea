"""Functional entry points over the model classes."""

import torch

from cropd.models.autoencoder import Autoencoder
from cropd.models.backbone import FeatureBackbone
from cropd.models.exceptions import ModelError
from cropd.models.head import LinearHead


def encode(ae: Autoencoder, x: torch.Tensor) -> torch.Tensor:
    """Latent z = f_en(x) of shape (batch, latent_dim)."""
    return ae.encode(x)


def decode(ae: Autoencoder, z: torch.Tensor) -> torch.Tensor:
    """Reconstruction f_de(z) with the encoder's input shape."""
    return ae.decode(z)


def project(ae: Autoencoder, z: torch.Tensor) -> torch.Tensor:
    """Unit-norm contrastive embedding of a latent batch."""
    return ae.project(z)


def foundation_forward(fm: FeatureBackbone, x: torch.Tensor) -> torch.Tensor:
    """
    Features of a frozen backbone.

    Gradients flow through to `x` even though the parameters are frozen.

    Raises:
        ModelError: If the backbone has not been frozen
    """
    if fm.trainable:
        raise ModelError("foundation_forward requires a frozen backbone")
    return fm(x)


def head_forward(head: LinearHead, features: torch.Tensor) -> torch.Tensor:
    """Logits of shape (batch, K)."""
    return head(features)
