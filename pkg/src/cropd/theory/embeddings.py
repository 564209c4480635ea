"""Embedding maps and contrastive attack objectives shared by the theory checks."""

from typing import Callable

import torch

from cropd.losses.contrastive import batch_contrastive_loss
from cropd.losses.loss_types import DEFAULT_TEMPERATURE, ContrastiveBatch
from cropd.models.autoencoder import Autoencoder
from cropd.theory.theory_types import EmbeddingSpace

EmbedFn = Callable[[torch.Tensor], torch.Tensor]


def unit_rows(v: torch.Tensor) -> torch.Tensor:
    """Row-normalize; zero rows become the first basis vector."""
    flat = v.reshape(v.shape[0], -1).to(torch.float64)
    norms = flat.norm(dim=1, keepdim=True)
    fallback = torch.zeros_like(flat)
    fallback[:, 0] = 1.0
    safe = torch.where(norms == 0, torch.ones_like(norms), norms)
    return torch.where(norms == 0, fallback, flat / safe)


def embedding_fn(encoder: Autoencoder | None, space: EmbeddingSpace = "projector") -> EmbedFn:
    """
    Map used for eta and contrastive measurements.

    "projector" gives the unit-norm projector output and "latent" the raw
    encoder output. Without an encoder the normalized raw inputs stand in.
    """
    if encoder is None:
        return unit_rows
    if space == "latent":
        return encoder.encode
    return encoder.embed


def contrastive_attack_objective(
    embed: EmbedFn, anchors: torch.Tensor, tau: float = DEFAULT_TEMPERATURE
) -> Callable[[torch.Tensor], torch.Tensor]:
    """
    Loss to maximize when pushing embeddings of x' away from fixed anchors.

    Batches of two or more use the contrastive loss on normalized rows; a
    single sample falls back to 1 - cosine similarity.
    """
    anchors = unit_rows(anchors.detach())

    def loss_of(x_prime: torch.Tensor) -> torch.Tensor:
        positives = unit_rows(embed(x_prime))
        if anchors.shape[0] < 2:
            return (1 - (positives * anchors).sum(dim=1)).sum()
        return batch_contrastive_loss(ContrastiveBatch(anchors, positives, tau))

    return loss_of
