"""Cosine similarity and the adversarial contrastive loss."""

from typing import Sequence

import torch

from cropd.losses.exceptions import EmptyNegativesError, LossError, ZeroVectorError
from cropd.losses.loss_types import ContrastiveBatch


def cosine_sim(u: torch.Tensor, v: torch.Tensor) -> torch.Tensor:
    """
    sim(u, v) = u.v / (|u| |v|) along the last dimension.

    Raises:
        ZeroVectorError: If any compared vector has zero norm
    """
    u_norm = u.norm(dim=-1)
    v_norm = v.norm(dim=-1)
    if (u_norm == 0).any() or (v_norm == 0).any():
        raise ZeroVectorError("Cosine similarity is undefined for zero vectors")
    return (u * v).sum(dim=-1) / (u_norm * v_norm)


def contrastive_item_loss(
    anchor: torch.Tensor,
    positive: torch.Tensor,
    negatives: torch.Tensor | Sequence[torch.Tensor],
    tau: float,
) -> torch.Tensor:
    """
    Per-item loss -log[exp(sim(positive, anchor)/tau) / sum_neg exp(sim(anchor, neg)/tau)].

    The denominator holds negatives only, so the value can be negative.

    Args:
        anchor: Clean embedding
        positive: Adversarial view of the anchor
        negatives: (N, dim) matrix or sequence of vectors, N >= 1
        tau: Temperature

    Raises:
        EmptyNegativesError: If there are no negatives
        LossError: If tau is not positive
    """
    if not tau > 0:
        raise LossError(f"tau must be positive, got {tau}")
    if not isinstance(negatives, torch.Tensor):
        if len(negatives) == 0:
            raise EmptyNegativesError("contrastive_item_loss needs at least one negative")
        negatives = torch.stack(list(negatives))
    if negatives.numel() == 0 or negatives.shape[0] == 0:
        raise EmptyNegativesError("contrastive_item_loss needs at least one negative")

    positive_term = cosine_sim(positive, anchor) / tau
    negative_terms = cosine_sim(anchor.unsqueeze(0), negatives) / tau
    return -positive_term + torch.logsumexp(negative_terms, dim=0)


def batch_contrastive_loss(cb: ContrastiveBatch) -> torch.Tensor:
    """
    Mean of per-pair losses over a batch.

    Negatives of pair i are all 2M rows except anchor i and positive i.
    Rows are unit-norm, so dot products are cosine similarities.
    """
    m = cb.size
    rows = torch.cat([cb.anchors, cb.positives])
    logits = cb.anchors @ rows.T / cb.temperature

    excluded = torch.zeros(m, 2 * m, dtype=torch.bool, device=logits.device)
    index = torch.arange(m, device=logits.device)
    excluded[index, index] = True
    excluded[index, index + m] = True
    negative_logits = logits.masked_fill(excluded, float("-inf"))

    positive_logits = (cb.anchors * cb.positives).sum(dim=1) / cb.temperature
    return (-positive_logits + torch.logsumexp(negative_logits, dim=1)).mean()
