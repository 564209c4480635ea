"""Pre-processor training objectives."""

import logging
from typing import Optional

import torch

from cropd.attacks.gradient_attacks import fgsm
from cropd.attacks.threat_model import ThreatModel
from cropd.data.augmentation import augment
from cropd.data.dataset_types import AugmentationPolicy
from cropd.losses.contrastive import batch_contrastive_loss
from cropd.losses.exceptions import BatchTooSmallError, LossError
from cropd.losses.loss_types import DEFAULT_TEMPERATURE, ContrastiveBatch, ObjectiveTerms
from cropd.losses.reconstruction import reconstruction_loss, squared_error
from cropd.models.autoencoder import Autoencoder

logger = logging.getLogger(__name__)


def _terms(
    reconstruction: torch.Tensor,
    total: torch.Tensor,
    contrastive: Optional[torch.Tensor] = None,
    adversarial_reconstruction: Optional[torch.Tensor] = None,
    degenerate_rows: int = 0,
) -> ObjectiveTerms:
    return ObjectiveTerms(
        reconstruction=reconstruction.item(),
        contrastive=None if contrastive is None else contrastive.item(),
        adversarial_reconstruction=None if adversarial_reconstruction is None else adversarial_reconstruction.item(),
        total=total.item(),
        degenerate_rows=degenerate_rows,
    )


def cropd_objective(
    ae: Autoencoder,
    X: torch.Tensor,
    lam: float,
    tm: ThreatModel,
    tau: float = DEFAULT_TEMPERATURE,
    aug: Optional[AugmentationPolicy] = None,
    seed: int = 0,
) -> tuple[torch.Tensor, ObjectiveTerms]:
    """
    Reconstruction plus lam times the FGSM-approximated adversarial contrastive loss.

    The auto-encoder reconstructs the (optionally augmented) clean batch and
    anchors are projector embeddings of that view. Positives are embeddings of
    FGSM attacks on those anchors against the contrastive loss with the current
    encoder. Negatives come from the batch.

    Args:
        ae: Auto-encoder being trained
        X: Clean input batch
        lam: Weight of the contrastive term, lam >= 0
        tm: Attack budget for the inner maximization
        tau: Contrastive temperature
        aug: Augmentation applied to the auto-encoder inputs when enabled
        seed: Augmentation seed

    Returns:
        tuple: (scalar loss, term-wise diagnostics). lam=0 returns the
            reconstruction loss itself.

    Raises:
        LossError: If lam is negative
        BatchTooSmallError: If lam > 0 and the batch has fewer than two samples
    """
    if lam < 0:
        raise LossError(f"lambda must be non-negative, got {lam}")

    x_anchor = augment(X, aug, seed) if aug is not None and aug.enabled else X
    recon = reconstruction_loss(ae, x_anchor)
    if lam == 0:
        return recon, _terms(recon, recon)
    if X.shape[0] < 2:
        raise BatchTooSmallError("The contrastive term needs a batch of at least two samples")

    anchors = ae.embed(x_anchor)
    fixed_anchors = anchors.detach()

    def contrastive_of(x_prime: torch.Tensor) -> torch.Tensor:
        return batch_contrastive_loss(ContrastiveBatch(fixed_anchors, ae.embed(x_prime), tau))

    x_adv = fgsm(contrastive_of, x_anchor, tm)
    positives, degenerate = ae.project_with_flags(ae.encode(x_adv))
    contrastive = batch_contrastive_loss(ContrastiveBatch(anchors, positives, tau))
    total = recon + lam * contrastive
    return total, _terms(recon, total, contrastive=contrastive, degenerate_rows=int(degenerate.sum()))


def arae_terms(
    ae: Autoencoder,
    X: torch.Tensor,
    gamma: float,
    tm: ThreatModel,
) -> tuple[torch.Tensor, ObjectiveTerms]:
    """arae_objective together with its term-wise diagnostics."""
    if gamma < 0:
        raise LossError(f"gamma must be non-negative, got {gamma}")

    recon = reconstruction_loss(ae, X)
    if gamma == 0:
        return recon, _terms(recon, recon)

    target = X.detach()
    x_adv = fgsm(lambda x_prime: squared_error(ae(x_prime), target), X, tm)
    adversarial = squared_error(ae(x_adv), target)
    total = recon + gamma * adversarial
    return total, _terms(recon, total, adversarial_reconstruction=adversarial)


def arae_objective(ae: Autoencoder, X: torch.Tensor, gamma: float, tm: ThreatModel) -> torch.Tensor:
    """
    Clean reconstruction plus gamma times the reconstruction error of an FGSM
    input that maximizes that error. gamma=0 is the plain reconstruction loss.
    """
    return arae_terms(ae, X, gamma, tm)[0]
