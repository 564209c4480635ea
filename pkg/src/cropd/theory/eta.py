import logging
from typing import Optional

import torch

from cropd.attacks.gradient_attacks import pgd
from cropd.attacks.threat_model import ThreatModel
from cropd.data.dataset_types import LabeledDataset
from cropd.losses.loss_types import DEFAULT_TEMPERATURE
from cropd.models.autoencoder import Autoencoder
from cropd.theory.embeddings import contrastive_attack_objective, embedding_fn
from cropd.theory.exceptions import SingleClassError
from cropd.theory.theory_types import EmbeddingSpace, EtaReport
from cropd.utils.geometry import pairwise_distances
from cropd.utils.seeding import torch_generator

logger = logging.getLogger(__name__)

EXHAUSTIVE_LIMIT = 2000


def _check_classes(labels: torch.Tensor) -> None:
    counts = torch.bincount(labels)
    if int((counts >= 2).sum()) < 2:
        raise SingleClassError("estimate_eta needs at least two classes with two or more samples each")


def estimate_eta(
    encoder: Optional[Autoencoder],
    ds: LabeledDataset,
    tm: ThreatModel,
    space: EmbeddingSpace = "projector",
    tau: float = DEFAULT_TEMPERATURE,
    batch_size: int = 256,
    max_samples: int = EXHAUSTIVE_LIMIT,
    seed: int = 0,
) -> EtaReport:
    """
    Measure eta1 (same-input perturbation) and eta2 (cross-class separation).

    Adversarial inputs come from PGD on the contrastive objective against the
    clean embeddings. The pair scan is exhaustive up to `max_samples` inputs;
    larger datasets are subsampled without replacement using `seed`.

    Raises:
        SingleClassError: If fewer than two classes have two samples
    """
    _check_classes(ds.labels)
    subsampled = len(ds) > max_samples
    if subsampled:
        index = torch.randperm(len(ds), generator=torch_generator(seed))[:max_samples]
        ds = ds.subset(index)
        _check_classes(ds.labels)
        logger.info("estimate_eta subsampled %d inputs", max_samples)

    if encoder is not None:
        encoder.eval()
    embed = embedding_fn(encoder, space)
    clean_parts, adv_parts = [], []
    for start in range(0, len(ds), batch_size):
        x = ds.inputs[start : start + batch_size]
        with torch.no_grad():
            anchors = embed(x)
        x_adv = pgd(contrastive_attack_objective(embed, anchors, tau), x, tm)
        with torch.no_grad():
            clean_parts.append(anchors.reshape(x.shape[0], -1).to(torch.float64))
            adv_parts.append(embed(x_adv).reshape(x.shape[0], -1).to(torch.float64))

    clean = torch.cat(clean_parts)
    adversarial = torch.cat(adv_parts)
    n = clean.shape[0]

    eta1 = float((adversarial - clean).norm(dim=1).max())

    cross = ds.labels[:, None] != ds.labels[None, :]
    upper = torch.triu(cross, diagonal=1)
    clean_clean = pairwise_distances(clean, clean)[upper]
    clean_adv = pairwise_distances(clean, adversarial)[cross]
    eta2 = float(torch.cat([clean_clean, clean_adv]).min())

    return EtaReport(
        eta1=eta1,
        eta2=eta2,
        margin_ok=eta2 > eta1,
        sample_count=n,
        pairs_visited=n + clean_clean.numel() + clean_adv.numel(),
        space=space,
        subsampled=subsampled,
    )
